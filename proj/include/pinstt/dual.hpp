#pragma once

#include <Eigen/Core>

#include <cmath>

namespace pinstt {

/// First-order dual number carrying a value and one directional derivative.
/// Arithmetic follows the product/chain rules, so evaluating a function on
/// Dual inputs yields its exact derivative along the seeded direction.
template <class S>
struct Dual {
    S value{};
    S tangent{};

    Dual() = default;
    Dual(S v) : value(v) {}  // NOLINT: implicit lift of constants
    Dual(S v, S t) : value(v), tangent(t) {}

    Dual& operator+=(const Dual& o) {
        value += o.value;
        tangent += o.tangent;
        return *this;
    }
    Dual& operator-=(const Dual& o) {
        value -= o.value;
        tangent -= o.tangent;
        return *this;
    }
    Dual& operator*=(const Dual& o) {
        tangent = value * o.tangent + tangent * o.value;
        value *= o.value;
        return *this;
    }
    Dual& operator/=(const Dual& o) {
        tangent = (tangent * o.value - value * o.tangent) / (o.value * o.value);
        value /= o.value;
        return *this;
    }
};

template <class S>
Dual<S> operator+(Dual<S> a, const Dual<S>& b) { return a += b; }
template <class S>
Dual<S> operator-(Dual<S> a, const Dual<S>& b) { return a -= b; }
template <class S>
Dual<S> operator*(Dual<S> a, const Dual<S>& b) { return a *= b; }
template <class S>
Dual<S> operator/(Dual<S> a, const Dual<S>& b) { return a /= b; }
template <class S>
Dual<S> operator-(const Dual<S>& a) { return {-a.value, -a.tangent}; }

template <class S>
Dual<S> tanh(const Dual<S>& a) {
    const S th = std::tanh(a.value);
    return {th, (S(1) - th * th) * a.tangent};
}

template <class S>
Dual<S> sin(const Dual<S>& a) {
    return {std::sin(a.value), std::cos(a.value) * a.tangent};
}

using DualScalar = Dual<double>;

}  // namespace pinstt

namespace Eigen {

template <class S>
struct NumTraits<pinstt::Dual<S>> : NumTraits<S> {
    using Real = pinstt::Dual<S>;
    using NonInteger = pinstt::Dual<S>;
    using Nested = pinstt::Dual<S>;
    enum {
        IsComplex = 0,
        IsInteger = 0,
        IsSigned = 1,
        RequireInitialization = 1,
        ReadCost = 2,
        AddCost = 2,
        MulCost = 4
    };
};

}  // namespace Eigen
