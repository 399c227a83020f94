#pragma once

#include "pinstt/scenario.hpp"

#include <vector>

namespace pinstt {

/// Shrinking per-axis tracking corridors for stages 2..N. Entry [k-2] holds
/// stage k; gamma_{k,i}(t) = (p - q) e^{-mu t} + q.
struct FunnelParams {
    std::vector<Vector> initial_halfwidth;  // p, per stage per axis, p > q
    std::vector<Vector> final_halfwidth;    // q, > 0
    std::vector<Vector> decay_rate;         // mu, >= 0

    int stage_count() const { return static_cast<int>(initial_halfwidth.size()); }
    void validate() const;
};

/// Stage gains kappa_1..kappa_N, all positive.
struct GainSet {
    std::vector<double> kappa;

    int depth() const { return static_cast<int>(kappa.size()); }
    void validate() const;
};

/// Corridor half-width of stage k (2-based), axis i, at time t >= 0.
double funnel_gamma(const FunnelParams& fp, int stage, int axis, double t);

/// Normalized errors clamped to |e| <= 1 - 1e-6 so the barrier stays finite;
/// any clamp is surfaced, never silent.
inline constexpr double kErrorClamp = 1e-6;

struct StageOutput {
    Vector command;
    Vector raw_error;    // pre-clamp normalized error (stage 1: single entry)
    bool clamped = false;
};

/// Tube-containment feedback: r2 = -kappa1 ln((1+e1)/(1-e1)) (x1 - c(t)) with
/// e1 = ||x1 - c(t)|| / r(t).
StageOutput stage1_control(const Vector& x1, const TubeSlice& slice, double kappa1);

/// Funnel tracking for stage k in [2;N]: e = diag(gamma)^-1 (x_k - r_k),
/// output = -kappa 4 diag(gamma)^-1 (I - diag(e o e))^-1 atanh-style barrier.
StageOutput stagek_control(const Vector& x_k, const Vector& r_k, const FunnelParams& fp,
                           int stage, double t, double kappa);

struct ControlDiagnostics {
    double tube_error = 0.0;                 // e1, pre-clamp
    std::vector<Vector> stage_errors;        // e_k per stage 2..N, pre-clamp
    bool clamped = false;
};

struct ControlOutput {
    Vector input;   // u
    ControlDiagnostics diagnostics;
};

/// Chains stage 1 through stage N over the stacked state z = [x_1; ...; x_N].
/// Pure function of (z, slice, t).
ControlOutput full_control(const Vector& stacked_state, const TubeSlice& slice,
                           const FunnelParams& fp, const GainSet& gains, double t);

}  // namespace pinstt
