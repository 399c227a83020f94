#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pinstt/dual.hpp"
#include "pinstt/errors.hpp"
#include "pinstt/loss.hpp"
#include "pinstt/tube_net.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <random>

using namespace pinstt;

namespace {

Vector vec2(double a, double b) {
    Vector v(2);
    v << a, b;
    return v;
}

TrasScenario scenario_2d() {
    TrasScenario scen;
    scen.dimension = 2;
    scen.space = {vec2(3.5, 3.5), 3.5};
    scen.start = {vec2(1.5, 1.5), 0.25};
    scen.target = {vec2(5.5, 5.5), 0.25};
    scen.prescribed_time = 10.0;
    scen.min_radius = 0.1;
    scen.obstacles.push_back(Obstacle{BallShape{vec2(3.0, 4.5), 0.5}, StaticMotion{}});
    return scen;
}

TubeNet randomized_net(std::uint64_t seed, double weight_scale = 1.0) {
    TubeNet net = init_network(2, 10.0, {8, 8}, seed);
    if (weight_scale != 1.0) {
        net.set_parameters(net.parameters() * weight_scale);
    }
    return net;
}

}  // namespace

TEST_CASE("dual arithmetic obeys the product and chain rules") {
    const DualScalar a{2.0, 3.0};
    const DualScalar b{-1.5, 0.5};
    const DualScalar prod = a * b;
    CHECK(prod.value == doctest::Approx(-3.0));
    CHECK(prod.tangent == doctest::Approx(2.0 * 0.5 + 3.0 * (-1.5)));

    const DualScalar th = tanh(a);
    CHECK(th.value == doctest::Approx(std::tanh(2.0)));
    CHECK(th.tangent == doctest::Approx((1.0 - std::tanh(2.0) * std::tanh(2.0)) * 3.0));

    const DualScalar quot = a / b;
    CHECK(quot.value == doctest::Approx(2.0 / -1.5));
    CHECK(quot.tangent == doctest::Approx((3.0 * -1.5 - 2.0 * 0.5) / (1.5 * 1.5)));
}

TEST_CASE("init_network is seed-deterministic and fan-in scaled") {
    const TubeNet a = init_network(2, 10.0, {64, 64, 64}, 7);
    const TubeNet b = init_network(2, 10.0, {64, 64, 64}, 7);
    CHECK(a.parameters() == b.parameters());

    const TubeNet c = init_network(2, 10.0, {64, 64, 64}, 8);
    CHECK(a.parameters() != c.parameters());

    CHECK(a.parameter_count() == 8643);
    for (int l = 0; l < a.layer_count(); ++l) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(a.weight(l).cols()));
        CHECK(a.weight(l).cwiseAbs().maxCoeff() <= bound);
        CHECK(a.bias(l).cwiseAbs().maxCoeff() == 0.0);
    }

    CHECK_THROWS_AS(init_network(2, 10.0, {0}, 7), InvariantError);
    CHECK_THROWS_AS(init_network(2, 10.0, {8, -3}, 7), InvariantError);
}

TEST_CASE("zero-weight network collapses to the output biases") {
    TubeNet net(2, 10.0, {8});
    Vector params = net.parameters();
    params.setZero();
    net.set_parameters(params);
    net.bias(net.layer_count() - 1) << 1.5, -0.5, 0.75;

    const TubeEval eval = forward(net, 3.0);
    CHECK(eval.center.isApprox(vec2(1.5, -0.5)));
    CHECK(eval.radius == doctest::Approx(0.75));

    const TubeRates rates = time_derivative(net, 3.0);
    CHECK(rates.center_rate.norm() == 0.0);
    CHECK(rates.radius_rate == 0.0);
}

TEST_CASE("forward is deterministic and consistent with evaluate_slice") {
    const TubeNet net = randomized_net(7);
    const TubeEval first = forward(net, 4.2);
    const TubeEval second = forward(net, 4.2);
    CHECK(first.center == second.center);
    CHECK(first.radius == second.radius);

    const TubeSlice slice = evaluate_slice(net, 4.2);
    CHECK(slice.center == first.center);
    CHECK(slice.radius == first.radius);
}

TEST_CASE("seed-7 forward matches the frozen reference values") {
    const TubeNet net = init_network(2, 10.0, {64, 64, 64}, 7);
    // frozen from the reference run of this implementation; at the midpoint
    // the normalized time is 0 and the zero biases collapse the output exactly
    const TubeEval mid = forward(net, 5.0);
    CHECK(mid.center[0] == 0.0);
    CHECK(mid.center[1] == 0.0);
    CHECK(mid.radius == 0.0);

    const TubeEval off = forward(net, 6.5);
    CHECK(off.center[0] == doctest::Approx(-0.0046151816337989607).epsilon(1e-14));
    CHECK(off.center[1] == doctest::Approx(-0.0083292818349800339).epsilon(1e-14));
    CHECK(off.radius == doctest::Approx(0.067191759913661636).epsilon(1e-14));
}

TEST_CASE("time_derivative equals central finite differences") {
    std::mt19937_64 rng(19);
    for (int trial = 0; trial < 100; ++trial) {
        const TubeNet net = randomized_net(rng(), 1.0 + (trial % 3));
        const double t_c = net.horizon();
        const double t = 0.05 * t_c + 0.9 * t_c * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
        const double h = 1e-5 * t_c;

        const TubeRates rates = time_derivative(net, t);
        const TubeEval plus = forward(net, t + h);
        const TubeEval minus = forward(net, t - h);
        const Vector fd_center = (plus.center - minus.center) / (2.0 * h);
        const double fd_radius = (plus.radius - minus.radius) / (2.0 * h);

        const double center_scale = std::max(rates.center_rate.norm(), 1e-3);
        CHECK((rates.center_rate - fd_center).norm() / center_scale <= 1e-6);
        const double radius_scale = std::max(std::abs(rates.radius_rate), 1e-3);
        CHECK(std::abs(rates.radius_rate - fd_radius) / radius_scale <= 1e-6);
    }
}

TEST_CASE("single-neuron derivative matches the hand chain rule") {
    TubeNet net(1, 4.0, {1});
    Vector params = net.parameters();
    params.setZero();
    net.set_parameters(params);
    const double w = 0.8, b = -0.3, v = 1.7;
    net.weight(0)(0, 0) = w;
    net.bias(0)(0) = b;
    net.weight(1)(0, 0) = v;   // center row
    net.weight(1)(1, 0) = -v;  // radius row

    const double t = 1.3;
    const double t_norm = 2.0 * t / 4.0 - 1.0;
    const double expected = v * w * (1.0 - std::pow(std::tanh(w * t_norm + b), 2)) * (2.0 / 4.0);
    const TubeRates rates = time_derivative(net, t);
    CHECK(rates.center_rate[0] == doctest::Approx(expected).epsilon(1e-12));
    CHECK(rates.radius_rate == doctest::Approx(-expected).epsilon(1e-12));
}

TEST_CASE("forward secant slopes never exceed the norm-product bound") {
    std::mt19937_64 rng(23);
    const TubeNet net = randomized_net(99, 2.0);
    double product = net.time_scale();
    for (int l = 0; l < net.layer_count(); ++l) {
        product *= Eigen::JacobiSVD<Eigen::MatrixXd>(net.weight(l)).singularValues()[0];
    }
    for (int trial = 0; trial < 10000; ++trial) {
        const double t1 = 10.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
        const double t2 = 10.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
        if (t1 == t2) continue;
        const TubeEval a = forward(net, t1);
        const TubeEval b = forward(net, t2);
        Vector diff(3);
        diff << a.center - b.center, a.radius - b.radius;
        CHECK(diff.norm() <= product * std::abs(t1 - t2) * (1.0 + 1e-12));
    }
}

TEST_CASE("loss is zero with zero gradient on a strictly feasible constant tube") {
    const TrasScenario scen = scenario_2d();
    TubeNet net(2, scen.prescribed_time, {8});
    Vector params = net.parameters();
    params.setZero();
    net.set_parameters(params);
    net.bias(1) << 2.0, 2.5, 0.4;  // constant ball well inside, away from the obstacle

    LossConfig cfg;
    cfg.eta_hat = -0.05;
    cfg.min_radius = scen.min_radius;
    cfg.center_rate_budget = 1.0;
    cfg.radius_rate_budget = 1.0;
    cfg.boundary_weights = {0.0, 0.0, 0.0, 0.0};  // isolate the physics terms

    const std::vector<double> times{1.0, 3.0, 5.0, 7.0, 9.0};
    const auto [breakdown, grad] = loss_gradient(net, times, scen, cfg);
    for (double term : breakdown.physics) {
        CHECK(term == 0.0);
    }
    CHECK(breakdown.physics_total() == 0.0);
    CHECK(grad.norm() == 0.0);
}

TEST_CASE("all-zero loss weights give zero total loss and zero gradient") {
    const TrasScenario scen = scenario_2d();
    const TubeNet net = randomized_net(5);
    LossConfig cfg;
    cfg.eta_hat = -0.05;
    cfg.min_radius = scen.min_radius;
    cfg.center_rate_budget = 1e-6;  // hinges active, but weights kill them
    cfg.radius_rate_budget = 1e-6;
    cfg.physics_weights = {0.0, 0.0, 0.0, 0.0, 0.0};
    cfg.boundary_weights = {0.0, 0.0, 0.0, 0.0};

    const std::vector<double> times{1.0, 5.0, 9.0};
    const auto [breakdown, grad] = loss_gradient(net, times, scen, cfg);
    CHECK(breakdown.total() == 0.0);
    CHECK(grad.norm() == 0.0);
}

TEST_CASE("sub-losses are nonnegative for random parameters") {
    const TrasScenario scen = scenario_2d();
    std::mt19937_64 rng(31);
    const std::vector<double> times{0.5, 2.5, 5.0, 7.5, 9.5};
    for (int trial = 0; trial < 50; ++trial) {
        const TubeNet net = randomized_net(rng(), 1.0 + (trial % 4));
        LossConfig cfg;
        cfg.eta_hat = -0.1;
        cfg.min_radius = scen.min_radius;
        cfg.center_rate_budget = 0.5;
        cfg.radius_rate_budget = 0.2;
        const LossBreakdown breakdown = evaluate_loss(net, times, scen, cfg);
        for (double term : breakdown.physics) CHECK(term >= 0.0);
        for (double term : breakdown.boundary) CHECK(term >= 0.0);
        CHECK(breakdown.total() >= 0.0);
    }
}

TEST_CASE("hand-evaluated radius hinge on a single collocation point") {
    TrasScenario scen;
    scen.dimension = 1;
    scen.space = {Vector::Constant(1, 0.0), 10.0};
    scen.start = {Vector::Constant(1, 0.0), 0.5};
    scen.target = {Vector::Constant(1, 0.0), 0.5};
    scen.prescribed_time = 1.0;
    scen.min_radius = 0.3;

    TubeNet net(1, 1.0, {4});
    Vector params = net.parameters();
    params.setZero();
    net.set_parameters(params);
    net.bias(1) << 0.0, 0.1;  // c = 0, r = 0.1

    LossConfig cfg;
    cfg.eta_hat = -0.05;
    cfg.min_radius = 0.3;
    cfg.center_rate_budget = 1.0;
    cfg.radius_rate_budget = 1.0;
    cfg.physics_weights = {0.0, 1.0, 0.0, 0.0, 0.0};
    cfg.boundary_weights = {0.0, 0.0, 0.0, 0.0};

    const std::vector<double> times{0.5};
    const LossBreakdown breakdown = evaluate_loss(net, times, scen, cfg);
    CHECK(breakdown.physics[1] == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(breakdown.total() == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("loss gradient matches central finite differences") {
    const TrasScenario scen = scenario_2d();
    std::mt19937_64 rng(47);
    const std::vector<double> times{0.5, 2.0, 4.0, 6.0, 8.0, 9.5};

    for (int trial = 0; trial < 5; ++trial) {
        // alternate between rate-hinge-active and boundary-dominated regimes
        const double scale = trial % 2 == 0 ? 4.0 : 1.0;
        const TubeNet base = randomized_net(rng(), scale);
        LossConfig cfg;
        cfg.eta_hat = -0.05;
        cfg.min_radius = scen.min_radius;
        cfg.center_rate_budget = trial % 2 == 0 ? 0.05 : 2.0;
        cfg.radius_rate_budget = trial % 2 == 0 ? 0.02 : 1.0;

        const auto [breakdown, grad] = loss_gradient(base, times, scen, cfg);
        if (trial % 2 == 0) {
            CHECK(breakdown.physics[3] + breakdown.physics[4] > 0.0);  // second-order paths live
        }

        const double h = 1e-6 * base.parameters().cwiseAbs().maxCoeff();
        REQUIRE(h > 0.0);
        for (int probe = 0; probe < 20; ++probe) {
            const Eigen::Index i =
                static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(base.parameter_count()));
            TubeNet net = base;
            Vector params = base.parameters();
            params[i] += h;
            net.set_parameters(params);
            const double up = evaluate_loss(net, times, scen, cfg).total();
            params[i] -= 2.0 * h;
            net.set_parameters(params);
            const double down = evaluate_loss(net, times, scen, cfg).total();
            const double fd = (up - down) / (2.0 * h);
            const double scale_ref = std::max({std::abs(grad[i]), std::abs(fd), 1e-4});
            CHECK(std::abs(grad[i] - fd) / scale_ref <= 1e-4);
        }
    }
}

TEST_CASE("non-finite intermediates are reported with the offending term") {
    const TrasScenario scen = scenario_2d();
    TubeNet net(2, scen.prescribed_time, {4});
    Vector params = net.parameters();
    params.setZero();
    net.set_parameters(params);
    // the hinges stay finite for a hugely negative radius, but its squared
    // endpoint gap overflows
    net.bias(1) << 1.0, 1.0, -1e200;

    LossConfig cfg;
    cfg.eta_hat = -0.05;
    cfg.min_radius = scen.min_radius;
    cfg.center_rate_budget = 1.0;
    cfg.radius_rate_budget = 1.0;
    const std::vector<double> times{1.0};
    CHECK_THROWS_AS(evaluate_loss(net, times, scen, cfg), NumericalError);
    try {
        evaluate_loss(net, times, scen, cfg);
    } catch (const NumericalError& err) {
        CHECK(std::string(err.what()).find("boundary") != std::string::npos);
    }
}

TEST_CASE("serialization round-trips bit-for-bit and rejects corruption") {
    const TubeNet net = init_network(2, 10.0, {64, 64, 64}, 7);
    const auto bytes = serialize(net);
    const TubeNet copy = deserialize(bytes);
    CHECK(copy.parameters() == net.parameters());
    CHECK(copy.widths() == net.widths());
    CHECK(copy.horizon() == net.horizon());
    CHECK(copy.dimension() == net.dimension());

    auto truncated = bytes;
    truncated.resize(truncated.size() - 11);
    CHECK_THROWS_WITH_AS(deserialize(truncated), "model file truncated", FormatError);

    auto trailing = bytes;
    trailing.push_back(0);
    CHECK_THROWS_WITH_AS(deserialize(trailing), "model file: trailing bytes", FormatError);

    auto bad_version = bytes;
    bad_version[4] = 99;
    CHECK_THROWS_WITH_AS(deserialize(bad_version), "model file: unsupported version 99",
                         FormatError);

    auto bad_magic = bytes;
    bad_magic[0] = 'X';
    CHECK_THROWS_WITH_AS(deserialize(bad_magic), "model file: bad magic", FormatError);
}
