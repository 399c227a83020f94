#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pinstt/errors.hpp"
#include "pinstt/verifier.hpp"

#include <cmath>
#include <random>

using namespace pinstt;

namespace {

Vector vec2(double a, double b) {
    Vector v(2);
    v << a, b;
    return v;
}

TubeNet zeroed_net(int dim, double horizon, const std::vector<int>& hidden) {
    TubeNet net(dim, horizon, hidden);
    Vector params = net.parameters();
    params.setZero();
    net.set_parameters(params);
    return net;
}

// Constant center with a sharp radius dip of depth `depth` around t_c / 2,
// realized by a difference of two steep tanh steps. The dip is invisible at
// samples spaced well away from the middle but violates the radius floor
// between them.
TubeNet dip_net(const Vector& center, double base_radius, double depth, double steepness,
                double horizon) {
    TubeNet net(static_cast<int>(center.size()), horizon, {2});
    Vector params = net.parameters();
    params.setZero();
    net.set_parameters(params);
    net.weight(0)(0, 0) = steepness;
    net.weight(0)(1, 0) = steepness;
    net.bias(0)(0) = steepness * 0.05;   // step at t_norm = -0.05
    net.bias(0)(1) = -steepness * 0.05;  // step at t_norm = +0.05
    const int n = net.dimension();
    net.weight(1)(n, 0) = -depth / 2.0;
    net.weight(1)(n, 1) = depth / 2.0;
    for (int i = 0; i < n; ++i) {
        net.bias(1)(i) = center[i];
    }
    net.bias(1)(n) = base_radius;
    return net;
}

TrasScenario constant_scenario(double radius) {
    TrasScenario scen;
    scen.dimension = 2;
    scen.space = {vec2(0.0, 0.0), 5.0};
    scen.start = {vec2(1.0, 1.0), radius};
    scen.target = {vec2(1.0, 1.0), radius};
    scen.prescribed_time = 10.0;
    scen.min_radius = 0.2;
    return scen;
}

}  // namespace

TEST_CASE("global_lipschitz_bound is zero for a zero network") {
    const TubeNet net = zeroed_net(2, 10.0, {8, 8});
    const auto [center_bound, radius_bound] = global_lipschitz_bound(net);
    CHECK(center_bound == 0.0);
    CHECK(radius_bound == 0.0);
}

TEST_CASE("global_lipschitz_bound dominates a single-neuron derivative") {
    TubeNet net = zeroed_net(1, 4.0, {1});
    const double w = 1.3, v = 0.7;
    net.weight(0)(0, 0) = w;
    net.weight(1)(0, 0) = v;
    net.weight(1)(1, 0) = 0.25;

    const auto [center_bound, radius_bound] = global_lipschitz_bound(net);
    CHECK(center_bound >= std::abs(v * w) * (2.0 / 4.0));
    double max_rate = 0.0;
    for (int k = 0; k <= 400; ++k) {
        const double t = 4.0 * k / 400.0;
        max_rate = std::max(max_rate, std::abs(time_derivative(net, t).center_rate[0]));
    }
    CHECK(center_bound >= max_rate);
    CHECK(radius_bound >= std::abs(0.25 * w) * (2.0 / 4.0));
}

TEST_CASE("random secant slopes never exceed the network bounds") {
    std::mt19937_64 rng(77);
    const TubeNet net = init_network(2, 10.0, {12, 12}, 4);
    TubeNet scaled = net;
    scaled.set_parameters(net.parameters() * 2.5);
    const auto [center_bound, radius_bound] = global_lipschitz_bound(scaled);

    for (int trial = 0; trial < 10000; ++trial) {
        const double t1 = 10.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
        const double t2 = 10.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
        if (t1 == t2) continue;
        const TubeEval a = forward(scaled, t1);
        const TubeEval b = forward(scaled, t2);
        const double dt = std::abs(t1 - t2);
        CHECK((a.center - b.center).norm() <= center_bound * dt * (1.0 + 1e-12));
        CHECK(std::abs(a.radius - b.radius) <= radius_bound * dt * (1.0 + 1e-12));
    }
}

TEST_CASE("certify passes a constant valid tube and records the margin") {
    const TrasScenario scen = constant_scenario(0.5);
    TubeNet net = zeroed_net(2, scen.prescribed_time, {8});
    net.bias(1) << 1.0, 1.0, 0.5;

    TrainConfig cfg = default_train_config(scen, 1);
    cfg.epsilon = 0.5;
    cfg.center_rate_budget = 0.1;
    cfg.radius_rate_budget = 0.1;

    const Certificate cert = certify(net, scen, cfg);
    CHECK(cert.pass);
    CHECK(cert.margin_sum == doctest::Approx(cert.eta_hat));  // zero effective bounds
    CHECK(cert.center_network_bound == 0.0);
    CHECK(cert.boundary_gaps.worst() == doctest::Approx(0.0));
    CHECK(cert.audit.clean());

    // theorem conclusion holds at random times for a passing certificate
    std::mt19937_64 rng(5);
    for (int k = 0; k < 1000; ++k) {
        const double t =
            scen.prescribed_time * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
        const TubeEval eval = forward(net, t);
        TubeSlice slice{eval.center, eval.radius, vec2(0, 0), 0.0};
        const RasResiduals res = ras_residuals(slice, scen, t);
        CHECK(res.space <= 0.0);
        CHECK(res.radius <= 0.0);
    }

    const std::string report = certificate_report(cert);
    CHECK(report.find("\"pass\": true") != std::string::npos);
    CHECK(report.find("\"margin\"") != std::string::npos);
}

TEST_CASE("margin arithmetic combines the margin and effective rates") {
    // effective bounds 2.5 + 1.5 against budgets 3 + 2 at epsilon 0.01
    TrasScenario scen;
    scen.dimension = 1;
    scen.space = {Vector::Constant(1, 0.0), 10.0};
    scen.start = {Vector::Constant(1, 0.0), 0.5};
    scen.target = {Vector::Constant(1, 0.0), 0.5};
    scen.prescribed_time = 2.0;
    scen.min_radius = 0.1;

    TubeNet net = zeroed_net(1, scen.prescribed_time, {1});
    net.weight(0)(0, 0) = 1.0;
    net.weight(1)(0, 0) = 2.5 / (1.01 * 1.01);
    net.weight(1)(1, 0) = 1.5 / (1.01 * 1.01);
    net.bias(1) << 0.0, 0.5;

    TrainConfig cfg = default_train_config(scen, 1);
    cfg.epsilon = 0.01;
    cfg.center_rate_budget = 3.0;
    cfg.radius_rate_budget = 2.0;

    const Certificate cert = certify(net, scen, cfg);
    CHECK(cert.eta_hat == doctest::Approx(-0.05));
    CHECK(cert.center_rate_hinge_zero);
    CHECK(cert.radius_rate_hinge_zero);
    CHECK(cert.center_effective == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(cert.radius_effective == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(cert.margin_sum == doctest::Approx(-0.01).epsilon(1e-10));
    CHECK(cert.margin_max == doctest::Approx(-0.05 + 2.5 * 0.01).epsilon(1e-10));
}

TEST_CASE("dense_audit matches collocation values for a constant tube") {
    const TrasScenario scen = constant_scenario(0.5);
    TubeNet net = zeroed_net(2, scen.prescribed_time, {4});
    net.bias(1) << 1.0, 1.0, 0.5;

    const DenseAudit audit = dense_audit(net, scen, 0.05);
    const TubeEval eval = forward(net, 3.3);
    TubeSlice slice{eval.center, eval.radius, vec2(0, 0), 0.0};
    const RasResiduals res = ras_residuals(slice, scen, 3.3);
    CHECK(audit.worst_space == doctest::Approx(res.space));
    CHECK(audit.worst_radius == doctest::Approx(res.radius));
    CHECK(audit.clean());
}

TEST_CASE("dense_audit localizes a planted radius dip") {
    const TrasScenario scen = constant_scenario(0.5);
    const TubeNet net = dip_net(vec2(1.0, 1.0), 0.5, 0.45, 100.0, scen.prescribed_time);

    // fine-scan oracle for the first crossing of the radius floor
    double truth = -1.0;
    for (double t = 0.0; t <= scen.prescribed_time; t += 1e-5) {
        if (-forward(net, t).radius + scen.min_radius > 0.0) {
            truth = t;
            break;
        }
    }
    REQUIRE(truth > 0.0);

    const double resolution = 0.01;
    const DenseAudit audit = dense_audit(net, scen, resolution);
    CHECK_FALSE(audit.clean());
    REQUIRE(audit.first_violation_time.has_value());
    CHECK(std::abs(*audit.first_violation_time - truth) <= resolution);
}

TEST_CASE("dense_audit worst residuals are non-decreasing under refinement") {
    const TrasScenario scen = constant_scenario(0.5);
    const TubeNet net = dip_net(vec2(1.0, 1.0), 0.5, 0.3, 40.0, scen.prescribed_time);
    const DenseAudit coarse = dense_audit(net, scen, 0.08);
    const DenseAudit fine = dense_audit(net, scen, 0.04);
    CHECK(fine.worst_space >= coarse.worst_space);
    CHECK(fine.worst_radius >= coarse.worst_radius);
}

TEST_CASE("a tube valid at samples but violated between them is rejected") {
    const TrasScenario scen = constant_scenario(0.5);
    const TubeNet net = dip_net(vec2(1.0, 1.0), 0.5, 0.45, 100.0, scen.prescribed_time);

    TrainConfig cfg = default_train_config(scen, 1);
    cfg.epsilon = 0.5;  // samples at 0.5, 1.5, ..., 9.5 straddle the dip at 5
    cfg.center_rate_budget = 0.1;
    cfg.radius_rate_budget = 0.1;

    const Certificate cert = certify(net, scen, cfg);
    // the sampled conditions hold with margin...
    CHECK(cert.worst_radius <= cert.eta_hat);
    CHECK(cert.worst_space <= cert.eta_hat);
    CHECK(cert.boundary_gaps.worst() <= cert.boundary_tolerance);
    // ...yet the certificate must refuse the tube
    CHECK_FALSE(cert.pass);
    CHECK((cert.margin_sum > 0.0 || !cert.audit.clean()));
    CHECK_FALSE(cert.audit.clean());
}

TEST_CASE("a sampled rate-budget breach forces the sound network bound") {
    const TrasScenario scen = constant_scenario(0.5);
    // steeper dip shifted so that a collocation point sees a large radius rate
    TubeNet net = dip_net(vec2(1.0, 1.0), 0.5, 0.45, 100.0, scen.prescribed_time);
    net.bias(0)(0) = 100.0 * 0.0;   // step edges at t_norm 0 and -0.1
    net.bias(0)(1) = 100.0 * 0.1;

    TrainConfig cfg = default_train_config(scen, 1);
    cfg.epsilon = 0.5;
    cfg.center_rate_budget = 0.1;
    cfg.radius_rate_budget = 0.1;

    const Certificate cert = certify(net, scen, cfg);
    CHECK_FALSE(cert.radius_rate_hinge_zero);
    CHECK(cert.radius_effective == cert.radius_network_bound);
    CHECK(cert.margin_sum > 0.0);
    CHECK_FALSE(cert.pass);
}

TEST_CASE("certify rejects mismatched models") {
    const TrasScenario scen = constant_scenario(0.5);
    const TubeNet wrong_dim = zeroed_net(3, scen.prescribed_time, {4});
    TrainConfig cfg = default_train_config(scen, 1);
    CHECK_THROWS_AS(certify(wrong_dim, scen, cfg), InvariantError);

    const TubeNet wrong_horizon = zeroed_net(2, 7.0, {4});
    CHECK_THROWS_AS(certify(wrong_horizon, scen, cfg), InvariantError);
}
