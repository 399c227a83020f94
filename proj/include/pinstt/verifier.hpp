#pragma once

#include "pinstt/scenario.hpp"
#include "pinstt/trainer.hpp"
#include "pinstt/tube_net.hpp"

#include <optional>
#include <string>
#include <utility>

namespace pinstt {

/// Acceptance tolerance on the endpoint gaps (the equality conditions are
/// necessarily soft under neural training).
inline constexpr double kBoundaryGapTolerance = 1e-2;

/// Worst tube-condition residuals over a dense time scan, with the times at
/// which they occur. Clean means no condition is strictly violated anywhere
/// on the scan.
struct DenseAudit {
    double resolution = 0.0;
    double worst_space = 0.0;
    double worst_space_time = 0.0;
    double worst_radius = 0.0;
    double worst_radius_time = 0.0;
    double worst_obstacle = 0.0;   // -inf when there are no obstacles
    double worst_obstacle_time = 0.0;
    std::optional<double> first_violation_time;

    bool clean() const { return !first_violation_time.has_value(); }
};

DenseAudit dense_audit(const TubeNet& net, const TrasScenario& scen, double resolution);

/// Sound global Lipschitz bounds (center, radius) w.r.t. physical time:
/// (2 / t_c) times the product of layer spectral norms, each norm
/// upper-bounded by 50 power iterations times a 1.01 safety factor, with the
/// output layer split into its center rows and radius row.
std::pair<double, double> global_lipschitz_bound(const TubeNet& net);

/// Machine-checked verdict for a tube network against a scenario.
struct Certificate {
    bool pass = false;
    double eta_hat = 0.0;
    double epsilon = 0.0;
    int collocation_points = 0;
    std::string time_scaling;

    double worst_space = 0.0;
    double worst_space_time = 0.0;
    double worst_radius = 0.0;
    double worst_radius_time = 0.0;
    double worst_obstacle = 0.0;   // -inf when there are no obstacles
    double worst_obstacle_time = 0.0;

    BoundaryGaps boundary_gaps;
    double boundary_tolerance = kBoundaryGapTolerance;

    double center_rate_budget = 0.0;
    double radius_rate_budget = 0.0;
    double center_network_bound = 0.0;
    double radius_network_bound = 0.0;
    double max_center_rate_sampled = 0.0;
    double max_radius_rate_sampled = 0.0;
    bool center_rate_hinge_zero = false;
    bool radius_rate_hinge_zero = false;
    double center_effective = 0.0;
    double radius_effective = 0.0;

    double margin_sum = 0.0;  // eta_hat + (L_c_eff + L_r_eff) * epsilon; the gate
    double margin_max = 0.0;  // eta_hat + max(L_c_eff, L_r_eff) * epsilon; informational

    DenseAudit audit;
};

/// Evaluates the sampled tube conditions with margin eta_hat, bounds the
/// network rates, and audits the continuous-time claim at resolution
/// epsilon / 10.
Certificate certify(const TubeNet& net, const TrasScenario& scen, const TrainConfig& cfg);

/// Flat JSON text with stable key order, suitable for diffing.
std::string certificate_report(const Certificate& cert);

}  // namespace pinstt
