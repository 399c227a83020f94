#pragma once

#include "pinstt/scenario.hpp"
#include "pinstt/tube_net.hpp"

#include <array>
#include <span>
#include <utility>

namespace pinstt {

/// Weights and margins of the training objective.
struct LossConfig {
    double eta_hat = 0.0;             // sampled-condition margin, <= 0
    double min_radius = 0.0;          // lower bound kept on the tube radius
    double center_rate_budget = 0.0;  // admissible ||d center/dt||
    double radius_rate_budget = 0.0;  // admissible |d radius/dt|
    std::array<double, 5> physics_weights{1.0, 1.0, 1.0, 1.0, 1.0};
    std::array<double, 4> boundary_weights{10.0, 10.0, 10.0, 10.0};
};

/// Raw (unweighted) sub-loss values plus the weights that combine them.
/// physics[0..4]: hinge sums over the batch for the space bound, the radius
/// floor, obstacle separation, the center rate budget and the radius rate
/// budget. boundary[0..3]: squared endpoint gaps (start center, start radius,
/// target center, target radius).
struct LossBreakdown {
    std::array<double, 5> physics{};
    std::array<double, 4> boundary{};
    std::array<double, 5> physics_weights{};
    std::array<double, 4> boundary_weights{};

    double physics_total() const;
    double boundary_total() const;
    double total() const;
};

/// Loss over the given collocation times; the four endpoint terms are always
/// included. Throws NumericalError naming the offending term if any value is
/// non-finite.
LossBreakdown evaluate_loss(const TubeNet& net, std::span<const double> times,
                            const TrasScenario& scen, const LossConfig& cfg);

/// Loss plus its exact gradient w.r.t. the flat parameter vector, including
/// the second-order paths through the rate penalties. Contributions are
/// accumulated sequentially in batch order, so the result is bit-stable.
std::pair<LossBreakdown, Vector> loss_gradient(const TubeNet& net,
                                               std::span<const double> times,
                                               const TrasScenario& scen,
                                               const LossConfig& cfg);

}  // namespace pinstt
