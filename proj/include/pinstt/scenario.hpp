#pragma once

#include "pinstt/geometry.hpp"

#include <vector>

namespace pinstt {

/// A complete reach-avoid-stay problem instance on a ball-shaped output space:
/// start inside `start` at t = 0, end inside `target` at exactly
/// `prescribed_time`, and stay inside `space` away from every obstacle in
/// between.
struct TrasScenario {
    int dimension = 0;
    Ball space;
    Ball start;
    Ball target;
    double prescribed_time = 0.0;   // t_c, seconds
    double min_radius = 0.0;        // lower bound kept on the tube radius
    std::vector<Obstacle> obstacles;
};

/// Validates every scenario invariant; throws InvariantError naming the first
/// violated field.
void validate(const TrasScenario& scen);

/// One time slice of a tube: ball plus its rates of change.
struct TubeSlice {
    Vector center;
    double radius = 0.0;
    Vector center_rate;
    double radius_rate = 0.0;
};

/// Signed slack of the interior tube conditions at time t. Every entry <= eta
/// means the corresponding condition holds with margin -eta:
///   space:      ||c - c_Y|| + r - r_Y
///   radius:     -r + r_d
///   obstacle_j: -d(c, U_j(t)) + r
struct RasResiduals {
    double space = 0.0;
    double radius = 0.0;
    std::vector<double> obstacle;

    /// Largest obstacle residual, i.e. the residual against the union of
    /// obstacles; -inf when there is none.
    double worst_obstacle() const;
    /// Index of the obstacle realizing worst_obstacle(); -1 when none.
    int nearest_obstacle() const;
};

RasResiduals ras_residuals(const TubeSlice& slice, const TrasScenario& scen, double t);

/// Distances of the tube endpoints from the prescribed boundary balls.
struct BoundaryGaps {
    double start_center = 0.0;
    double start_radius = 0.0;
    double target_center = 0.0;
    double target_radius = 0.0;

    double worst() const;
};

BoundaryGaps boundary_residuals(const Vector& center_at_0, double radius_at_0,
                                const Vector& center_at_tc, double radius_at_tc,
                                const TrasScenario& scen);

}  // namespace pinstt
