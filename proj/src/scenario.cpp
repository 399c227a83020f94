#include "pinstt/scenario.hpp"

#include "pinstt/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace pinstt {
namespace {

void check_ball(const Ball& ball, int dim, const std::string& name) {
    if (ball.center.size() != dim) {
        throw InvariantError(name + ".center: expected " + std::to_string(dim) +
                             " components, got " + std::to_string(ball.center.size()));
    }
    if (!(ball.radius > 0.0)) {
        throw InvariantError(name + ".radius: must be > 0");
    }
    if (!ball.center.allFinite() || !std::isfinite(ball.radius)) {
        throw InvariantError(name + ": non-finite value");
    }
}

// ||c_A - c_Y|| + r_A <= r_Y
bool ball_inside(const Ball& inner, const Ball& outer) {
    return (inner.center - outer.center).norm() + inner.radius <= outer.radius;
}

void check_obstacle(const Obstacle& obs, int dim, const std::string& name) {
    if (const auto* ball = std::get_if<BallShape>(&obs.shape)) {
        if (ball->center.size() != dim) {
            throw InvariantError(name + ".center: dimension mismatch");
        }
        if (!(ball->radius > 0.0)) {
            throw InvariantError(name + ".radius: must be > 0");
        }
    } else {
        const auto& box = std::get<BoxShape>(obs.shape);
        if (box.lo.size() != dim || box.hi.size() != dim) {
            throw InvariantError(name + ": corner dimension mismatch");
        }
        if (!((box.lo.array() < box.hi.array()).all())) {
            throw InvariantError(name + ": min corner must be < max corner componentwise");
        }
    }
    if (const auto* motion = std::get_if<SinusoidalMotion>(&obs.motion)) {
        if (motion->axis < 0 || motion->axis >= dim) {
            throw InvariantError(name + ".motion.axis: out of range");
        }
        if (motion->amplitude < 0.0) {
            throw InvariantError(name + ".motion.amplitude: must be >= 0");
        }
    }
}

}  // namespace

void validate(const TrasScenario& scen) {
    if (scen.dimension < 1) {
        throw InvariantError("scenario.dimension: must be a positive integer");
    }
    check_ball(scen.space, scen.dimension, "scenario.space");
    check_ball(scen.start, scen.dimension, "scenario.start");
    check_ball(scen.target, scen.dimension, "scenario.target");
    if (!(scen.prescribed_time > 0.0)) {
        throw InvariantError("scenario.prescribed_time: must be > 0");
    }
    if (!(scen.min_radius > 0.0)) {
        throw InvariantError("scenario.min_radius: must be > 0");
    }
    if (!ball_inside(scen.start, scen.space)) {
        throw InvariantError("scenario.start: not contained in scenario.space");
    }
    if (!ball_inside(scen.target, scen.space)) {
        throw InvariantError("scenario.target: not contained in scenario.space");
    }
    if (scen.min_radius > std::min(scen.start.radius, scen.target.radius)) {
        throw InvariantError(
            "scenario.min_radius: must not exceed min(start.radius, target.radius)");
    }
    for (std::size_t j = 0; j < scen.obstacles.size(); ++j) {
        const std::string name = "scenario.obstacles[" + std::to_string(j) + "]";
        check_obstacle(scen.obstacles[j], scen.dimension, name);
        if (point_to_set_distance(scen.start.center, scen.obstacles[j], 0.0) <=
            scen.start.radius) {
            throw InvariantError(name + ": intersects the start set at t = 0");
        }
        if (point_to_set_distance(scen.target.center, scen.obstacles[j],
                                  scen.prescribed_time) <= scen.target.radius) {
            throw InvariantError(name + ": intersects the target set at the prescribed time");
        }
    }
}

double RasResiduals::worst_obstacle() const {
    double worst = -std::numeric_limits<double>::infinity();
    for (double value : obstacle) {
        worst = std::max(worst, value);
    }
    return worst;
}

int RasResiduals::nearest_obstacle() const {
    int index = -1;
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < obstacle.size(); ++j) {
        if (obstacle[j] > worst) {
            worst = obstacle[j];
            index = static_cast<int>(j);
        }
    }
    return index;
}

RasResiduals ras_residuals(const TubeSlice& slice, const TrasScenario& scen, double t) {
    RasResiduals res;
    res.space = (slice.center - scen.space.center).norm() + slice.radius - scen.space.radius;
    res.radius = -slice.radius + scen.min_radius;
    res.obstacle.reserve(scen.obstacles.size());
    for (const Obstacle& obs : scen.obstacles) {
        res.obstacle.push_back(-point_to_set_distance(slice.center, obs, t) + slice.radius);
    }
    return res;
}

double BoundaryGaps::worst() const {
    return std::max(std::max(start_center, start_radius),
                    std::max(target_center, target_radius));
}

BoundaryGaps boundary_residuals(const Vector& center_at_0, double radius_at_0,
                                const Vector& center_at_tc, double radius_at_tc,
                                const TrasScenario& scen) {
    BoundaryGaps gaps;
    gaps.start_center = (center_at_0 - scen.start.center).norm();
    gaps.start_radius = std::abs(radius_at_0 - scen.start.radius);
    gaps.target_center = (center_at_tc - scen.target.center).norm();
    gaps.target_radius = std::abs(radius_at_tc - scen.target.radius);
    return gaps;
}

}  // namespace pinstt
