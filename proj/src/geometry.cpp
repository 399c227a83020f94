#include "pinstt/geometry.hpp"

#include <cmath>
#include <limits>

namespace pinstt {

int obstacle_dimension(const Obstacle& obs) {
    if (const auto* ball = std::get_if<BallShape>(&obs.shape)) {
        return static_cast<int>(ball->center.size());
    }
    return static_cast<int>(std::get<BoxShape>(obs.shape).lo.size());
}

Vector obstacle_offset(const Obstacle& obs, double t) {
    Vector offset = Vector::Zero(obstacle_dimension(obs));
    if (const auto* sin_motion = std::get_if<SinusoidalMotion>(&obs.motion)) {
        offset[sin_motion->axis] =
            sin_motion->amplitude * std::sin(sin_motion->omega * t + sin_motion->phase);
    }
    return offset;
}

Vector obstacle_center_at(const Obstacle& obs, double t) {
    const Vector offset = obstacle_offset(obs, t);
    if (const auto* ball = std::get_if<BallShape>(&obs.shape)) {
        return ball->center + offset;
    }
    const auto& box = std::get<BoxShape>(obs.shape);
    Vector corners(2 * box.lo.size());
    corners << box.lo + offset, box.hi + offset;
    return corners;
}

double point_to_set_distance(const Vector& x, const Obstacle& obs, double t) {
    const Vector offset = obstacle_offset(obs, t);
    if (const auto* ball = std::get_if<BallShape>(&obs.shape)) {
        return std::max(0.0, (x - ball->center - offset).norm() - ball->radius);
    }
    const auto& box = std::get<BoxShape>(obs.shape);
    const Vector clamped =
        x.cwiseMax(box.lo + offset).cwiseMin(box.hi + offset);
    return (x - clamped).norm();
}

Vector distance_gradient(const Vector& x, const Obstacle& obs, double t) {
    const Vector offset = obstacle_offset(obs, t);
    if (const auto* ball = std::get_if<BallShape>(&obs.shape)) {
        const Vector diff = x - ball->center - offset;
        const double dist = diff.norm();
        if (dist <= ball->radius || dist == 0.0) {
            return Vector::Zero(x.size());
        }
        return diff / dist;
    }
    const auto& box = std::get<BoxShape>(obs.shape);
    const Vector clamped = x.cwiseMax(box.lo + offset).cwiseMin(box.hi + offset);
    const Vector diff = x - clamped;
    const double dist = diff.norm();
    if (dist == 0.0) {
        return Vector::Zero(x.size());
    }
    return diff / dist;
}

bool obstacle_contains(const Vector& x, const Obstacle& obs, double t) {
    const Vector offset = obstacle_offset(obs, t);
    if (const auto* ball = std::get_if<BallShape>(&obs.shape)) {
        return (x - ball->center - offset).norm() <= ball->radius;
    }
    const auto& box = std::get<BoxShape>(obs.shape);
    return ((x.array() >= (box.lo + offset).array()) &&
            (x.array() <= (box.hi + offset).array()))
        .all();
}

double min_obstacle_distance(const Vector& x, std::span<const Obstacle> obstacles, double t) {
    double best = std::numeric_limits<double>::infinity();
    for (const Obstacle& obs : obstacles) {
        best = std::min(best, point_to_set_distance(x, obs, t));
    }
    return best;
}

}  // namespace pinstt
