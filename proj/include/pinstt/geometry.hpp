#pragma once

#include <Eigen/Dense>

#include <span>
#include <variant>
#include <vector>

namespace pinstt {

using Vector = Eigen::VectorXd;

/// Closed Euclidean ball, the set primitive for workspace, start, target and
/// tube slices.
struct Ball {
    Vector center;
    double radius = 0.0;
};

struct BallShape {
    Vector center;   // position at t = 0
    double radius = 0.0;
};

struct BoxShape {
    Vector lo;       // corners at t = 0, lo < hi componentwise
    Vector hi;
};

struct StaticMotion {};

/// Rigid oscillation along a single coordinate axis:
/// offset(t) = amplitude * sin(omega * t + phase) on `axis`, zero elsewhere.
struct SinusoidalMotion {
    int axis = 0;
    double amplitude = 0.0;
    double omega = 0.0;
    double phase = 0.0;
};

struct Obstacle {
    std::variant<BallShape, BoxShape> shape;
    std::variant<StaticMotion, SinusoidalMotion> motion;
};

int obstacle_dimension(const Obstacle& obs);

/// Motion offset applied to the whole shape at time t (n-vector).
Vector obstacle_offset(const Obstacle& obs, double t);

/// Moved reference geometry at time t: ball shapes yield the moved center
/// (n values), boxes the stacked moved corners [lo; hi] (2n values).
Vector obstacle_center_at(const Obstacle& obs, double t);

/// Exact Euclidean distance from x to the obstacle at time t; zero iff x lies
/// inside or on the boundary.
double point_to_set_distance(const Vector& x, const Obstacle& obs, double t);

/// Gradient of point_to_set_distance w.r.t. x. Zero subgradient inside the
/// set and at the center singularity.
Vector distance_gradient(const Vector& x, const Obstacle& obs, double t);

bool obstacle_contains(const Vector& x, const Obstacle& obs, double t);

/// Distance to the union of obstacles; +inf for an empty list.
double min_obstacle_distance(const Vector& x, std::span<const Obstacle> obstacles, double t);

}  // namespace pinstt
