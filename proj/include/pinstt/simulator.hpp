#pragma once

#include "pinstt/controller.hpp"
#include "pinstt/scenario.hpp"
#include "pinstt/tube_net.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace pinstt {

/// Block-triangular plant: block i is driven by block i+1 (the last one by
/// the control input) plus a bounded disturbance. The derivative map receives
/// the stacked states of blocks 1..i.
struct PlantModel {
    std::string name;
    int depth = 0;      // N
    int block_dim = 0;  // n
    Vector initial_state;
    std::function<Vector(int block, const Vector& upstream_states, const Vector& next_input,
                         const Vector& disturbance, double t)>
        block_derivative;
};

/// Planar robot with velocity inputs rotated through a fixed heading. The
/// heading is held constant (its rate input is not used during the task), so
/// the position loop keeps a positive-definite symmetric input gain; headings
/// at or beyond pi/2 are rejected for that reason.
PlantModel omnibot_model(const Eigen::Vector3d& initial_pose);

/// Double-integrator vehicle: position integrates velocity, velocity
/// integrates the control input, each with its own disturbance channel.
PlantModel quadrotor_model(const Vector& initial_position, const Vector& initial_velocity);

struct SimConfig {
    double step = 0.0;                      // h, seconds
    std::vector<double> disturbance_bound;  // per block, or one value for all
    std::uint64_t seed = 0;
    double t_end = 0.0;
};

/// Inputs of the funnel auto-initialization; per-stage half-widths are sized
/// from the actual tracking errors at t = 0.
struct FunnelConfig {
    double final_halfwidth = 0.1;  // q, state units
    double decay_rate = 0.0;       // mu; 0 selects 2 / t_end
    double initial_scale = 1.25;   // p = scale * max(|error(0)|, 2 q)
};

FunnelParams auto_funnels(const PlantModel& model, const TubeNet& net, const GainSet& gains,
                          const FunnelConfig& cfg, const Vector& initial_state);

struct TrajectoryRow {
    double t = 0.0;
    Vector state;        // stacked, length depth * block_dim
    Vector input;        // u, length block_dim
    Vector disturbance;  // stacked, length depth * block_dim
    double tube_error = 0.0;
    std::vector<Vector> stage_errors;
    bool clamped = false;
};

struct Trajectory {
    int depth = 0;
    int block_dim = 0;
    std::vector<TrajectoryRow> rows;

    Vector output(std::size_t row) const { return rows[row].state.head(block_dim); }
    void write_csv(const std::filesystem::path& path) const;
};

struct MetricsReport {
    double max_tube_error = 0.0;
    double reach_error = 0.0;
    bool reach_success = false;
    double min_obstacle_clearance = 0.0;  // +inf when there are no obstacles
    double control_effort = 0.0;          // trapezoid integral of ||u||
    long clamp_count = 0;
    long steps = 0;
    double step_size = 0.0;
};

std::string metrics_report_json(const MetricsReport& metrics);

/// Classic fixed-step fourth-order Runge-Kutta update of dx/dt = f(t, x).
template <class F>
Vector rk4_step(const F& f, double t, const Vector& x, double h) {
    const Vector k1 = f(t, x);
    const Vector k2 = f(t + 0.5 * h, Vector(x + 0.5 * h * k1));
    const Vector k3 = f(t + 0.5 * h, Vector(x + 0.5 * h * k2));
    const Vector k4 = f(t + h, Vector(x + h * k3));
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Closed-loop rollout: control and disturbance are held over each RK4 step,
/// disturbances drawn i.i.d. uniform within their bounds from the seed. The
/// initial output must lie strictly inside the tube at t = 0.
std::pair<Trajectory, MetricsReport> simulate(const PlantModel& model, const TubeNet& net,
                                              const TrasScenario& scen,
                                              const FunnelConfig& funnel_cfg,
                                              const GainSet& gains, const SimConfig& sim);

}  // namespace pinstt
