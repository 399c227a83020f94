#include "pinstt/simulator.hpp"

#include "pinstt/errors.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>

namespace pinstt {

PlantModel omnibot_model(const Eigen::Vector3d& initial_pose) {
    const double heading = initial_pose[2];
    if (std::abs(heading) >= M_PI / 2.0) {
        throw InvariantError(
            "omnibot heading must satisfy |heading| < pi/2 for a positive-definite input gain");
    }
    Eigen::Matrix2d rotation;
    rotation << std::cos(heading), -std::sin(heading), std::sin(heading), std::cos(heading);

    PlantModel model;
    model.name = "omnibot";
    model.depth = 1;
    model.block_dim = 2;
    model.initial_state = initial_pose.head(2);
    model.block_derivative = [rotation](int /*block*/, const Vector& /*upstream*/,
                                        const Vector& input, const Vector& disturbance,
                                        double /*t*/) -> Vector {
        return rotation * input + disturbance;
    };
    return model;
}

PlantModel quadrotor_model(const Vector& initial_position, const Vector& initial_velocity) {
    if (initial_position.size() != 3 || initial_velocity.size() != 3) {
        throw InvariantError("quadrotor initial position/velocity must have 3 components");
    }
    PlantModel model;
    model.name = "quadrotor";
    model.depth = 2;
    model.block_dim = 3;
    model.initial_state.resize(6);
    model.initial_state << initial_position, initial_velocity;
    model.block_derivative = [](int /*block*/, const Vector& /*upstream*/, const Vector& input,
                                const Vector& disturbance, double /*t*/) -> Vector {
        // both blocks are pure integrators of their driving signal
        return input + disturbance;
    };
    return model;
}

FunnelParams auto_funnels(const PlantModel& model, const TubeNet& net, const GainSet& gains,
                          const FunnelConfig& cfg, const Vector& initial_state) {
    const int n = model.block_dim;
    const double mu_default = cfg.decay_rate > 0.0 ? cfg.decay_rate : 2.0 / net.horizon();
    FunnelParams fp;
    if (model.depth == 1) {
        return fp;
    }

    const TubeSlice slice = evaluate_slice(net, 0.0);
    Vector reference = stage1_control(initial_state.head(n), slice, gains.kappa[0]).command;
    for (int k = 2; k <= model.depth; ++k) {
        const Vector x_k = initial_state.segment((k - 1) * n, n);
        const Vector error = (x_k - reference).cwiseAbs();
        Vector p(n), q(n), mu(n);
        for (int i = 0; i < n; ++i) {
            q[i] = cfg.final_halfwidth;
            p[i] = cfg.initial_scale * std::max(error[i], 2.0 * cfg.final_halfwidth);
            mu[i] = mu_default;
        }
        fp.initial_halfwidth.push_back(p);
        fp.final_halfwidth.push_back(q);
        fp.decay_rate.push_back(mu);
        if (k < model.depth) {
            reference = stagek_control(x_k, reference, fp, k, 0.0, gains.kappa[k - 1]).command;
        }
    }
    fp.validate();
    return fp;
}

void Trajectory::write_csv(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) {
        throw std::ios_base::failure("cannot open " + path.string() + " for writing");
    }
    out << "t";
    for (int i = 1; i <= depth; ++i) {
        for (int j = 1; j <= block_dim; ++j) {
            out << ",x_" << i << "_" << j;
        }
    }
    for (int j = 1; j <= block_dim; ++j) {
        out << ",u_" << j;
    }
    for (int j = 1; j <= depth * block_dim; ++j) {
        out << ",w_" << j;
    }
    out << ",e1,clamp\n";

    char buf[32];
    const auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, ",%.17g", v);
        out << buf;
    };
    for (const TrajectoryRow& row : rows) {
        std::snprintf(buf, sizeof buf, "%.17g", row.t);
        out << buf;
        for (Eigen::Index i = 0; i < row.state.size(); ++i) put(row.state[i]);
        for (Eigen::Index i = 0; i < row.input.size(); ++i) put(row.input[i]);
        for (Eigen::Index i = 0; i < row.disturbance.size(); ++i) put(row.disturbance[i]);
        put(row.tube_error);
        out << "," << (row.clamped ? 1 : 0) << "\n";
    }
}

std::string metrics_report_json(const MetricsReport& metrics) {
    using json = nlohmann::ordered_json;
    json report;
    report["max_tube_error"] = metrics.max_tube_error;
    report["reach_error"] = metrics.reach_error;
    report["reach_success"] = metrics.reach_success;
    report["min_obstacle_clearance"] = std::isfinite(metrics.min_obstacle_clearance)
                                           ? json(metrics.min_obstacle_clearance)
                                           : json(nullptr);
    report["control_effort"] = metrics.control_effort;
    report["clamp_count"] = metrics.clamp_count;
    report["steps"] = metrics.steps;
    report["step_size"] = metrics.step_size;
    return report.dump(2) + "\n";
}

namespace {

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::vector<double> block_bounds(const SimConfig& sim, int depth) {
    if (sim.disturbance_bound.empty()) {
        return std::vector<double>(depth, 0.0);
    }
    if (sim.disturbance_bound.size() == 1) {
        return std::vector<double>(depth, sim.disturbance_bound[0]);
    }
    if (static_cast<int>(sim.disturbance_bound.size()) != depth) {
        throw InvariantError("disturbance bounds must give one value or one per block");
    }
    return sim.disturbance_bound;
}

}  // namespace

std::pair<Trajectory, MetricsReport> simulate(const PlantModel& model, const TubeNet& net,
                                              const TrasScenario& scen,
                                              const FunnelConfig& funnel_cfg,
                                              const GainSet& gains, const SimConfig& sim) {
    const int n = model.block_dim;
    const int depth = model.depth;
    if (net.dimension() != n || scen.dimension != n) {
        throw InvariantError("model, network and scenario dimensions disagree");
    }
    if (net.horizon() != scen.prescribed_time) {
        throw InvariantError("model horizon does not match the scenario's prescribed time");
    }
    if (gains.depth() != depth) {
        throw InvariantError("gain set must provide one gain per stage");
    }
    gains.validate();
    const std::vector<double> w_bounds = block_bounds(sim, depth);
    for (double b : w_bounds) {
        if (b < 0.0) throw InvariantError("disturbance bounds must be >= 0");
    }

    const double t_end = sim.t_end > 0.0 ? sim.t_end : scen.prescribed_time;
    const double h_requested = sim.step > 0.0 ? sim.step : 1e-3 * t_end;
    const long steps = std::max(1L, std::lround(t_end / h_requested));
    const double h = t_end / static_cast<double>(steps);

    // Theorem precondition: the initial output must start inside the tube.
    Vector state = model.initial_state;
    {
        const TubeSlice slice0 = evaluate_slice(net, 0.0);
        if (!(slice0.radius > 0.0)) {
            throw InvariantError("tube radius is not positive at t = 0");
        }
        const double e1 = (state.head(n) - slice0.center).norm() / slice0.radius;
        if (e1 >= 1.0) {
            throw InvariantError("initial output lies outside the tube at t = 0");
        }
    }
    const FunnelParams funnels = auto_funnels(model, net, gains, funnel_cfg, state);

    std::mt19937_64 rng(sim.seed);
    Trajectory traj;
    traj.depth = depth;
    traj.block_dim = n;
    traj.rows.reserve(steps + 1);

    Vector disturbance = Vector::Zero(depth * n);
    const auto record = [&](double t, const Vector& w) {
        const TubeSlice slice = evaluate_slice(net, t);
        ControlOutput control = full_control(state, slice, funnels, gains, t);
        TrajectoryRow row;
        row.t = t;
        row.state = state;
        row.input = control.input;
        row.disturbance = w;
        row.tube_error = control.diagnostics.tube_error;
        row.stage_errors = std::move(control.diagnostics.stage_errors);
        row.clamped = control.diagnostics.clamped;
        traj.rows.push_back(std::move(row));
    };

    for (long k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) * h;
        for (int block = 0; block < depth; ++block) {
            for (int j = 0; j < n; ++j) {
                disturbance[block * n + j] = w_bounds[block] * (2.0 * uniform01(rng) - 1.0);
            }
        }
        record(t, disturbance);
        const Vector& u = traj.rows.back().input;
        const auto rhs = [&](double stage_t, const Vector& x) -> Vector {
            Vector dx(depth * n);
            for (int block = 1; block <= depth; ++block) {
                const Vector next =
                    block < depth ? Vector(x.segment(block * n, n)) : u;
                dx.segment((block - 1) * n, n) = model.block_derivative(
                    block, x.head(block * n), next, disturbance.segment((block - 1) * n, n),
                    stage_t);
            }
            return dx;
        };
        state = rk4_step(rhs, t, state, h);
        if (!state.allFinite()) {
            throw NumericalError("state became non-finite at t = " + std::to_string(t + h));
        }
    }
    record(t_end, Vector::Zero(depth * n));

    MetricsReport metrics;
    metrics.steps = steps;
    metrics.step_size = h;
    metrics.min_obstacle_clearance = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < traj.rows.size(); ++r) {
        const TrajectoryRow& row = traj.rows[r];
        metrics.max_tube_error = std::max(metrics.max_tube_error, row.tube_error);
        metrics.clamp_count += row.clamped ? 1 : 0;
        metrics.min_obstacle_clearance =
            std::min(metrics.min_obstacle_clearance,
                     min_obstacle_distance(traj.output(r), scen.obstacles, row.t));
        if (r + 1 < traj.rows.size()) {
            metrics.control_effort +=
                0.5 * h * (row.input.norm() + traj.rows[r + 1].input.norm());
        }
    }
    metrics.reach_error = (traj.output(traj.rows.size() - 1) - scen.target.center).norm();
    metrics.reach_success = metrics.reach_error <= scen.target.radius;
    return {std::move(traj), metrics};
}

}  // namespace pinstt
