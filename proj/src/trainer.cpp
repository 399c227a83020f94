#include "pinstt/trainer.hpp"

#include "pinstt/errors.hpp"

#include <algorithm>
#include <cassert>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

namespace pinstt {

TrainConfig default_train_config(const TrasScenario& scen, std::uint64_t seed) {
    TrainConfig cfg;
    cfg.epsilon = scen.prescribed_time / 200.0;
    cfg.center_rate_budget =
        4.0 * (scen.target.center - scen.start.center).norm() / scen.prescribed_time;
    cfg.radius_rate_budget = 4.0 * scen.space.radius / scen.prescribed_time;
    cfg.seed = seed;
    return cfg;
}

CollocationGrid collocation_grid(double t_c, double epsilon) {
    if (!(epsilon > 0.0) || epsilon >= t_c) {
        throw InvariantError("collocation radius must satisfy 0 < epsilon < t_c");
    }
    CollocationGrid grid;
    grid.epsilon = epsilon;
    const int count = static_cast<int>(std::ceil(t_c / (2.0 * epsilon)));
    grid.times.reserve(count);
    for (int r = 1; r <= count; ++r) {
        grid.times.push_back(std::min((2.0 * r - 1.0) * epsilon, t_c));
    }
    grid.boundary_times = {0.0, t_c};
    return grid;
}

void adam_step(AdamState& state, Vector& params, const Vector& grad, double learning_rate) {
    if (grad.size() != params.size() || state.first_moment.size() != params.size()) {
        throw InvariantError("adam state/gradient dimension mismatch");
    }
    if (!grad.allFinite()) {
        throw NumericalError("non-finite gradient passed to adam_step");
    }
    constexpr double beta1 = 0.9;
    constexpr double beta2 = 0.999;
    constexpr double eps = 1e-8;
    state.step += 1;
    state.first_moment = beta1 * state.first_moment + (1.0 - beta1) * grad;
    state.second_moment =
        beta2 * state.second_moment.array() + (1.0 - beta2) * grad.array().square();
    const double correction1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
    const double correction2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
    params.array() -= learning_rate * (state.first_moment.array() / correction1) /
                      ((state.second_moment.array() / correction2).sqrt() + eps);
}

namespace {

// Fisher-Yates with an explicit draw so the permutation sequence does not
// depend on the standard library.
void shuffle_indices(std::vector<int>& indices, std::mt19937_64& rng) {
    for (std::size_t i = indices.size(); i > 1; --i) {
        const std::size_t j = rng() % i;
        std::swap(indices[i - 1], indices[j]);
    }
}

}  // namespace

void TrainLog::write_csv(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) {
        throw std::ios_base::failure("cannot open " + path.string() + " for writing");
    }
    out << "epoch,space,radius_floor,obstacle,center_rate,radius_rate,"
           "start_center,start_radius,target_center,target_radius,total\n";
    char buf[32];
    for (std::size_t e = 0; e < epochs.size(); ++e) {
        out << (e + 1);
        const LossBreakdown& b = epochs[e];
        for (double v : b.physics) {
            std::snprintf(buf, sizeof buf, ",%.17g", v);
            out << buf;
        }
        for (double v : b.boundary) {
            std::snprintf(buf, sizeof buf, ",%.17g", v);
            out << buf;
        }
        std::snprintf(buf, sizeof buf, ",%.17g", b.total());
        out << buf << "\n";
    }
}

std::pair<TubeNet, TrainLog> train(const TrasScenario& scen, const TrainConfig& cfg) {
    validate(scen);
    const double eta_hat = cfg.eta_hat();
    assert(eta_hat + (cfg.center_rate_budget + cfg.radius_rate_budget) * cfg.epsilon <= 0.0);
    if (!(eta_hat < 0.0)) {
        throw InvariantError("rate budgets and epsilon must be positive");
    }

    const CollocationGrid grid = collocation_grid(scen.prescribed_time, cfg.epsilon);
    LossConfig loss_cfg{eta_hat,
                        scen.min_radius,
                        cfg.center_rate_budget,
                        cfg.radius_rate_budget,
                        cfg.physics_weights,
                        cfg.boundary_weights};

    TubeNet net = init_network(scen.dimension, scen.prescribed_time, cfg.hidden_widths,
                               cfg.seed);
    AdamState adam(net.parameter_count());
    std::mt19937_64 rng(cfg.seed);

    const int grid_size = static_cast<int>(grid.times.size());
    const int batch =
        cfg.batch_size <= 0 ? grid_size : std::min(cfg.batch_size, grid_size);
    std::vector<int> order(grid_size);
    for (int i = 0; i < grid_size; ++i) order[i] = i;
    std::vector<double> batch_times(batch);

    TrainLog log;
    log.epochs.reserve(std::min(cfg.max_epochs, 1 << 16));
    Vector params = net.parameters();
    Vector best_params = params;
    double best_loss = std::numeric_limits<double>::infinity();

    const auto started = std::chrono::steady_clock::now();
    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        shuffle_indices(order, rng);
        try {
            for (int begin = 0; begin < grid_size; begin += batch) {
                const int count = std::min(batch, grid_size - begin);
                batch_times.resize(count);
                for (int i = 0; i < count; ++i) {
                    batch_times[i] = grid.times[order[begin + i]];
                }
                auto [breakdown, grad] = loss_gradient(net, batch_times, scen, loss_cfg);
                adam_step(adam, params, grad, cfg.learning_rate);
                net.set_parameters(params);
            }
            const LossBreakdown epoch_loss = evaluate_loss(net, grid.times, scen, loss_cfg);
            log.epochs.push_back(epoch_loss);
            log.final_epoch = epoch;
            const double total = epoch_loss.total();
            if (total < best_loss) {
                best_loss = total;
                best_params = params;
            }
            if (total <= cfg.tolerance) {
                log.converged = true;
                break;
            }
        } catch (const NumericalError& err) {
            log.final_epoch = epoch;
            log.wall_clock_seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
                    .count();
            throw TrainingDiverged(err.what(), log);
        }
    }
    log.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

    net.set_parameters(best_params);
    return {std::move(net), std::move(log)};
}

}  // namespace pinstt
