#pragma once

#include "pinstt/errors.hpp"
#include "pinstt/loss.hpp"
#include "pinstt/scenario.hpp"
#include "pinstt/tube_net.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

namespace pinstt {

struct TrainConfig {
    double epsilon = 0.0;             // collocation covering radius, seconds
    double center_rate_budget = 0.0;  // L_c, units/s
    double radius_rate_budget = 0.0;  // L_r, units/s
    std::array<double, 5> physics_weights{1.0, 1.0, 1.0, 1.0, 1.0};
    std::array<double, 4> boundary_weights{10.0, 10.0, 10.0, 10.0};
    int batch_size = 0;               // 0: full grid per step
    double learning_rate = 1e-3;
    int max_epochs = 20000;
    double tolerance = 1e-4;          // stop once total loss falls below
    std::uint64_t seed = 0;
    std::vector<int> hidden_widths{64, 64, 64};

    /// Margin required of sampled residuals so the rate budgets cannot hide a
    /// violation between samples: -(L_c + L_r) * epsilon.
    double eta_hat() const { return -(center_rate_budget + radius_rate_budget) * epsilon; }
};

/// Defaults derived from the scenario geometry: epsilon = t_c / 200 and rate
/// budgets four times the straight-line rates.
TrainConfig default_train_config(const TrasScenario& scen, std::uint64_t seed);

struct TrainLog {
    std::vector<LossBreakdown> epochs;  // loss after each epoch, verbatim
    double wall_clock_seconds = 0.0;
    int final_epoch = 0;
    bool converged = false;

    void write_csv(const std::filesystem::path& path) const;
};

/// Thrown when the loss or gradient becomes non-finite; carries the progress
/// made up to the last finite epoch.
class TrainingDiverged : public NumericalError {
public:
    TrainingDiverged(const std::string& what, TrainLog log)
        : NumericalError(what), log_(std::move(log)) {}
    const TrainLog& log() const { return log_; }

private:
    TrainLog log_;
};

/// Interior collocation times covering [0, t_c]: every t is within epsilon of
/// some grid point. Endpoint times 0 and t_c are kept separately for the
/// boundary terms.
struct CollocationGrid {
    std::vector<double> times;
    std::array<double, 2> boundary_times{};
    double epsilon = 0.0;
};

CollocationGrid collocation_grid(double t_c, double epsilon);

struct AdamState {
    Vector first_moment;
    Vector second_moment;
    long step = 0;

    explicit AdamState(Eigen::Index size)
        : first_moment(Vector::Zero(size)), second_moment(Vector::Zero(size)) {}
};

/// One bias-corrected Adam update (beta1 0.9, beta2 0.999, eps 1e-8), applied
/// to params in place.
void adam_step(AdamState& state, Vector& params, const Vector& grad, double learning_rate);

/// Mini-batch Adam over the collocation grid until the total loss reaches
/// cfg.tolerance or the epoch budget runs out. Returns the best-loss
/// parameters seen. Non-convergence is reported through the log, not thrown.
std::pair<TubeNet, TrainLog> train(const TrasScenario& scen, const TrainConfig& cfg);

}  // namespace pinstt
