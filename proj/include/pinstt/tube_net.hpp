#pragma once

#include "pinstt/scenario.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace pinstt {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Fully connected tanh network mapping scalar time to a tube slice
/// (n center components + 1 radius). Parameters live in one flat vector,
/// layer-major, each layer's weights row-major followed by its bias; all
/// evaluation and gradient code shares that layout.
///
/// Time is normalized internally to [-1, 1] via t_norm = 2 t / horizon - 1;
/// all reported rates and Lipschitz bounds are w.r.t. physical time.
class TubeNet {
public:
    TubeNet() = default;
    TubeNet(int dim, double horizon, const std::vector<int>& hidden_widths);

    int dimension() const { return dim_; }
    double horizon() const { return horizon_; }

    /// Full width list: input 1, hidden widths, output dim + 1.
    const std::vector<int>& widths() const { return widths_; }
    int layer_count() const { return static_cast<int>(widths_.size()) - 1; }

    Eigen::Map<const RowMatrix> weight(int layer) const;
    Eigen::Map<RowMatrix> weight(int layer);
    Eigen::Map<const Vector> bias(int layer) const;
    Eigen::Map<Vector> bias(int layer);

    const Vector& parameters() const { return params_; }
    void set_parameters(const Vector& params);
    Eigen::Index parameter_count() const { return params_.size(); }

    double normalized_time(double t) const { return 2.0 * t / horizon_ - 1.0; }
    /// d t_norm / d t, the factor converting normalized rates to physical ones.
    double time_scale() const { return 2.0 / horizon_; }

private:
    friend TubeNet deserialize(std::span<const std::uint8_t> bytes);

    int dim_ = 0;
    double horizon_ = 0.0;
    std::vector<int> widths_;
    std::vector<Eigen::Index> weight_offset_;
    std::vector<Eigen::Index> bias_offset_;
    Vector params_;
};

struct TubeEval {
    Vector center;
    double radius = 0.0;
};

struct TubeRates {
    Vector center_rate;
    double radius_rate = 0.0;
};

/// Fresh network with fan-in-scaled symmetric uniform weights and zero
/// biases, bit-reproducible for a fixed seed.
TubeNet init_network(int dim, double horizon, const std::vector<int>& hidden_widths,
                     std::uint64_t seed);

TubeEval forward(const TubeNet& net, double t);

/// Exact d/dt of forward at physical time t, by forward-mode dual arithmetic.
TubeRates time_derivative(const TubeNet& net, double t);

/// Values and rates from a single shared pass.
TubeSlice evaluate_slice(const TubeNet& net, double t);

std::vector<std::uint8_t> serialize(const TubeNet& net);
TubeNet deserialize(std::span<const std::uint8_t> bytes);

void save_model(const TubeNet& net, const std::filesystem::path& path);
TubeNet load_model(const std::filesystem::path& path);

}  // namespace pinstt
