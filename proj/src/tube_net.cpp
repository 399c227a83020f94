#include "pinstt/tube_net.hpp"

#include "pinstt/dual.hpp"
#include "pinstt/errors.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <string>

namespace pinstt {
namespace {

constexpr char kMagic[4] = {'P', 'N', 'S', 'T'};
constexpr std::uint8_t kVersion = 1;

// Uniform double in [0, 1) from the top 53 bits; fully specified, so the
// draw sequence is identical across standard library implementations.
double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

TubeNet::TubeNet(int dim, double horizon, const std::vector<int>& hidden_widths)
    : dim_(dim), horizon_(horizon) {
    if (dim < 1) {
        throw InvariantError("network dimension must be >= 1");
    }
    if (!(horizon > 0.0)) {
        throw InvariantError("network horizon must be > 0");
    }
    widths_.push_back(1);
    for (int w : hidden_widths) {
        if (w < 1) {
            throw InvariantError("hidden layer widths must be >= 1");
        }
        widths_.push_back(w);
    }
    widths_.push_back(dim + 1);

    Eigen::Index offset = 0;
    for (int l = 0; l < layer_count(); ++l) {
        weight_offset_.push_back(offset);
        offset += static_cast<Eigen::Index>(widths_[l + 1]) * widths_[l];
        bias_offset_.push_back(offset);
        offset += widths_[l + 1];
    }
    params_ = Vector::Zero(offset);
}

Eigen::Map<const RowMatrix> TubeNet::weight(int layer) const {
    return {params_.data() + weight_offset_[layer], widths_[layer + 1], widths_[layer]};
}

Eigen::Map<RowMatrix> TubeNet::weight(int layer) {
    return {params_.data() + weight_offset_[layer], widths_[layer + 1], widths_[layer]};
}

Eigen::Map<const Vector> TubeNet::bias(int layer) const {
    return {params_.data() + bias_offset_[layer], widths_[layer + 1]};
}

Eigen::Map<Vector> TubeNet::bias(int layer) {
    return {params_.data() + bias_offset_[layer], widths_[layer + 1]};
}

void TubeNet::set_parameters(const Vector& params) {
    if (params.size() != params_.size()) {
        throw InvariantError("parameter vector length mismatch");
    }
    if (!params.allFinite()) {
        throw NumericalError("parameter vector contains non-finite values");
    }
    params_ = params;
}

TubeNet init_network(int dim, double horizon, const std::vector<int>& hidden_widths,
                     std::uint64_t seed) {
    TubeNet net(dim, horizon, hidden_widths);
    std::mt19937_64 rng(seed);
    for (int l = 0; l < net.layer_count(); ++l) {
        auto w = net.weight(l);
        const double scale = 1.0 / std::sqrt(static_cast<double>(w.cols()));
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
            for (Eigen::Index c = 0; c < w.cols(); ++c) {
                w(r, c) = scale * (2.0 * uniform01(rng) - 1.0);
            }
        }
        // biases stay zero
    }
    return net;
}

namespace {

void check_finite(const TubeNet& net) {
    if (!net.parameters().allFinite()) {
        throw NumericalError("network parameters are non-finite");
    }
    if (net.layer_count() < 1) {
        throw InvariantError("network is empty");
    }
}

// Shared single-point pass. Value arithmetic is identical whether or not
// tangents are requested, so forward() and evaluate_slice() agree bitwise.
void tube_pass(const TubeNet& net, double t, bool want_rates, Vector& value, Vector& tangent) {
    value.resize(1);
    value[0] = net.normalized_time(t);
    if (want_rates) {
        tangent.resize(1);
        tangent[0] = net.time_scale();
    }
    const int layers = net.layer_count();
    Vector z, zt;
    for (int l = 0; l < layers; ++l) {
        z.noalias() = net.weight(l) * value;
        z += net.bias(l);
        if (want_rates) {
            zt.noalias() = net.weight(l) * tangent;
        }
        if (l + 1 == layers) {
            value = z;
            if (want_rates) tangent = zt;
        } else if (want_rates) {
            value.resize(z.size());
            tangent.resize(z.size());
            for (Eigen::Index i = 0; i < z.size(); ++i) {
                const DualScalar a = tanh(DualScalar{z[i], zt[i]});
                value[i] = a.value;
                tangent[i] = a.tangent;
            }
        } else {
            value = z.array().tanh();
        }
    }
}

}  // namespace

TubeEval forward(const TubeNet& net, double t) {
    check_finite(net);
    Vector value, tangent;
    tube_pass(net, t, false, value, tangent);
    return {value.head(net.dimension()), value[net.dimension()]};
}

TubeRates time_derivative(const TubeNet& net, double t) {
    check_finite(net);
    Vector value, tangent;
    tube_pass(net, t, true, value, tangent);
    return {tangent.head(net.dimension()), tangent[net.dimension()]};
}

TubeSlice evaluate_slice(const TubeNet& net, double t) {
    check_finite(net);
    Vector value, tangent;
    tube_pass(net, t, true, value, tangent);
    const int n = net.dimension();
    return {value.head(n), value[n], tangent.head(n), tangent[n]};
}

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) {
        out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    for (int i = 0; i < 8; ++i) {
        out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
    }
}

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::uint8_t u8() { return take(1)[0]; }

    std::uint32_t u32() {
        auto b = take(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
        return v;
    }

    double f64() {
        auto b = take(8);
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
        double v;
        std::memcpy(&v, &bits, sizeof v);
        return v;
    }

    bool exhausted() const { return pos_ == bytes_.size(); }

private:
    std::span<const std::uint8_t> take(std::size_t count) {
        if (pos_ + count > bytes_.size()) {
            throw FormatError("model file truncated");
        }
        auto view = bytes_.subspan(pos_, count);
        pos_ += count;
        return view;
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> serialize(const TubeNet& net) {
    std::vector<std::uint8_t> out;
    out.insert(out.end(), kMagic, kMagic + 4);
    out.push_back(kVersion);
    put_u32(out, static_cast<std::uint32_t>(net.dimension()));
    put_f64(out, net.horizon());
    put_u32(out, static_cast<std::uint32_t>(net.widths().size()));
    for (int w : net.widths()) {
        put_u32(out, static_cast<std::uint32_t>(w));
    }
    for (Eigen::Index i = 0; i < net.parameter_count(); ++i) {
        put_f64(out, net.parameters()[i]);
    }
    return out;
}

TubeNet deserialize(std::span<const std::uint8_t> bytes) {
    Reader reader(bytes);
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
        throw FormatError("model file: bad magic");
    }
    reader.u32();  // skip magic
    const std::uint8_t version = reader.u8();
    if (version != kVersion) {
        throw FormatError("model file: unsupported version " + std::to_string(version));
    }
    const auto dim = static_cast<int>(reader.u32());
    const double horizon = reader.f64();
    const auto width_count = reader.u32();
    if (width_count < 2) {
        throw FormatError("model file: needs at least input and output widths");
    }
    std::vector<int> widths(width_count);
    for (auto& w : widths) {
        w = static_cast<int>(reader.u32());
        if (w < 1) {
            throw FormatError("model file: layer width must be >= 1");
        }
    }
    if (widths.front() != 1 || widths.back() != dim + 1) {
        throw FormatError("model file: width list inconsistent with dimension");
    }
    TubeNet net(dim, horizon, {widths.begin() + 1, widths.end() - 1});
    Vector params(net.parameter_count());
    for (Eigen::Index i = 0; i < params.size(); ++i) {
        params[i] = reader.f64();
    }
    if (!reader.exhausted()) {
        throw FormatError("model file: trailing bytes");
    }
    net.set_parameters(params);
    return net;
}

void save_model(const TubeNet& net, const std::filesystem::path& path) {
    const auto bytes = serialize(net);
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::ios_base::failure("cannot open " + path.string() + " for writing");
    }
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw std::ios_base::failure("failed writing " + path.string());
    }
}

TubeNet load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::ios_base::failure("cannot open " + path.string());
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return deserialize(bytes);
}

}  // namespace pinstt
