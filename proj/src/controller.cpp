#include "pinstt/controller.hpp"

#include "pinstt/errors.hpp"

#include <cmath>
#include <string>

namespace pinstt {

void FunnelParams::validate() const {
    if (final_halfwidth.size() != initial_halfwidth.size() ||
        decay_rate.size() != initial_halfwidth.size()) {
        throw InvariantError("funnel parameter stage counts disagree");
    }
    for (std::size_t s = 0; s < initial_halfwidth.size(); ++s) {
        if (!((final_halfwidth[s].array() > 0.0).all())) {
            throw InvariantError("funnel final half-widths must be > 0");
        }
        if (!((initial_halfwidth[s].array() > final_halfwidth[s].array()).all())) {
            throw InvariantError("funnel initial half-widths must exceed final ones");
        }
        if (!((decay_rate[s].array() >= 0.0).all())) {
            throw InvariantError("funnel decay rates must be >= 0");
        }
    }
}

void GainSet::validate() const {
    if (kappa.empty()) {
        throw InvariantError("gain set is empty");
    }
    for (double k : kappa) {
        if (!(k > 0.0)) {
            throw InvariantError("stage gains must be > 0");
        }
    }
}

double funnel_gamma(const FunnelParams& fp, int stage, int axis, double t) {
    const int s = stage - 2;
    const double p = fp.initial_halfwidth[s][axis];
    const double q = fp.final_halfwidth[s][axis];
    const double mu = fp.decay_rate[s][axis];
    return (p - q) * std::exp(-mu * t) + q;
}

namespace {

// ln((1+e)/(1-e)), the barrier transform; callers clamp e first.
double barrier(double e) { return std::log((1.0 + e) / (1.0 - e)); }

}  // namespace

StageOutput stage1_control(const Vector& x1, const TubeSlice& slice, double kappa1) {
    if (!(slice.radius > 0.0)) {
        throw InvariantError("tube radius is not positive at the queried time");
    }
    const Vector offset = x1 - slice.center;
    const double e1 = offset.norm() / slice.radius;
    StageOutput out;
    out.raw_error = Vector::Constant(1, e1);
    const double e1_clamped = std::min(e1, 1.0 - kErrorClamp);
    out.clamped = e1 > 1.0 - kErrorClamp;
    out.command = -kappa1 * barrier(e1_clamped) * offset;
    return out;
}

StageOutput stagek_control(const Vector& x_k, const Vector& r_k, const FunnelParams& fp,
                           int stage, double t, double kappa) {
    const Eigen::Index n = x_k.size();
    StageOutput out;
    out.raw_error.resize(n);
    out.command.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double gamma = funnel_gamma(fp, stage, static_cast<int>(i), t);
        const double e = (x_k[i] - r_k[i]) / gamma;
        out.raw_error[i] = e;
        double ec = e;
        if (std::abs(ec) > 1.0 - kErrorClamp) {
            out.clamped = true;
            ec = std::copysign(1.0 - kErrorClamp, ec);
        }
        const double xi = 4.0 / (gamma * (1.0 - ec * ec));
        out.command[i] = -kappa * xi * barrier(ec);
    }
    return out;
}

ControlOutput full_control(const Vector& stacked_state, const TubeSlice& slice,
                           const FunnelParams& fp, const GainSet& gains, double t) {
    gains.validate();
    const int depth = gains.depth();
    const Eigen::Index n = slice.center.size();
    if (stacked_state.size() != depth * n) {
        throw InvariantError("stacked state length does not match depth * dimension");
    }
    if (fp.stage_count() != depth - 1) {
        throw InvariantError("funnel parameters must cover stages 2..N");
    }

    ControlOutput out;
    StageOutput stage = stage1_control(stacked_state.head(n), slice, gains.kappa[0]);
    out.diagnostics.tube_error = stage.raw_error[0];
    out.diagnostics.clamped = stage.clamped;
    for (int k = 2; k <= depth; ++k) {
        const Vector reference = std::move(stage.command);
        stage = stagek_control(stacked_state.segment((k - 1) * n, n), reference, fp, k, t,
                               gains.kappa[k - 1]);
        out.diagnostics.stage_errors.push_back(stage.raw_error);
        out.diagnostics.clamped = out.diagnostics.clamped || stage.clamped;
    }
    out.input = std::move(stage.command);
    return out;
}

}  // namespace pinstt
