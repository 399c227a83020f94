#include "pinstt/loss.hpp"

#include "pinstt/errors.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace pinstt {

double LossBreakdown::physics_total() const {
    double sum = 0.0;
    for (int i = 0; i < 5; ++i) sum += physics_weights[i] * physics[i];
    return sum;
}

double LossBreakdown::boundary_total() const {
    double sum = 0.0;
    for (int j = 0; j < 4; ++j) sum += boundary_weights[j] * boundary[j];
    return sum;
}

double LossBreakdown::total() const { return physics_total() + boundary_total(); }

namespace {

// Forward pass with time tangents, keeping what the reverse sweep needs.
// activation[l] / act_tangent[l] hold the inputs of layer l (so entry 0 is
// the normalized time), pre_tangent[l] holds that layer's pre-activation
// tangent.
struct PassCache {
    std::vector<Vector> activation;
    std::vector<Vector> act_tangent;
    std::vector<Vector> pre_tangent;
    Vector out_value;
    Vector out_tangent;
};

void augmented_forward(const TubeNet& net, double t, PassCache& cache) {
    const int layers = net.layer_count();
    cache.activation.resize(layers);
    cache.act_tangent.resize(layers);
    cache.pre_tangent.resize(layers);

    Vector value(1), tangent(1);
    value[0] = net.normalized_time(t);
    tangent[0] = net.time_scale();
    for (int l = 0; l < layers; ++l) {
        cache.activation[l] = value;
        cache.act_tangent[l] = tangent;
        Vector z = net.weight(l) * value;
        z += net.bias(l);
        Vector zt = net.weight(l) * tangent;
        if (l + 1 == layers) {
            cache.out_value = std::move(z);
            cache.out_tangent = std::move(zt);
        } else {
            cache.pre_tangent[l] = std::move(zt);
            value.resize(z.size());
            tangent.resize(z.size());
            for (Eigen::Index i = 0; i < z.size(); ++i) {
                const double a = std::tanh(z[i]);
                value[i] = a;
                tangent[i] = (1.0 - a * a) * cache.pre_tangent[l][i];
            }
        }
    }
}

// Reverse sweep through the tangent-augmented graph. Seeds are adjoints of
// the output values (gv) and output tangents (gt). For a hidden layer with
// a = tanh(z), at = (1 - a^2) * zt:
//   dL/dz  = (1 - a^2) . dL/da - 2 a (1 - a^2) zt . dL/dat
//   dL/dzt = (1 - a^2) . dL/dat
// and for any layer z = W x + b, zt = W xt:
//   dL/dW += dL/dz x^T + dL/dzt xt^T,  dL/db += dL/dz,
//   dL/dx = W^T dL/dz,  dL/dxt = W^T dL/dzt.
void reverse_pass(const TubeNet& net, const PassCache& cache, Vector gv, Vector gt,
                  Vector& grad) {
    const int layers = net.layer_count();
    Vector gz = std::move(gv);
    Vector gzt = std::move(gt);
    for (int l = layers - 1; l >= 0; --l) {
        if (l + 1 != layers) {
            // entering a hidden layer: current adjoints refer to (a, at)
            const Vector& a = cache.activation[l + 1];
            const Vector& zt = cache.pre_tangent[l];
            Vector ga = std::move(gz);
            Vector gat = std::move(gzt);
            gz.resize(a.size());
            gzt.resize(a.size());
            for (Eigen::Index i = 0; i < a.size(); ++i) {
                const double s = 1.0 - a[i] * a[i];
                gz[i] = s * ga[i] - 2.0 * a[i] * s * zt[i] * gat[i];
                gzt[i] = s * gat[i];
            }
        }
        const Eigen::Index rows = gz.size();
        const Eigen::Index cols = cache.activation[l].size();
        Eigen::Map<RowMatrix> gw(grad.data() + (net.weight(l).data() - net.parameters().data()),
                                 rows, cols);
        Eigen::Map<Vector> gb(grad.data() + (net.bias(l).data() - net.parameters().data()),
                              rows);
        gw.noalias() += gz * cache.activation[l].transpose();
        gw.noalias() += gzt * cache.act_tangent[l].transpose();
        gb += gz;
        if (l > 0) {
            Vector next_gz = net.weight(l).transpose() * gz;
            Vector next_gzt = net.weight(l).transpose() * gzt;
            gz = std::move(next_gz);
            gzt = std::move(next_gzt);
        }
    }
}

double relu(double x) { return x > 0.0 ? x : 0.0; }

struct PointSeeds {
    Vector gv;
    Vector gt;
    bool any = false;
};

// Hinge values at one collocation time plus the matching adjoint seeds.
void physics_terms(const TubeNet& net, const TrasScenario& scen, const LossConfig& cfg,
                   double t, const PassCache& cache, LossBreakdown& breakdown,
                   PointSeeds* seeds) {
    const int n = net.dimension();
    TubeSlice slice{cache.out_value.head(n), cache.out_value[n],
                    cache.out_tangent.head(n), cache.out_tangent[n]};
    RasResiduals res = ras_residuals(slice, scen, t);
    res.radius = -slice.radius + cfg.min_radius;  // the config owns the radius floor

    if (seeds) {
        seeds->gv = Vector::Zero(n + 1);
        seeds->gt = Vector::Zero(n + 1);
        seeds->any = false;
    }

    const double space_arg = res.space - cfg.eta_hat;
    breakdown.physics[0] += relu(space_arg);
    if (seeds && space_arg > 0.0 && cfg.physics_weights[0] > 0.0) {
        const Vector diff = slice.center - scen.space.center;
        const double norm = diff.norm();
        if (norm > 0.0) {
            seeds->gv.head(n) += cfg.physics_weights[0] * diff / norm;
        }
        seeds->gv[n] += cfg.physics_weights[0];
        seeds->any = true;
    }

    const double radius_arg = res.radius - cfg.eta_hat;
    breakdown.physics[1] += relu(radius_arg);
    if (seeds && radius_arg > 0.0 && cfg.physics_weights[1] > 0.0) {
        seeds->gv[n] -= cfg.physics_weights[1];
        seeds->any = true;
    }

    if (!res.obstacle.empty()) {
        const double avoid_arg = res.worst_obstacle() - cfg.eta_hat;
        breakdown.physics[2] += relu(avoid_arg);
        if (seeds && avoid_arg > 0.0 && cfg.physics_weights[2] > 0.0) {
            const int j = res.nearest_obstacle();
            seeds->gv.head(n) -=
                cfg.physics_weights[2] * distance_gradient(slice.center, scen.obstacles[j], t);
            seeds->gv[n] += cfg.physics_weights[2];
            seeds->any = true;
        }
    }

    const double center_speed = slice.center_rate.norm();
    const double center_arg = center_speed - cfg.center_rate_budget;
    breakdown.physics[3] += relu(center_arg);
    if (seeds && center_arg > 0.0 && cfg.physics_weights[3] > 0.0 && center_speed > 0.0) {
        seeds->gt.head(n) += cfg.physics_weights[3] * slice.center_rate / center_speed;
        seeds->any = true;
    }

    const double radius_speed = std::abs(slice.radius_rate);
    const double rate_arg = radius_speed - cfg.radius_rate_budget;
    breakdown.physics[4] += relu(rate_arg);
    if (seeds && rate_arg > 0.0 && cfg.physics_weights[4] > 0.0 && radius_speed > 0.0) {
        seeds->gt[n] += cfg.physics_weights[4] * (slice.radius_rate > 0.0 ? 1.0 : -1.0);
        seeds->any = true;
    }
}

// Squared endpoint gaps; `first` selects the start pair, else the target pair.
void boundary_terms(const TubeNet& net, const TrasScenario& scen, const LossConfig& cfg,
                    bool first, const PassCache& cache, LossBreakdown& breakdown,
                    PointSeeds* seeds) {
    const int n = net.dimension();
    const Ball& goal = first ? scen.start : scen.target;
    const Vector center_gap = cache.out_value.head(n) - goal.center;
    const double radius_gap = cache.out_value[n] - goal.radius;
    const int base = first ? 0 : 2;
    breakdown.boundary[base] += center_gap.squaredNorm();
    breakdown.boundary[base + 1] += radius_gap * radius_gap;
    if (seeds) {
        seeds->gv = Vector::Zero(n + 1);
        seeds->gt = Vector::Zero(n + 1);
        seeds->gv.head(n) += 2.0 * cfg.boundary_weights[base] * center_gap;
        seeds->gv[n] += 2.0 * cfg.boundary_weights[base + 1] * radius_gap;
        seeds->any = seeds->gv.cwiseAbs().maxCoeff() > 0.0;
    }
}

const char* kPhysicsNames[5] = {"space bound", "radius floor", "obstacle separation",
                                "center rate budget", "radius rate budget"};

void check_breakdown(const LossBreakdown& breakdown) {
    for (int i = 0; i < 5; ++i) {
        if (!std::isfinite(breakdown.physics[i])) {
            throw NumericalError(std::string("non-finite physics loss term: ") +
                                 kPhysicsNames[i]);
        }
    }
    for (int j = 0; j < 4; ++j) {
        if (!std::isfinite(breakdown.boundary[j])) {
            throw NumericalError("non-finite boundary loss term " + std::to_string(j));
        }
    }
}

LossBreakdown run(const TubeNet& net, std::span<const double> times, const TrasScenario& scen,
                  const LossConfig& cfg, Vector* grad) {
    if (times.empty()) {
        throw InvariantError("collocation batch is empty");
    }
    LossBreakdown breakdown;
    breakdown.physics_weights = cfg.physics_weights;
    breakdown.boundary_weights = cfg.boundary_weights;
    if (grad) {
        grad->setZero(net.parameter_count());
    }

    PassCache cache;
    PointSeeds seeds;
    for (double t : times) {
        augmented_forward(net, t, cache);
        physics_terms(net, scen, cfg, t, cache, breakdown, grad ? &seeds : nullptr);
        if (grad && seeds.any) {
            reverse_pass(net, cache, seeds.gv, seeds.gt, *grad);
        }
    }
    for (bool first : {true, false}) {
        const double t = first ? 0.0 : scen.prescribed_time;
        augmented_forward(net, t, cache);
        boundary_terms(net, scen, cfg, first, cache, breakdown, grad ? &seeds : nullptr);
        if (grad && seeds.any) {
            reverse_pass(net, cache, seeds.gv, seeds.gt, *grad);
        }
    }
    check_breakdown(breakdown);
    if (grad && !grad->allFinite()) {
        throw NumericalError("non-finite loss gradient");
    }
    return breakdown;
}

}  // namespace

LossBreakdown evaluate_loss(const TubeNet& net, std::span<const double> times,
                            const TrasScenario& scen, const LossConfig& cfg) {
    return run(net, times, scen, cfg, nullptr);
}

std::pair<LossBreakdown, Vector> loss_gradient(const TubeNet& net,
                                               std::span<const double> times,
                                               const TrasScenario& scen,
                                               const LossConfig& cfg) {
    Vector grad;
    LossBreakdown breakdown = run(net, times, scen, cfg, &grad);
    return {std::move(breakdown), std::move(grad)};
}

}  // namespace pinstt
