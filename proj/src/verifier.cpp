#include "pinstt/verifier.hpp"

#include "pinstt/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace pinstt {
namespace {

// Upper bound on the spectral norm: 50 power iterations from a fixed
// pseudo-random start, times a 1.01 safety factor.
double spectral_norm_bound(const Eigen::Ref<const RowMatrix>& w) {
    if (w.size() == 0) return 0.0;
    std::mt19937_64 rng(0x9e3779b97f4a7c15ull);
    Vector v(w.cols());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        v[i] = static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5;
    }
    if (v.norm() == 0.0) v.setOnes();
    v /= v.norm();
    double sigma = 0.0;
    for (int iter = 0; iter < 50; ++iter) {
        Vector wv = w * v;
        sigma = wv.norm();
        if (sigma == 0.0) return 0.0;
        Vector wtwv = w.transpose() * wv;
        const double norm = wtwv.norm();
        if (norm == 0.0) break;
        v = wtwv / norm;
    }
    return 1.01 * sigma;
}

}  // namespace

std::pair<double, double> global_lipschitz_bound(const TubeNet& net) {
    const int layers = net.layer_count();
    double hidden_product = 1.0;
    for (int l = 0; l + 1 < layers; ++l) {
        hidden_product *= spectral_norm_bound(net.weight(l));
    }
    const int n = net.dimension();
    const auto out = net.weight(layers - 1);
    const double center_norm = spectral_norm_bound(out.topRows(n));
    const double radius_norm = spectral_norm_bound(out.bottomRows(1));
    const double scale = net.time_scale() * hidden_product;
    return {scale * center_norm, scale * radius_norm};
}

DenseAudit dense_audit(const TubeNet& net, const TrasScenario& scen, double resolution) {
    if (!(resolution > 0.0)) {
        throw InvariantError("audit resolution must be > 0");
    }
    DenseAudit audit;
    audit.resolution = resolution;
    audit.worst_space = -std::numeric_limits<double>::infinity();
    audit.worst_radius = -std::numeric_limits<double>::infinity();
    audit.worst_obstacle = -std::numeric_limits<double>::infinity();

    const double t_c = scen.prescribed_time;
    const long steps = static_cast<long>(std::ceil(t_c / resolution));
    for (long k = 0; k <= steps; ++k) {
        const double t = std::min(static_cast<double>(k) * resolution, t_c);
        const TubeEval eval = forward(net, t);
        TubeSlice slice{eval.center, eval.radius, Vector::Zero(net.dimension()), 0.0};
        const RasResiduals res = ras_residuals(slice, scen, t);
        if (res.space > audit.worst_space) {
            audit.worst_space = res.space;
            audit.worst_space_time = t;
        }
        if (res.radius > audit.worst_radius) {
            audit.worst_radius = res.radius;
            audit.worst_radius_time = t;
        }
        const double obstacle = res.worst_obstacle();
        if (obstacle > audit.worst_obstacle) {
            audit.worst_obstacle = obstacle;
            audit.worst_obstacle_time = t;
        }
        const bool violated =
            res.space > 0.0 || res.radius > 0.0 || (!res.obstacle.empty() && obstacle > 0.0);
        if (violated && !audit.first_violation_time) {
            audit.first_violation_time = t;
        }
    }
    return audit;
}

Certificate certify(const TubeNet& net, const TrasScenario& scen, const TrainConfig& cfg) {
    if (net.dimension() != scen.dimension) {
        throw InvariantError("model dimension does not match the scenario");
    }
    if (net.horizon() != scen.prescribed_time) {
        throw InvariantError("model horizon does not match the scenario's prescribed time");
    }
    const CollocationGrid grid = collocation_grid(scen.prescribed_time, cfg.epsilon);

    Certificate cert;
    cert.eta_hat = cfg.eta_hat();
    cert.epsilon = cfg.epsilon;
    cert.collocation_points = static_cast<int>(grid.times.size());
    cert.time_scaling = "t_norm = 2 t / t_c - 1; rates converted by 2 / t_c";
    cert.worst_space = -std::numeric_limits<double>::infinity();
    cert.worst_radius = -std::numeric_limits<double>::infinity();
    cert.worst_obstacle = -std::numeric_limits<double>::infinity();

    for (double t : grid.times) {
        const TubeSlice slice = evaluate_slice(net, t);
        const RasResiduals res = ras_residuals(slice, scen, t);
        if (res.space > cert.worst_space) {
            cert.worst_space = res.space;
            cert.worst_space_time = t;
        }
        if (res.radius > cert.worst_radius) {
            cert.worst_radius = res.radius;
            cert.worst_radius_time = t;
        }
        const double obstacle = res.worst_obstacle();
        if (obstacle > cert.worst_obstacle) {
            cert.worst_obstacle = obstacle;
            cert.worst_obstacle_time = t;
        }
        cert.max_center_rate_sampled =
            std::max(cert.max_center_rate_sampled, slice.center_rate.norm());
        cert.max_radius_rate_sampled =
            std::max(cert.max_radius_rate_sampled, std::abs(slice.radius_rate));
    }

    const TubeEval at_start = forward(net, 0.0);
    const TubeEval at_end = forward(net, scen.prescribed_time);
    cert.boundary_gaps = boundary_residuals(at_start.center, at_start.radius, at_end.center,
                                            at_end.radius, scen);

    cert.center_rate_budget = cfg.center_rate_budget;
    cert.radius_rate_budget = cfg.radius_rate_budget;
    std::tie(cert.center_network_bound, cert.radius_network_bound) =
        global_lipschitz_bound(net);

    // The rate budgets are trusted only where the sampled rate penalties
    // vanish identically; otherwise the sound network bound takes over.
    cert.center_rate_hinge_zero = cert.max_center_rate_sampled <= cfg.center_rate_budget;
    cert.radius_rate_hinge_zero = cert.max_radius_rate_sampled <= cfg.radius_rate_budget;
    cert.center_effective = cert.center_rate_hinge_zero
                                ? std::min(cfg.center_rate_budget, cert.center_network_bound)
                                : cert.center_network_bound;
    cert.radius_effective = cert.radius_rate_hinge_zero
                                ? std::min(cfg.radius_rate_budget, cert.radius_network_bound)
                                : cert.radius_network_bound;

    cert.margin_sum = cert.eta_hat + (cert.center_effective + cert.radius_effective) * cfg.epsilon;
    cert.margin_max =
        cert.eta_hat + std::max(cert.center_effective, cert.radius_effective) * cfg.epsilon;

    cert.audit = dense_audit(net, scen, cfg.epsilon / 10.0);

    const bool samples_ok = cert.worst_space <= cert.eta_hat &&
                            cert.worst_radius <= cert.eta_hat &&
                            (scen.obstacles.empty() || cert.worst_obstacle <= cert.eta_hat);
    const bool boundary_ok = cert.boundary_gaps.worst() <= cert.boundary_tolerance;
    cert.pass = cert.margin_sum <= 0.0 && samples_ok && boundary_ok && cert.audit.clean();
    return cert;
}

std::string certificate_report(const Certificate& cert) {
    using json = nlohmann::ordered_json;
    const auto number_or_null = [](double v) {
        return std::isfinite(v) ? json(v) : json(nullptr);
    };
    json report;
    report["pass"] = cert.pass;
    report["eta_hat"] = cert.eta_hat;
    report["epsilon"] = cert.epsilon;
    report["collocation_points"] = cert.collocation_points;
    report["time_scaling"] = cert.time_scaling;
    report["worst_residuals"] = {
        {"space", number_or_null(cert.worst_space)},
        {"space_time", cert.worst_space_time},
        {"radius", number_or_null(cert.worst_radius)},
        {"radius_time", cert.worst_radius_time},
        {"obstacle", number_or_null(cert.worst_obstacle)},
        {"obstacle_time", cert.worst_obstacle_time},
    };
    report["boundary_gaps"] = {
        {"start_center", cert.boundary_gaps.start_center},
        {"start_radius", cert.boundary_gaps.start_radius},
        {"target_center", cert.boundary_gaps.target_center},
        {"target_radius", cert.boundary_gaps.target_radius},
        {"tolerance", cert.boundary_tolerance},
    };
    report["lipschitz"] = {
        {"center_budget", cert.center_rate_budget},
        {"radius_budget", cert.radius_rate_budget},
        {"center_network_bound", cert.center_network_bound},
        {"radius_network_bound", cert.radius_network_bound},
        {"max_center_rate_sampled", cert.max_center_rate_sampled},
        {"max_radius_rate_sampled", cert.max_radius_rate_sampled},
        {"center_rate_hinge_zero", cert.center_rate_hinge_zero},
        {"radius_rate_hinge_zero", cert.radius_rate_hinge_zero},
        {"center_effective", cert.center_effective},
        {"radius_effective", cert.radius_effective},
    };
    report["margin"] = {
        {"sum", cert.margin_sum},
        {"max", cert.margin_max},
        {"gate", "sum"},
    };
    report["dense_audit"] = {
        {"resolution", cert.audit.resolution},
        {"worst_space", number_or_null(cert.audit.worst_space)},
        {"worst_space_time", cert.audit.worst_space_time},
        {"worst_radius", number_or_null(cert.audit.worst_radius)},
        {"worst_radius_time", cert.audit.worst_radius_time},
        {"worst_obstacle", number_or_null(cert.audit.worst_obstacle)},
        {"worst_obstacle_time", cert.audit.worst_obstacle_time},
        {"first_violation_time", cert.audit.first_violation_time
                                     ? json(*cert.audit.first_violation_time)
                                     : json(nullptr)},
        {"clean", cert.audit.clean()},
    };
    return report.dump(2) + "\n";
}

}  // namespace pinstt
