#include "coastnav/landmark.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

namespace coastnav {

Association associate(const std::vector<StaticTarget>& targets,
                      const std::vector<Landmark>& landmarks, const Pose& prior, double gate) {
    struct Candidate {
        double distance;
        std::size_t target;
        std::size_t landmark;
    };
    std::vector<Candidate> candidates;
    std::vector<NedPoint> landmark_ned(landmarks.size());
    for (std::size_t j = 0; j < landmarks.size(); ++j)
        landmark_ned[j] = to_ned(landmarks[j].position, prior.position);

    for (std::size_t i = 0; i < targets.size(); ++i) {
        const NedPoint t = polar_to_ned(targets[i].range, targets[i].bearing + prior.heading);
        for (std::size_t j = 0; j < landmarks.size(); ++j) {
            const double xi = (t - landmark_ned[j]).norm();
            if (xi < gate) candidates.push_back({xi, i, j});
        }
    }
    std::sort(candidates.begin(), candidates.end(),
              [](const Candidate& a, const Candidate& b) { return a.distance < b.distance; });

    Association assoc;
    std::vector<bool> target_used(targets.size(), false), landmark_used(landmarks.size(), false);
    for (const auto& c : candidates) {
        if (target_used[c.target] || landmark_used[c.landmark]) continue;
        target_used[c.target] = true;
        landmark_used[c.landmark] = true;
        assoc.pairs.push_back({c.target, landmarks[c.landmark].id, c.distance});
    }
    return assoc;
}

PairGeometry pair_geometry(const StaticTarget& zi, const StaticTarget& zj, const Landmark& li,
                           const Landmark& lj, const GeodeticPoint& origin) {
    const NedPoint diff = to_ned(li.position, origin) - to_ned(lj.position, origin);
    const double d = diff.norm();
    if (d < 1e-9) throw std::invalid_argument("pair_geometry: coincident landmarks");
    return {zj.range / zi.range, wrap_pi(zj.bearing - zi.bearing), d, ned_azimuth(diff)};
}

double heading_map(double r, double beta) {
    return std::atan2(r * std::sin(beta), 1.0 - r * std::cos(beta));
}

Eigen::Vector2d heading_map_gradient(double r, double beta) {
    const double s = std::sin(beta), c = std::cos(beta);
    const double q = 1.0 - 2.0 * r * c + r * r;
    return {s / q, r * (c - r) / q};
}

Eigen::Matrix2d heading_map_hessian(double r, double beta) {
    const double s = std::sin(beta), c = std::cos(beta);
    const double q = 1.0 - 2.0 * r * c + r * r;
    const double q2 = q * q;
    Eigen::Matrix2d h;
    h(0, 0) = -2.0 * s * (r - c) / q2;
    h(0, 1) = h(1, 0) = (c * (1.0 + r * r) - 2.0 * r) / q2;
    h(1, 1) = -r * s * (1.0 - r * r) / q2;
    return h;
}

double heading_from_pair(const PairGeometry& g, double beta_i) {
    const double u = g.range_ratio * std::sin(g.bearing_diff);
    const double v = 1.0 - g.range_ratio * std::cos(g.bearing_diff);
    if (std::hypot(u, v) < 1e-9)
        throw std::invalid_argument("heading_from_pair: degenerate geometry (coincident targets)");
    return wrap_pi(std::atan2(u, v) + g.separation_azimuth - beta_i);
}

GeodeticPoint position_from_target(const StaticTarget& z, const Landmark& l, double psi_hat) {
    const NedPoint delta = -1.0 * polar_to_ned(z.range, z.bearing + psi_hat);
    return to_geo(delta, l.position);
}

HeadingEstimate heading_variance(const PairGeometry& g, double var_rho_i, double var_rho_j,
                                 double var_beta_i, double var_beta_j, double mu_rho_i,
                                 double mu_rho_j, double mu_beta_i, double mu_beta_j) {
    const double cov_i = std::sqrt(var_rho_i) / mu_rho_i;
    const double cov_j = std::sqrt(var_rho_j) / mu_rho_j;
    if (!(cov_i < 1.0))
        throw std::invalid_argument("heading_variance: sigma_rho_i / mu_rho_i must be < 1");
    if (!(cov_j < 1.0))
        throw std::invalid_argument("heading_variance: sigma_rho_j / mu_rho_j must be < 1");

    // Gaussian approximation of the range ratio
    const double mu_r = mu_rho_j / mu_rho_i;
    const double var_r = mu_r * mu_r *
                         (var_rho_i / (mu_rho_i * mu_rho_i) + var_rho_j / (mu_rho_j * mu_rho_j));
    const double mu_b = wrap_pi(mu_beta_j - mu_beta_i);
    const double var_b = var_beta_i + var_beta_j;

    const double q = 1.0 - 2.0 * mu_r * std::cos(mu_b) + mu_r * mu_r;
    if (q < 1e-12)
        throw std::invalid_argument("heading_variance: degenerate geometry (coincident targets)");

    const Eigen::Vector2d grad = heading_map_gradient(mu_r, mu_b);
    const Eigen::Matrix2d hess = heading_map_hessian(mu_r, mu_b);
    const Eigen::Matrix2d sigma_x = Eigen::Vector2d(var_r, var_b).asDiagonal();

    const double mean_dpsi = heading_map(mu_r, mu_b) + 0.5 * (hess * sigma_x).trace();
    const double var_dpsi = grad.dot(sigma_x * grad) +
                            0.5 * (sigma_x * hess * sigma_x * hess).trace();

    return {wrap_pi(mean_dpsi + g.separation_azimuth - mu_beta_i), var_dpsi + var_beta_i};
}

Eigen::Matrix2d position_covariance(const StaticTarget& z, const HeadingEstimate& psi) {
    const double theta = z.bearing + psi.mean;
    const double c = std::cos(theta), s = std::sin(theta);
    Eigen::Matrix<double, 2, 3> jac;
    jac << -c, z.range * s, z.range * s,
           -s, -z.range * c, -z.range * c;
    const Eigen::Vector3d diag(z.range_var, z.bearing_var, psi.var);
    return jac * diag.asDiagonal() * jac.transpose();
}

PositionEstimate fuse(const std::vector<PositionEstimate>& estimates) {
    if (estimates.empty()) throw std::invalid_argument("fuse: no estimates");
    const GeodeticPoint origin = estimates.front().mean;

    Eigen::Matrix2d info = Eigen::Matrix2d::Zero();
    Eigen::Vector2d info_mean = Eigen::Vector2d::Zero();
    constexpr double kRegularization = 1e-6;  // meters^2
    for (const auto& e : estimates) {
        Eigen::Matrix2d cov = e.cov;
        if (std::abs(cov.determinant()) < 1e-12) cov += kRegularization * Eigen::Matrix2d::Identity();
        if (std::abs(cov.determinant()) < 1e-30 || !cov.allFinite())
            throw std::invalid_argument("fuse: singular covariance after regularization");
        const Eigen::Matrix2d inv = cov.inverse();
        const NedPoint mu = to_ned(e.mean, origin);
        info += inv;
        info_mean += inv * Eigen::Vector2d(mu.north, mu.east);
    }
    const Eigen::Matrix2d fused_cov = info.inverse();
    const Eigen::Vector2d fused_mu = fused_cov * info_mean;
    return {to_geo({fused_mu(0), fused_mu(1)}, origin), fused_cov};
}

PoseEstimate estimate_second_stage(const std::vector<StaticTarget>& targets, const Chart& chart,
                                   const PoseEstimate& first_stage, double gate) {
    PoseEstimate est;
    est.stage = EstimateStage::second;
    if (!first_stage.available) return est;

    const Pose prior = first_stage.mean;
    const Association assoc = associate(targets, chart.landmarks, prior, gate);
    if (assoc.pairs.size() < 2) return est;

    auto landmark_by_id = [&](const std::string& id) -> const Landmark& {
        for (const auto& lm : chart.landmarks)
            if (lm.id == id) return lm;
        throw std::logic_error("estimate_second_stage: unknown landmark id");
    };

    // widest angular separation minimizes the propagated heading variance;
    // fall back to the next-best pair on degenerate or rejected geometry
    struct ScoredPair {
        double score;
        std::size_t a, b;
    };
    std::vector<ScoredPair> ranked;
    for (std::size_t a = 0; a < assoc.pairs.size(); ++a) {
        for (std::size_t b = a + 1; b < assoc.pairs.size(); ++b) {
            const auto& zi = targets[assoc.pairs[a].target_index];
            const auto& zj = targets[assoc.pairs[b].target_index];
            const double beta_ji = wrap_pi(zj.bearing - zi.bearing);
            const double d = (to_ned(landmark_by_id(assoc.pairs[a].landmark_id).position,
                                     prior.position) -
                              to_ned(landmark_by_id(assoc.pairs[b].landmark_id).position,
                                     prior.position))
                                 .norm();
            ranked.push_back({std::abs(std::sin(beta_ji)) * d, a, b});
        }
    }
    std::sort(ranked.begin(), ranked.end(),
              [](const ScoredPair& x, const ScoredPair& y) { return x.score > y.score; });

    for (const auto& pick : ranked) {
        const auto& pair_i = assoc.pairs[pick.a];
        const auto& pair_j = assoc.pairs[pick.b];
        const StaticTarget& zi = targets[pair_i.target_index];
        const StaticTarget& zj = targets[pair_j.target_index];
        const Landmark& li = landmark_by_id(pair_i.landmark_id);
        const Landmark& lj = landmark_by_id(pair_j.landmark_id);
        HeadingEstimate psi;
        try {
            const PairGeometry g = pair_geometry(zi, zj, li, lj, prior.position);
            psi = heading_variance(g, zi.range_var, zj.range_var, zi.bearing_var, zj.bearing_var,
                                   zi.range, zj.range, zi.bearing, zj.bearing);
        } catch (const std::invalid_argument&) {
            continue;
        }

        std::vector<PositionEstimate> positions;
        for (const auto& p : assoc.pairs) {
            const StaticTarget& z = targets[p.target_index];
            const Landmark& l = landmark_by_id(p.landmark_id);
            positions.push_back(
                {position_from_target(z, l, psi.mean), position_covariance(z, psi)});
        }
        const PositionEstimate fused = fuse(positions);

        est.mean = {fused.mean, psi.mean};
        est.cov = Eigen::Matrix3d::Zero();
        est.cov.topLeftCorner<2, 2>() = fused.cov;
        est.cov(2, 2) = psi.var;
        est.available = true;
        return est;
    }
    return est;  // every candidate pair was degenerate
}

}  // namespace coastnav
