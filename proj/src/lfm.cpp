#include "coastnav/lfm.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace coastnav {

namespace {

constexpr double kDensityFloor = 1e-300;

double normal_pdf(double x, double sigma) {
    const double z = x / sigma;
    return std::exp(-0.5 * z * z) / (std::sqrt(2.0 * kPi) * sigma);
}

}  // namespace

void LfmParams::validate() const {
    if (!(sigma_lfm > 0.0) || !(rho_max > 0.0))
        throw std::invalid_argument("LfmParams: sigma_lfm and rho_max must be positive");
    if (p_hit < 0.0 || p_random < 0.0 || std::abs(p_hit + p_random - 1.0) > 1e-9)
        throw std::invalid_argument("LfmParams: p_hit + p_random must equal 1");
}

Pose apply_offset(const Pose& prior, const PoseOffset& offset) {
    return {to_geo({offset.dn, offset.de}, prior.position),
            wrap_pi(prior.heading + offset.dpsi)};
}

GeodeticPoint observation_to_geo(const RadarObservation& z, const Pose& pose) {
    return to_geo(polar_to_ned(z.range, z.bearing + pose.heading), pose.position);
}

double likelihood(const RadarObservation& z, const Pose& pose, const ShorelineSamples& samples,
                  const LfmParams& params) {
    const GeodeticPoint endpoint = observation_to_geo(z, pose);
    const double d = samples.min_distance(to_ned(endpoint, samples.origin()));
    return params.p_hit * normal_pdf(d, params.sigma_lfm) + params.p_random / params.rho_max;
}

double scan_log_likelihood(const RadarScan& scan, const Pose& pose,
                           const ShorelineSamples& samples, const LfmParams& params) {
    if (scan.observations.empty())
        throw std::invalid_argument("scan_log_likelihood: empty scan");
    double sum = 0.0;
    for (const auto& z : scan.observations)
        sum += std::log(std::max(likelihood(z, pose, samples, params), kDensityFloor));
    return sum;
}

PsoResult pso_maximize(const std::function<double(const PoseOffset&)>& objective,
                       const PsoConfig& config) {
    using Vec3 = std::array<double, 3>;
    const Vec3 lo{config.bound_lower.dn, config.bound_lower.de, config.bound_lower.dpsi};
    const Vec3 hi{config.bound_upper.dn, config.bound_upper.de, config.bound_upper.dpsi};
    Vec3 vmax;
    for (int d = 0; d < 3; ++d) vmax[d] = 0.2 * (hi[d] - lo[d]);

    auto eval = [&](const Vec3& x) { return objective({x[0], x[1], x[2]}); };

    std::mt19937_64 rng(config.rng_seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const int n = std::max(1, config.n_particles);
    std::vector<Vec3> pos(n), vel(n), best(n);
    std::vector<double> best_val(n);
    int g = 0;  // index of the global best
    for (int i = 0; i < n; ++i) {
        for (int d = 0; d < 3; ++d) {
            pos[i][d] = lo[d] + unit(rng) * (hi[d] - lo[d]);
            vel[i][d] = vmax[d] * (2.0 * unit(rng) - 1.0);
        }
        best[i] = pos[i];
        best_val[i] = eval(pos[i]);
        if (best_val[i] > best_val[g]) g = i;
    }

    for (int iter = 0; iter < config.n_iters; ++iter) {
        for (int i = 0; i < n; ++i) {
            for (int d = 0; d < 3; ++d) {
                const double r1 = unit(rng), r2 = unit(rng);
                vel[i][d] = config.inertia * vel[i][d] +
                            config.cognitive * r1 * (best[i][d] - pos[i][d]) +
                            config.social * r2 * (best[g][d] - pos[i][d]);
                vel[i][d] = std::clamp(vel[i][d], -vmax[d], vmax[d]);
                pos[i][d] = std::clamp(pos[i][d] + vel[i][d], lo[d], hi[d]);
            }
            const double v = eval(pos[i]);
            if (v > best_val[i]) {
                best_val[i] = v;
                best[i] = pos[i];
                if (v > best_val[g]) g = i;
            }
        }
    }
    return {{best[g][0], best[g][1], best[g][2]}, best_val[g]};
}

PoseEstimate estimate_first_stage(const RadarScan& scan, const Pose& prior, const Chart& chart,
                                  const LfmParams& params, const PsoConfig& pso,
                                  const FirstStageOptions& options) {
    params.validate();
    PoseEstimate est;
    est.stage = EstimateStage::first;

    const double margin = std::hypot(std::max(std::abs(pso.bound_lower.dn), pso.bound_upper.dn),
                                     std::max(std::abs(pso.bound_lower.de), pso.bound_upper.de));
    const ShorelineSamples samples = extract_shoreline(
        chart, prior.position, params.rho_max + margin + options.sample_spacing,
        options.sample_spacing);
    if (samples.empty() || scan.observations.empty()) return est;  // not available

    auto objective = [&](const PoseOffset& d) {
        return scan_log_likelihood(scan, apply_offset(prior, d), samples, params);
    };
    const PsoResult r = pso_maximize(objective, pso);

    est.mean = apply_offset(prior, r.argmax);
    est.cov = Eigen::Vector3d(options.position_std * options.position_std,
                              options.position_std * options.position_std,
                              options.heading_std * options.heading_std)
                  .asDiagonal();
    est.available = true;

    // second difference along each position axis exposes ridge degeneracy
    const double h = std::max(options.sample_spacing, params.sigma_lfm / 2.0);
    auto curvature = [&](double an, double ae) {
        const PoseOffset plus{r.argmax.dn + an * h, r.argmax.de + ae * h, r.argmax.dpsi};
        const PoseOffset minus{r.argmax.dn - an * h, r.argmax.de - ae * h, r.argmax.dpsi};
        return r.value - 0.5 * (objective(plus) + objective(minus));
    };
    const double cn = curvature(1.0, 0.0);
    const double ce = curvature(0.0, 1.0);
    const double cmax = std::max({cn, ce, 0.0});
    if (cmax <= 0.0) {
        est.ridge_north = est.ridge_east = true;
    } else {
        est.ridge_north = cn < options.ridge_rel_curvature * cmax;
        est.ridge_east = ce < options.ridge_rel_curvature * cmax;
    }
    return est;
}

EmFitResult fit_lfm_em_distances(const std::vector<double>& distances, const LfmParams& init,
                                 double tol, int max_iters) {
    if (distances.empty())
        throw std::invalid_argument("fit_lfm_em: empty data set");
    init.validate();

    EmFitResult result;
    result.params = init;
    const double n = static_cast<double>(distances.size());
    const double clutter = 1.0 / init.rho_max;

    double prev_ll = -std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < max_iters; ++iter) {
        LfmParams& p = result.params;
        double resp_sum = 0.0, weighted_d2 = 0.0, ll = 0.0;
        for (double d : distances) {
            const double hit = p.p_hit * normal_pdf(d, p.sigma_lfm);
            const double rnd = p.p_random * clutter;
            const double total = std::max(hit + rnd, kDensityFloor);
            const double resp = hit / total;
            resp_sum += resp;
            weighted_d2 += resp * d * d;
            ll += std::log(total);
        }
        result.log_likelihood.push_back(ll);

        p.p_hit = resp_sum / n;
        p.p_random = 1.0 - p.p_hit;
        if (resp_sum > 1e-12)
            p.sigma_lfm = std::max(std::sqrt(weighted_d2 / resp_sum), 1e-3);

        if (iter > 0 && ll - prev_ll < tol) {
            result.converged = true;
            break;
        }
        prev_ll = ll;
    }
    return result;
}

EmFitResult fit_lfm_em(const std::vector<std::pair<Pose, RadarScan>>& dataset, const Chart& chart,
                       const LfmParams& init, double tol, int max_iters, double sample_spacing) {
    if (dataset.empty())
        throw std::invalid_argument("fit_lfm_em: empty data set");
    std::vector<double> distances;
    for (const auto& [pose, scan] : dataset) {
        const ShorelineSamples samples =
            extract_shoreline(chart, pose.position, init.rho_max + sample_spacing, sample_spacing);
        for (const auto& z : scan.observations) {
            const GeodeticPoint endpoint = observation_to_geo(z, pose);
            distances.push_back(samples.min_distance(to_ned(endpoint, samples.origin())));
        }
    }
    return fit_lfm_em_distances(distances, init, tol, max_iters);
}

}  // namespace coastnav
