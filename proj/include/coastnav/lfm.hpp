#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "coastnav/chart.hpp"
#include "coastnav/geodesy.hpp"
#include "coastnav/radarsim.hpp"

// First-stage estimator: likelihood field model over shoreline distance,
// scan log-likelihood, EM parameter fitting and PSO maximization of the
// pose-offset likelihood around a prior.

namespace coastnav {

/// Mixture parameters of the likelihood field model. p_hit + p_random = 1.
struct LfmParams {
    double p_hit = 0.9;
    double p_random = 0.1;
    double sigma_lfm = 25.0;  // meters
    double rho_max = 5000.0;  // meters

    void validate() const;
};

/// Offset applied to a prior pose: NED meters plus heading correction.
struct PoseOffset {
    double dn = 0.0;
    double de = 0.0;
    double dpsi = 0.0;
};

/// `prior` shifted by `offset` (NED shift at the prior position, heading wrapped).
Pose apply_offset(const Pose& prior, const PoseOffset& offset);

struct PsoConfig {
    int n_particles = 32;
    int n_iters = 60;
    double inertia = 0.72;
    double cognitive = 1.49;
    double social = 1.49;
    PoseOffset bound_lower{-350.0, -350.0, -0.2};
    PoseOffset bound_upper{350.0, 350.0, 0.2};
    std::uint64_t rng_seed = 0;
};

enum class EstimateStage { first, second };

/// Gaussian pose posterior. Covariance blocks are meters^2 / m*rad / rad^2
/// over (north, east, heading). `available` is a value, not an error: the
/// estimator reports when its operating conditions are not met.
struct PoseEstimate {
    Pose mean;
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    EstimateStage stage = EstimateStage::first;
    bool available = false;
    // near-zero objective curvature along an axis (featureless-coast ridge)
    bool ridge_north = false;
    bool ridge_east = false;
};

/// World-frame endpoint of a radar observation taken at `pose`.
GeodeticPoint observation_to_geo(const RadarObservation& z, const Pose& pose);

/// Likelihood of one observation: p_hit * N(D; 0, sigma_lfm) + p_random / rho_max,
/// where D is the distance from the observation endpoint to the nearest
/// shoreline sample and N is the univariate normal density.
double likelihood(const RadarObservation& z, const Pose& pose, const ShorelineSamples& samples,
                  const LfmParams& params);

/// Sum of per-observation log-likelihoods. Throws on an empty scan.
double scan_log_likelihood(const RadarScan& scan, const Pose& pose,
                           const ShorelineSamples& samples, const LfmParams& params);

struct PsoResult {
    PoseOffset argmax;
    double value = 0.0;
};

/// Global maximization of `objective` over the configured box. Deterministic
/// given the seed; with n_iters = 0 the best initial particle is returned.
PsoResult pso_maximize(const std::function<double(const PoseOffset&)>& objective,
                       const PsoConfig& config);

struct FirstStageOptions {
    double sample_spacing = 5.0;   // shoreline densification step, meters
    double position_std = 61.0;    // calibrated output std, meters
    double heading_std = 0.03;     // calibrated output std, radians
    double ridge_rel_curvature = 0.05;  // axis flagged below this fraction of max curvature
};

/// Maximum-likelihood pose offset around `prior` from one scan. Unavailable
/// (not an error) when no shoreline is within radar range of the prior or
/// the scan is empty.
PoseEstimate estimate_first_stage(const RadarScan& scan, const Pose& prior, const Chart& chart,
                                  const LfmParams& params, const PsoConfig& pso,
                                  const FirstStageOptions& options = {});

struct EmFitResult {
    LfmParams params;
    bool converged = false;
    std::vector<double> log_likelihood;  // one entry per iteration, non-decreasing
};

/// EM fit of (p_hit, p_random, sigma_lfm) from precomputed endpoint-to-shoreline
/// distances of a ground-truth data set.
EmFitResult fit_lfm_em_distances(const std::vector<double>& distances, const LfmParams& init,
                                 double tol, int max_iters);

/// EM fit from paired ground-truth poses and scans against a chart.
EmFitResult fit_lfm_em(const std::vector<std::pair<Pose, RadarScan>>& dataset, const Chart& chart,
                       const LfmParams& init, double tol, int max_iters,
                       double sample_spacing = 5.0);

}  // namespace coastnav
