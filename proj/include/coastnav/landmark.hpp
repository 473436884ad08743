#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "coastnav/chart.hpp"
#include "coastnav/geodesy.hpp"
#include "coastnav/lfm.hpp"
#include "coastnav/radarsim.hpp"

// Second-stage estimator: gate-and-associate detected static targets to chart
// landmarks, resect heading and position from an associated pair, propagate
// measurement uncertainty and fuse the redundant position estimates.

namespace coastnav {

struct AssociationPair {
    std::size_t target_index = 0;
    std::string landmark_id;
    double distance = 0.0;  // gate distance xi, meters
};

/// One-to-one target-to-landmark assignment (greedy nearest-neighbor).
struct Association {
    std::vector<AssociationPair> pairs;
};

/// Relative geometry of an associated pair (i, j).
struct PairGeometry {
    double range_ratio = 0.0;         // r_ji = rho_j / rho_i
    double bearing_diff = 0.0;        // beta_ji = beta_j - beta_i, (-pi, pi]
    double separation = 0.0;          // d_ij, meters between landmarks
    double separation_azimuth = 0.0;  // a_ij, angle of l_i - l_j from true north
};

struct HeadingEstimate {
    double mean = 0.0;  // radians, (-pi, pi]
    double var = 0.0;   // radians^2
};

/// Nearest-landmark association with an upper gate: each target is converted
/// to NED via the prior and matched greedily by ascending distance, one
/// landmark claimed at most once, pairs beyond `gate` excluded.
Association associate(const std::vector<StaticTarget>& targets,
                      const std::vector<Landmark>& landmarks, const Pose& prior, double gate);

/// Range ratio, bearing difference and landmark-pair baseline for targets
/// (zi, zj) associated to landmarks (li, lj). Throws on coincident landmarks.
PairGeometry pair_geometry(const StaticTarget& zi, const StaticTarget& zj, const Landmark& li,
                           const Landmark& lj, const GeodeticPoint& origin);

/// Triangulated own-ship heading from one pair:
/// psi = atan2(r*sin(beta_ji), 1 - r*cos(beta_ji)) + a_ij - beta_i, wrapped.
/// Throws on degenerate geometry (coincident apparent targets).
double heading_from_pair(const PairGeometry& g, double beta_i);

/// Own-ship position resected from one target and its landmark at a known
/// heading: the landmark-frame offset -rho at azimuth (beta + psi).
GeodeticPoint position_from_target(const StaticTarget& z, const Landmark& l, double psi_hat);

/// Gaussian approximation of the triangulated heading. The range ratio is
/// approximated as a Gaussian (valid while sigma_rho/mu_rho < 1 for both
/// ranges, rejected otherwise) and the heading map is expanded to 2nd order.
HeadingEstimate heading_variance(const PairGeometry& g, double var_rho_i, double var_rho_j,
                                 double var_beta_i, double var_beta_j, double mu_rho_i,
                                 double mu_rho_j, double mu_beta_i, double mu_beta_j);

/// First-order covariance of position_from_target under independent noise on
/// (rho, beta, psi_hat). Result is in the NED frame at the landmark.
Eigen::Matrix2d position_covariance(const StaticTarget& z, const HeadingEstimate& psi);

struct PositionEstimate {
    GeodeticPoint mean;
    Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();  // meters^2, NED
};

/// Information-form fusion of Gaussian position estimates in a shared NED
/// frame. Singular covariances are regularized by 1e-6 * I; throws if still
/// singular. Requires at least one estimate.
PositionEstimate fuse(const std::vector<PositionEstimate>& estimates);

/// Full second stage: associate, pick the widest-separation pair for heading,
/// resect a position per associated landmark, fuse. Unavailable (not an
/// error) with fewer than two associations or when the first stage is not
/// available.
PoseEstimate estimate_second_stage(const std::vector<StaticTarget>& targets, const Chart& chart,
                                   const PoseEstimate& first_stage, double gate);

// Analytic derivatives of the heading map f(r, beta) =
// atan2(r*sin(beta), 1 - r*cos(beta)), exposed for verification against
// finite differences.
Eigen::Vector2d heading_map_gradient(double r, double beta);
Eigen::Matrix2d heading_map_hessian(double r, double beta);
double heading_map(double r, double beta);

}  // namespace coastnav
