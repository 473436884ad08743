#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "coastnav/chart.hpp"
#include "coastnav/geodesy.hpp"

// Forward model producing synthetic radar scans and static-target detections
// from a true pose and a chart. Pose is held constant over a scan.

namespace coastnav {

struct RadarObservation {
    double range = 0.0;    // meters, (0, rho_max]
    double bearing = 0.0;  // radians clockwise from heading, [0, 2*pi)
};

struct RadarScan {
    std::vector<RadarObservation> observations;
    double rho_max = 0.0;
    double timestamp = 0.0;  // seconds
};

struct RadarNoiseParams {
    double p_detect = 1.0;
    double sigma_range = 0.0;          // meters
    double sigma_bearing = 0.0;        // radians, applies to static-target detections
    double p_clutter_per_spoke = 0.0;
    int n_spokes = 360;
    double rho_max = 5000.0;           // meters
};

/// A tracked zero-velocity radar feature (candidate buoy) with the noise
/// variances it was generated with.
struct StaticTarget {
    double range = 0.0;
    double bearing = 0.0;
    double range_var = 0.0;    // meters^2
    double bearing_var = 0.0;  // radians^2
};

/// One full scan: per spoke, the nearest in-range shoreline sample binned to
/// that spoke gives a detection with probability p_detect (range noise added,
/// clamped to (0, rho_max]); each spoke additionally emits a clutter return
/// with probability p_clutter_per_spoke, uniform over (0, rho_max].
RadarScan cast_scan(const Pose& true_pose, const ShorelineSamples& samples,
                    const RadarNoiseParams& noise, std::uint64_t rng_seed,
                    double timestamp = 0.0);

/// Landmarks within rho_max are each detected with probability p_detect and
/// reported in (range, bearing) relative to the true pose with independent
/// Gaussian noise; the reported variances are the generating variances.
std::vector<StaticTarget> detect_static_targets(const Pose& true_pose,
                                                const std::vector<Landmark>& landmarks,
                                                const RadarNoiseParams& noise,
                                                std::uint64_t rng_seed);

/// Scan dump, columns: spoke_index, range_m, bearing_rad.
void write_scan_csv(const std::filesystem::path& path, const RadarScan& scan, int n_spokes);
RadarScan read_scan_csv(const std::filesystem::path& path, double rho_max);

}  // namespace coastnav
