#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "coastnav/scenario.hpp"

// JSON mission configuration shared by the CLI and tests. See README.md for
// the schema; unknown keys are rejected nowhere, missing keys take defaults.

namespace coastnav {

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct MissionConfig {
    Mission mission;
    FaultSpec fault;
    double p_fa = 1e-3;           // threshold calibration target
    std::string dataset_dir;      // fit-lfm input directory (optional)
    double em_tol = 1e-6;
    int em_max_iters = 200;
};

MissionConfig load_mission_config(const std::filesystem::path& path);

/// Parse from JSON text; `base_dir` resolves relative chart/dataset paths.
MissionConfig parse_mission_config(const std::string& text,
                                   const std::filesystem::path& base_dir);

DetectorGrid load_detector_grid(const std::filesystem::path& path);

/// Paired ground-truth files "<stem>_pose.csv" (header lat_deg,lon_deg,
/// heading_deg, one row) and "<stem>_scan.csv" (scan dump format).
std::vector<std::pair<Pose, RadarScan>> load_lfm_dataset(const std::filesystem::path& dir,
                                                         double rho_max);

void write_pose_csv(const std::filesystem::path& path, const Pose& pose);

}  // namespace coastnav
