#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "coastnav/chart.hpp"
#include "coastnav/detect.hpp"
#include "coastnav/geodesy.hpp"
#include "coastnav/lfm.hpp"
#include "coastnav/radarsim.hpp"

// Mission simulation, GNSS fault injection (spoofing and jamming/outage),
// Monte Carlo detection-time studies and detector parameter tuning.

namespace coastnav {

enum class FaultKind { none, spoof, jam };

struct FaultSpec {
    FaultKind kind = FaultKind::none;
    double t_onset = 0.0;  // seconds
    double f_slope = 0.0;  // meters per minute (spoof only)
};

struct TrajectorySpec {
    std::vector<GeodeticPoint> waypoints;
    double speed = 5.0;                 // m/s
    double heading_smoothing_tau = 0.0;  // seconds; 0 disables smoothing
};

/// Constant-speed waypoint following sampled at `sample_period`; headings
/// follow the course, optionally first-order smoothed through turns.
std::vector<Pose> generate_trajectory(const TrajectorySpec& spec, double sample_period,
                                      std::vector<double>& times_out);

struct Mission {
    std::vector<double> times;  // strictly increasing, mean step = sample_period
    std::vector<Pose> truth;
    std::shared_ptr<const Chart> chart;
    RadarNoiseParams radar;
    LfmParams lfm;
    PsoConfig pso;
    FirstStageOptions first_stage;
    DetectorConfig detector;
    double sample_period = 4.96;  // seconds
    double gnss_noise_std = 0.0;  // meters, per NED axis
    std::uint64_t rng_seed = 0;
    // onset-placement margins for Monte Carlo studies; warmup < 0 means
    // "detector span plus one sample"
    double mc_warmup_margin_s = -1.0;
    double mc_tail_margin_s = 60.0;
};

struct TraceRow {
    double t = 0.0;
    double r = 0.0;
    std::optional<double> g_gauss, g_kde;
    bool exceeded_gauss = false, exceeded_kde = false;
    bool alarm = false;
    AlarmSource source = AlarmSource::none;
};

struct RunResult {
    std::vector<ResidualSample> residuals;
    std::vector<TraceRow> trace;
    // first threshold crossings at or after the fault onset
    std::optional<double> t_d_gauss, t_d_kde, t_d_combined;  // seconds since onset
    FaultSpec fault;
    double t_end = 0.0;  // last mission timestamp
};

/// Corrupt a GNSS track: spoofing adds a cross-track error growing at
/// f_slope meters/minute perpendicular-left of the instantaneous course;
/// jamming freezes the track at its onset value.
std::vector<GeodeticPoint> inject_fault(const std::vector<double>& times,
                                        const std::vector<GeodeticPoint>& gnss_track,
                                        const std::vector<Pose>& truth, const FaultSpec& spec);

/// Closed-loop run: per timestep a scan is synthesized at the true pose, the
/// first stage runs seeded by the corrupted GNSS pose, the residual between
/// the corrupted GNSS and the radar estimate is fed to the combined detector.
RunResult run_mission(const Mission& m, const FaultSpec& spec);

/// Onset times drawn uniformly over the mission span minus the configured
/// warm-up and tail margins.
std::vector<double> draw_onsets(const Mission& m, int n, std::uint64_t seed);

/// n independent seeded runs of `m` with onsets from draw_onsets. Runs
/// execute in parallel (`jobs` threads, 0 = hardware) but results are
/// independent of the parallelism degree.
std::vector<RunResult> monte_carlo(const Mission& m, const FaultSpec& spec_template, int n,
                                   std::uint64_t seed, int jobs = 0);

enum class DetectorKind { gauss, kde, combined };

/// J = sum of squared detection times; missed detections are penalized with
/// the remaining mission duration after onset.
double performance_index(std::span<const RunResult> runs, DetectorKind kind);

struct DetectorGrid {
    std::vector<int> mu, lambda, gap;
    std::vector<double> h;
};

struct TuneResult {
    DetectorConfig best_gauss;  // h carried along but unused by the Gaussian GLRT
    DetectorConfig best_kde;
    double j_gauss = 0.0;
    double j_kde = 0.0;
};

/// A residual stream plus the onset of the injected fault (nullopt = H0).
struct ResidualStream {
    std::vector<ResidualSample> samples;
    std::optional<double> t_onset;
};

/// Grid tuner over prepared residual streams: per configuration, thresholds
/// are calibrated on the H0 streams at p_fa and J is accumulated over the
/// fault streams. Ties break toward smaller mu, then lambda, then gap, then h.
TuneResult tune_on_streams(const std::vector<ResidualStream>& h0_streams,
                           const std::vector<ResidualStream>& fault_streams,
                           const DetectorGrid& grid, double p_fa, double t_end);

/// Mission-level tuner: simulates the H0 and fault residual streams once,
/// then evaluates the whole grid on them.
TuneResult tune_detector(const Mission& m, const FaultSpec& spec_template,
                         const DetectorGrid& grid, int n_per_point, std::uint64_t seed,
                         int n_h0 = 4, double p_fa = 1e-3, int jobs = 0);

/// Sliding-window GLRT statistics over a whole residual series (one value
/// per step once the windows fill).
struct GlrtSeries {
    std::vector<double> t;
    std::vector<double> g_gauss;
    std::vector<double> g_kde;
};
GlrtSeries glrt_series(std::span<const ResidualSample> samples, const DetectorConfig& config);

// --- stream / trace file formats ---

void write_residual_csv(const std::filesystem::path& path,
                        std::span<const ResidualSample> samples);
std::vector<ResidualSample> read_residual_csv(const std::filesystem::path& path);

/// Columns: t_s, r_m, g_gauss, g_kde, alarm, source.
void write_trace_csv(const std::filesystem::path& path, std::span<const TraceRow> trace);

}  // namespace coastnav
