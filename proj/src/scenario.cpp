#include "coastnav/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <stdexcept>
#include <thread>

#include "coastnav/rng.hpp"

namespace coastnav {

namespace {

const char* source_name(AlarmSource s) {
    switch (s) {
        case AlarmSource::gauss: return "gauss";
        case AlarmSource::kde: return "kde";
        case AlarmSource::both: return "both";
        default: return "none";
    }
}

int resolve_jobs(int jobs) {
    if (jobs > 0) return jobs;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

/// course of motion at sample k, from the truth track
double course_at(const std::vector<Pose>& truth, std::size_t k) {
    if (truth.size() < 2) return truth.empty() ? 0.0 : truth.front().heading;
    const std::size_t a = k + 1 < truth.size() ? k : truth.size() - 2;
    const NedPoint d = to_ned(truth[a + 1].position, truth[a].position);
    if (d.norm() < 1e-9) return truth[k].heading;
    return ned_azimuth(d);
}

}  // namespace

std::vector<Pose> generate_trajectory(const TrajectorySpec& spec, double sample_period,
                                      std::vector<double>& times_out) {
    if (spec.waypoints.size() < 2)
        throw std::invalid_argument("generate_trajectory: need at least 2 waypoints");
    if (!(spec.speed > 0.0) || !(sample_period > 0.0))
        throw std::invalid_argument("generate_trajectory: speed and sample period must be positive");

    const GeodeticPoint origin = spec.waypoints.front();
    std::vector<NedPoint> wp(spec.waypoints.size());
    for (std::size_t i = 0; i < wp.size(); ++i) wp[i] = to_ned(spec.waypoints[i], origin);

    std::vector<double> cum{0.0};
    for (std::size_t i = 0; i + 1 < wp.size(); ++i)
        cum.push_back(cum.back() + (wp[i + 1] - wp[i]).norm());
    const double total = cum.back();
    if (total <= 0.0) throw std::invalid_argument("generate_trajectory: zero-length path");

    std::vector<Pose> poses;
    times_out.clear();
    double heading = ned_azimuth(wp[1] - wp[0]);
    const int n_steps = static_cast<int>(std::floor(total / (spec.speed * sample_period)));
    for (int k = 0; k <= n_steps; ++k) {
        const double t = k * sample_period;
        const double s = spec.speed * t;
        std::size_t seg = 0;
        while (seg + 2 < wp.size() && cum[seg + 1] <= s) ++seg;
        const double seg_len = cum[seg + 1] - cum[seg];
        const double f = seg_len > 0.0 ? (s - cum[seg]) / seg_len : 0.0;
        const NedPoint pos = wp[seg] + f * (wp[seg + 1] - wp[seg]);
        const double course = ned_azimuth(wp[seg + 1] - wp[seg]);
        if (spec.heading_smoothing_tau > 0.0) {
            const double alpha = 1.0 - std::exp(-sample_period / spec.heading_smoothing_tau);
            heading = wrap_pi(heading + alpha * wrap_pi(course - heading));
        } else {
            heading = course;
        }
        poses.push_back({to_geo(pos, origin), heading});
        times_out.push_back(t);
    }
    return poses;
}

std::vector<GeodeticPoint> inject_fault(const std::vector<double>& times,
                                        const std::vector<GeodeticPoint>& gnss_track,
                                        const std::vector<Pose>& truth, const FaultSpec& spec) {
    if (times.size() != gnss_track.size())
        throw std::invalid_argument("inject_fault: times and track sizes differ");
    std::vector<GeodeticPoint> out = gnss_track;
    if (spec.kind == FaultKind::none) return out;

    if (spec.kind == FaultKind::jam) {
        std::size_t hold = 0;
        bool found = false;
        for (std::size_t k = 0; k < times.size(); ++k) {
            if (times[k] <= spec.t_onset) {
                hold = k;
                found = true;
            } else if (found) {
                out[k] = gnss_track[hold];
            }
        }
        return out;
    }

    // spoof: additive cross-track error, perpendicular-left of the course
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (times[k] < spec.t_onset) continue;
        const double f_k = spec.f_slope * (times[k] - spec.t_onset) / 60.0;
        const double left = course_at(truth, k) - kPi / 2.0;
        out[k] = to_geo(polar_to_ned(f_k, left), gnss_track[k]);
    }
    return out;
}

RunResult run_mission(const Mission& m, const FaultSpec& spec) {
    if (m.times.size() != m.truth.size() || m.times.empty())
        throw std::invalid_argument("run_mission: empty or inconsistent trajectory");
    if (!m.chart) throw std::invalid_argument("run_mission: mission has no chart");
    if (static_cast<int>(m.times.size()) < m.detector.span())
        throw std::invalid_argument("run_mission: trajectory shorter than the detector span");
    m.detector.validate();
    m.lfm.validate();

    const std::size_t n = m.times.size();

    // GNSS track: truth positions plus optional receiver noise
    std::vector<GeodeticPoint> gnss(n);
    {
        std::mt19937_64 rng(derive_seed(m.rng_seed, 0x6e55));
        std::normal_distribution<double> noise(0.0, 1.0);
        for (std::size_t k = 0; k < n; ++k) {
            NedPoint d{0.0, 0.0};
            if (m.gnss_noise_std > 0.0)
                d = {m.gnss_noise_std * noise(rng), m.gnss_noise_std * noise(rng)};
            gnss[k] = to_geo(d, m.truth[k].position);
        }
    }
    const std::vector<GeodeticPoint> corrupted = inject_fault(m.times, gnss, m.truth, spec);

    RunResult result;
    result.fault = spec;
    result.t_end = m.times.back();
    result.residuals.reserve(n);
    result.trace.reserve(n);

    DetectorState detector;
    GeodeticPoint x_r{};
    bool have_estimate = false;

    for (std::size_t k = 0; k < n; ++k) {
        const ShorelineSamples scan_samples =
            extract_shoreline(*m.chart, m.truth[k].position,
                              m.radar.rho_max + m.first_stage.sample_spacing,
                              m.first_stage.sample_spacing);
        const RadarScan scan = cast_scan(m.truth[k], scan_samples, m.radar,
                                         derive_seed(m.rng_seed, 0x5ca0 + k), m.times[k]);

        const Pose prior{corrupted[k], m.truth[k].heading};
        PsoConfig pso = m.pso;
        pso.rng_seed = derive_seed(m.rng_seed, 0x9500 + k);
        const PoseEstimate first =
            estimate_first_stage(scan, prior, *m.chart, m.lfm, pso, m.first_stage);
        if (first.available) {
            x_r = first.mean.position;
            have_estimate = true;
        } else if (!have_estimate) {
            x_r = prior.position;  // nothing better yet
        }

        const ResidualSample sample{m.times[k], residual(corrupted[k], x_r)};
        result.residuals.push_back(sample);
        detector.step(sample, m.detector);

        TraceRow row{sample.t,
                     sample.r,
                     detector.g_gauss(),
                     detector.g_kde(),
                     detector.exceeded_gauss(),
                     detector.exceeded_kde(),
                     detector.alarm(),
                     detector.source()};
        result.trace.push_back(row);

        if (spec.kind != FaultKind::none && sample.t >= spec.t_onset) {
            if (!result.t_d_gauss && row.exceeded_gauss)
                result.t_d_gauss = sample.t - spec.t_onset;
            if (!result.t_d_kde && row.exceeded_kde) result.t_d_kde = sample.t - spec.t_onset;
        }
    }

    if (result.t_d_gauss || result.t_d_kde)
        result.t_d_combined = std::min(result.t_d_gauss.value_or(
                                           std::numeric_limits<double>::infinity()),
                                       result.t_d_kde.value_or(
                                           std::numeric_limits<double>::infinity()));
    return result;
}

std::vector<double> draw_onsets(const Mission& m, int n, std::uint64_t seed) {
    if (m.times.empty()) throw std::invalid_argument("draw_onsets: empty mission");
    const double warmup = m.mc_warmup_margin_s >= 0.0
                              ? m.mc_warmup_margin_s
                              : (m.detector.span() + 1) * m.sample_period;
    const double lo = m.times.front() + warmup;
    const double hi = m.times.back() - m.mc_tail_margin_s;
    if (!(hi > lo))
        throw std::invalid_argument("draw_onsets: mission too short for the onset margins");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> onsets(n);
    for (auto& t : onsets) t = u(rng);
    return onsets;
}

std::vector<RunResult> monte_carlo(const Mission& m, const FaultSpec& spec_template, int n,
                                   std::uint64_t seed, int jobs) {
    if (n < 1) throw std::invalid_argument("monte_carlo: n must be >= 1");
    const std::vector<double> onsets =
        spec_template.kind == FaultKind::none ? std::vector<double>(n, 0.0)
                                              : draw_onsets(m, n, derive_seed(seed, 0x0575));

    std::vector<RunResult> results(n);
    std::atomic<int> next{0};
    auto worker = [&] {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= n) return;
            Mission run = m;
            run.rng_seed = derive_seed(seed, 0x20000 + static_cast<std::uint64_t>(i));
            FaultSpec spec = spec_template;
            if (spec.kind != FaultKind::none) spec.t_onset = onsets[i];
            results[i] = run_mission(run, spec);
        }
    };
    const int n_threads = std::min(resolve_jobs(jobs), n);
    std::vector<std::thread> pool;
    for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    return results;
}

double performance_index(std::span<const RunResult> runs, DetectorKind kind) {
    double j = 0.0;
    for (const auto& run : runs) {
        std::optional<double> td;
        switch (kind) {
            case DetectorKind::gauss: td = run.t_d_gauss; break;
            case DetectorKind::kde: td = run.t_d_kde; break;
            case DetectorKind::combined: td = run.t_d_combined; break;
        }
        const double value = td ? *td : run.t_end - run.fault.t_onset;
        j += value * value;
    }
    return j;
}

GlrtSeries glrt_series(std::span<const ResidualSample> samples, const DetectorConfig& config) {
    config.validate();
    GlrtSeries out;
    const int span = config.span();
    if (static_cast<int>(samples.size()) < span) return out;

    std::vector<double> r(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) r[i] = samples[i].r;

    for (std::size_t k = span - 1; k < samples.size(); ++k) {
        const std::size_t start = k + 1 - span;
        const std::span<const double> window_l(r.data() + start, config.lambda);
        const std::span<const double> window_m(r.data() + k + 1 - config.mu, config.mu);
        out.t.push_back(samples[k].t);
        out.g_gauss.push_back(gaussian_glrt(window_l, window_m));
        out.g_kde.push_back(kde_glrt(window_l, window_m, config.h, config.kde_leave_one_out));
    }
    return out;
}

namespace {

struct StreamEval {
    // detection time (since onset) of the first exceedance, or none
    static std::optional<double> detect(const GlrtSeries& series, const std::vector<double>& g,
                                        double gamma, double onset) {
        for (std::size_t i = 0; i < series.t.size(); ++i)
            if (series.t[i] >= onset && g[i] > gamma) return series.t[i] - onset;
        return std::nullopt;
    }
};

}  // namespace

TuneResult tune_on_streams(const std::vector<ResidualStream>& h0_streams,
                           const std::vector<ResidualStream>& fault_streams,
                           const DetectorGrid& grid, double p_fa, double t_end) {
    if (grid.mu.empty() || grid.lambda.empty() || grid.gap.empty())
        throw std::invalid_argument("tune_on_streams: empty grid");
    if (h0_streams.empty() || fault_streams.empty())
        throw std::invalid_argument("tune_on_streams: need H0 and fault streams");
    const std::vector<double> h_values = grid.h.empty() ? std::vector<double>{10.0} : grid.h;

    bool have_gauss = false, have_kde = false;
    TuneResult best;

    for (int mu : grid.mu) {
        for (int lambda : grid.lambda) {
            for (int gap : grid.gap) {
                for (std::size_t hi = 0; hi < h_values.size(); ++hi) {
                    DetectorConfig cfg;
                    cfg.mu = mu;
                    cfg.lambda = lambda;
                    cfg.gap = gap;
                    cfg.h = h_values[hi];

                    std::vector<GlrtSeries> h0(h0_streams.size()), faulty(fault_streams.size());
                    for (std::size_t i = 0; i < h0_streams.size(); ++i)
                        h0[i] = glrt_series(h0_streams[i].samples, cfg);
                    for (std::size_t i = 0; i < fault_streams.size(); ++i)
                        faulty[i] = glrt_series(fault_streams[i].samples, cfg);

                    std::vector<double> g0_gauss, g0_kde;
                    for (const auto& s : h0) {
                        g0_gauss.insert(g0_gauss.end(), s.g_gauss.begin(), s.g_gauss.end());
                        g0_kde.insert(g0_kde.end(), s.g_kde.begin(), s.g_kde.end());
                    }
                    if (g0_gauss.empty())
                        throw std::invalid_argument("tune_on_streams: H0 streams shorter than span");
                    const double gamma_gauss = calibrate_threshold(g0_gauss, p_fa).gamma;
                    const double gamma_kde = calibrate_threshold(g0_kde, p_fa).gamma;

                    double j_gauss = 0.0, j_kde = 0.0;
                    for (std::size_t i = 0; i < fault_streams.size(); ++i) {
                        const double onset = fault_streams[i].t_onset.value_or(0.0);
                        const auto td_g =
                            StreamEval::detect(faulty[i], faulty[i].g_gauss, gamma_gauss, onset);
                        const auto td_k =
                            StreamEval::detect(faulty[i], faulty[i].g_kde, gamma_kde, onset);
                        const double pg = td_g ? *td_g : t_end - onset;
                        const double pk = td_k ? *td_k : t_end - onset;
                        j_gauss += pg * pg;
                        j_kde += pk * pk;
                    }

                    // the Gaussian detector ignores h: only score it once per (mu, lambda, gap)
                    if (hi == 0 && (!have_gauss || j_gauss < best.j_gauss)) {
                        have_gauss = true;
                        best.j_gauss = j_gauss;
                        best.best_gauss = cfg;
                        best.best_gauss.gamma_gauss = gamma_gauss;
                    }
                    if (!have_kde || j_kde < best.j_kde) {
                        have_kde = true;
                        best.j_kde = j_kde;
                        best.best_kde = cfg;
                        best.best_kde.gamma_kde = gamma_kde;
                    }
                }
            }
        }
    }
    return best;
}

TuneResult tune_detector(const Mission& m, const FaultSpec& spec_template,
                         const DetectorGrid& grid, int n_per_point, std::uint64_t seed, int n_h0,
                         double p_fa, int jobs) {
    // residual streams do not depend on the detector parameters, so they are
    // simulated once and the whole grid is evaluated on them
    std::vector<ResidualStream> h0;
    {
        FaultSpec none;
        const std::vector<RunResult> runs = monte_carlo(m, none, n_h0, derive_seed(seed, 1), jobs);
        for (const auto& run : runs) h0.push_back({run.residuals, std::nullopt});
    }
    std::vector<ResidualStream> faulty;
    {
        const std::vector<RunResult> runs =
            monte_carlo(m, spec_template, n_per_point, derive_seed(seed, 2), jobs);
        for (const auto& run : runs) faulty.push_back({run.residuals, run.fault.t_onset});
    }
    return tune_on_streams(h0, faulty, grid, p_fa, m.times.back());
}

void write_residual_csv(const std::filesystem::path& path,
                        std::span<const ResidualSample> samples) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "t_s,r_m\n";
    char line[64];
    for (const auto& s : samples) {
        std::snprintf(line, sizeof(line), "%.9g,%.9g\n", s.t, s.r);
        out << line;
    }
}

std::vector<ResidualSample> read_residual_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::vector<ResidualSample> samples;
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ResidualSample s;
        if (std::sscanf(line.c_str(), "%lf,%lf", &s.t, &s.r) != 2)
            throw std::runtime_error("bad residual row in " + path.string() + ": " + line);
        samples.push_back(s);
    }
    return samples;
}

void write_trace_csv(const std::filesystem::path& path, std::span<const TraceRow> trace) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "t_s,r_m,g_gauss,g_kde,alarm,source\n";
    char line[160];
    for (const auto& row : trace) {
        std::snprintf(line, sizeof(line), "%.9g,%.9g,%.9g,%.9g,%d,%s\n", row.t, row.r,
                      row.g_gauss.value_or(std::numeric_limits<double>::quiet_NaN()),
                      row.g_kde.value_or(std::numeric_limits<double>::quiet_NaN()),
                      row.alarm ? 1 : 0, source_name(row.source));
        out << line;
    }
}

}  // namespace coastnav
