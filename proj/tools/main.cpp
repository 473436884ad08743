// coastnav CLI: mission simulation, Monte Carlo studies, detector tuning,
// LFM parameter fitting and threshold calibration. All outputs are CSV/JSON
// with stable schemas; figures are left to external tools.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "coastnav/mission_config.hpp"
#include "coastnav/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace coastnav;

namespace {

ordered_json opt_num(const std::optional<double>& v) {
    return v ? ordered_json(*v) : ordered_json(nullptr);
}

double quantile(std::vector<double> v, double q) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const double idx = q * (v.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(idx);
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (idx - lo) * (v[hi] - v[lo]);
}

ordered_json run_summary(const RunResult& run) {
    ordered_json j;
    j["t_onset_s"] = run.fault.kind == FaultKind::none ? ordered_json(nullptr)
                                                       : ordered_json(run.fault.t_onset);
    j["t_d_gauss_s"] = opt_num(run.t_d_gauss);
    j["t_d_kde_s"] = opt_num(run.t_d_kde);
    j["t_d_combined_s"] = opt_num(run.t_d_combined);
    if (run.fault.kind == FaultKind::none) {
        j["J_contribution"] = nullptr;
    } else {
        const double td = run.t_d_combined.value_or(run.t_end - run.fault.t_onset);
        j["J_contribution"] = td * td;
    }
    return j;
}

void write_json(const fs::path& path, const ordered_json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << j.dump(2) << "\n";
}

ordered_json detector_json(const DetectorConfig& c, bool with_kde_fields) {
    ordered_json j;
    j["lambda"] = c.lambda;
    j["mu"] = c.mu;
    j["gap"] = c.gap;
    if (with_kde_fields) {
        j["h_m"] = c.h;
        j["gamma_kde"] = c.gamma_kde;
    } else {
        j["gamma_gauss"] = c.gamma_gauss;
    }
    return j;
}

int cmd_simulate(const MissionConfig& cfg, const fs::path& out_dir) {
    const RunResult run = run_mission(cfg.mission, cfg.fault);
    write_trace_csv(out_dir / "trace.csv", run.trace);
    write_residual_csv(out_dir / "residual.csv", run.residuals);
    write_json(out_dir / "summary.json", run_summary(run));
    std::cout << "simulate: " << run.trace.size() << " steps -> " << (out_dir / "summary.json")
              << "\n";
    return 0;
}

int cmd_mc(const MissionConfig& cfg, const fs::path& out_dir, int n, int jobs,
           std::uint64_t seed) {
    const std::vector<RunResult> runs = monte_carlo(cfg.mission, cfg.fault, n, seed, jobs);

    ordered_json aggregate;
    aggregate["n"] = n;
    aggregate["seed"] = seed;
    aggregate["J_gauss"] = performance_index(runs, DetectorKind::gauss);
    aggregate["J_kde"] = performance_index(runs, DetectorKind::kde);
    aggregate["J_combined"] = performance_index(runs, DetectorKind::combined);

    std::vector<double> td_g, td_k, td_c;
    int beats_gauss = 0, beats_kde = 0, detected = 0;
    for (const auto& run : runs) {
        if (run.t_d_gauss) td_g.push_back(*run.t_d_gauss);
        if (run.t_d_kde) td_k.push_back(*run.t_d_kde);
        if (run.t_d_combined) {
            td_c.push_back(*run.t_d_combined);
            ++detected;
            if (!run.t_d_gauss || *run.t_d_combined < *run.t_d_gauss) ++beats_gauss;
            if (!run.t_d_kde || *run.t_d_combined < *run.t_d_kde) ++beats_kde;
        }
    }
    auto quantiles = [](const std::vector<double>& v) {
        ordered_json q;
        q["p10"] = quantile(v, 0.10);
        q["p50"] = quantile(v, 0.50);
        q["p90"] = quantile(v, 0.90);
        return q;
    };
    aggregate["detected"] = detected;
    aggregate["t_d_quantiles_s"] = {{"gauss", quantiles(td_g)},
                                    {"kde", quantiles(td_k)},
                                    {"combined", quantiles(td_c)}};
    aggregate["frac_combined_beats_gauss"] = detected ? double(beats_gauss) / detected : 0.0;
    aggregate["frac_combined_beats_kde"] = detected ? double(beats_kde) / detected : 0.0;

    ordered_json per_run = ordered_json::array();
    for (std::size_t i = 0; i < runs.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "run_%03zu.json", i);
        write_json(out_dir / name, run_summary(runs[i]));
        per_run.push_back(run_summary(runs[i]));
    }
    aggregate["runs"] = per_run;
    write_json(out_dir / "aggregate.json", aggregate);
    std::cout << "mc: " << n << " runs -> " << (out_dir / "aggregate.json") << "\n";
    return 0;
}

int cmd_tune(const MissionConfig& cfg, const fs::path& out_dir, const fs::path& grid_path,
             int n, int jobs, std::uint64_t seed) {
    const DetectorGrid grid = load_detector_grid(grid_path);
    if (cfg.fault.kind == FaultKind::none)
        throw ConfigError("tune: config must specify a spoof or jam fault template");
    const TuneResult result =
        tune_detector(cfg.mission, cfg.fault, grid, n, seed, 4, cfg.p_fa, jobs);

    ordered_json j;
    j["p_fa"] = cfg.p_fa;
    j["n_per_point"] = n;
    j["gauss"] = detector_json(result.best_gauss, false);
    j["gauss"]["J"] = result.j_gauss;
    j["kde"] = detector_json(result.best_kde, true);
    j["kde"]["J"] = result.j_kde;
    write_json(out_dir / "tuned.json", j);
    std::cout << "tune: -> " << (out_dir / "tuned.json") << "\n";
    return 0;
}

int cmd_fit_lfm(const MissionConfig& cfg, const fs::path& out_dir) {
    if (cfg.dataset_dir.empty()) throw ConfigError("fit-lfm: config needs dataset_dir");
    const auto dataset = load_lfm_dataset(cfg.dataset_dir, cfg.mission.lfm.rho_max);
    const EmFitResult fit = fit_lfm_em(dataset, *cfg.mission.chart, cfg.mission.lfm, cfg.em_tol,
                                       cfg.em_max_iters, cfg.mission.first_stage.sample_spacing);

    ordered_json j;
    j["p_hit"] = fit.params.p_hit;
    j["p_random"] = fit.params.p_random;
    j["sigma_lfm_m"] = fit.params.sigma_lfm;
    j["rho_max_m"] = fit.params.rho_max;
    j["converged"] = fit.converged;
    j["n_iterations"] = fit.log_likelihood.size();
    j["final_log_likelihood"] =
        fit.log_likelihood.empty() ? 0.0 : fit.log_likelihood.back();
    write_json(out_dir / "lfm_params.json", j);
    std::cout << "fit-lfm: " << dataset.size() << " pairs -> " << (out_dir / "lfm_params.json")
              << "\n";
    return 0;
}

int cmd_calibrate(const MissionConfig& cfg, const fs::path& out_dir, double p_fa,
                  std::uint64_t seed) {
    Mission m = cfg.mission;
    m.rng_seed = seed;
    FaultSpec none;
    const RunResult run = run_mission(m, none);
    const GlrtSeries series = glrt_series(run.residuals, m.detector);
    if (series.t.empty()) throw ConfigError("calibrate: mission shorter than the detector span");

    const Threshold tg = calibrate_threshold(series.g_gauss, p_fa);
    const Threshold tk = calibrate_threshold(series.g_kde, p_fa);

    ordered_json j;
    j["p_fa"] = p_fa;
    j["n_samples"] = series.t.size();
    j["gamma_gauss"] = tg.gamma;
    j["gamma_kde"] = tk.gamma;
    j["extrapolated_gauss"] = tg.extrapolated;
    j["extrapolated_kde"] = tk.extrapolated;
    write_json(out_dir / "thresholds.json", j);
    std::cout << "calibrate: " << series.t.size() << " H0 statistics -> "
              << (out_dir / "thresholds.json") << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"GNSS-independent coastal navigation simulator and spoofing detector"};
    app.require_subcommand(1);

    std::string config_path, out_dir = ".", grid_path;
    std::optional<std::uint64_t> seed_override;
    int jobs = 0, n = 100;
    double p_fa = 1e-3;

    app.add_option("--config", config_path, "mission config JSON")->required();
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--seed", seed_override, "override the config seed");
    app.add_option("--jobs", jobs, "worker threads (0 = all cores)");

    CLI::App* simulate = app.add_subcommand("simulate", "single mission run");
    CLI::App* mc = app.add_subcommand("mc", "Monte Carlo detection-time study");
    mc->add_option("--n", n, "number of runs");
    CLI::App* tune = app.add_subcommand("tune", "detector parameter grid search");
    tune->add_option("--grid", grid_path, "grid JSON")->required();
    tune->add_option("--n", n, "fault realizations per grid point");
    CLI::App* fit = app.add_subcommand("fit-lfm", "EM fit of the LFM parameters");
    CLI::App* calibrate = app.add_subcommand("calibrate", "ECDF threshold calibration on an H0 run");
    calibrate->add_option("--p-fa", p_fa, "false-alarm probability");

    CLI11_PARSE(app, argc, argv);

    try {
        MissionConfig cfg = load_mission_config(config_path);
        if (seed_override) cfg.mission.rng_seed = *seed_override;
        const std::uint64_t seed = cfg.mission.rng_seed;

        std::error_code ec;
        fs::create_directories(out_dir, ec);
        if (!fs::is_directory(out_dir)) {
            std::cerr << "error: cannot create output directory " << out_dir << "\n";
            return 1;
        }

        if (simulate->parsed()) return cmd_simulate(cfg, out_dir);
        if (mc->parsed()) return cmd_mc(cfg, out_dir, n, jobs, seed);
        if (tune->parsed()) return cmd_tune(cfg, out_dir, grid_path, n, jobs, seed);
        if (fit->parsed()) return cmd_fit_lfm(cfg, out_dir);
        if (calibrate->parsed()) return cmd_calibrate(cfg, out_dir, p_fa, seed);
        return 1;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const ChartError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return 2;
    }
}
