#include "coastnav/mission_config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace coastnav {

namespace {

using nlohmann::json;

double num(const json& j, const char* key, double fallback) {
    return j.contains(key) ? j.at(key).get<double>() : fallback;
}

int num_int(const json& j, const char* key, int fallback) {
    return j.contains(key) ? j.at(key).get<int>() : fallback;
}

}  // namespace

MissionConfig parse_mission_config(const std::string& text, const std::filesystem::path& base_dir) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    MissionConfig cfg;
    Mission& m = cfg.mission;

    try {
        if (!doc.contains("chart_path")) throw ConfigError("config: missing chart_path");
        std::filesystem::path chart_path = doc["chart_path"].get<std::string>();
        if (chart_path.is_relative()) chart_path = base_dir / chart_path;
        m.chart = std::make_shared<Chart>(load_chart(chart_path));

        m.sample_period = num(doc, "sample_period_s", 4.96);
        m.gnss_noise_std = num(doc, "gnss_noise_std_m", 0.0);
        m.rng_seed = doc.contains("seed") ? doc["seed"].get<std::uint64_t>() : 0;
        m.mc_warmup_margin_s = num(doc, "mc_warmup_margin_s", -1.0);
        m.mc_tail_margin_s = num(doc, "mc_tail_margin_s", 60.0);

        if (!doc.contains("trajectory")) throw ConfigError("config: missing trajectory");
        const json& traj = doc["trajectory"];
        if (traj.contains("waypoints")) {
            TrajectorySpec spec;
            for (const auto& wp : traj["waypoints"]) {
                if (!wp.is_array() || wp.size() != 2)
                    throw ConfigError("config: waypoint must be [lon_deg, lat_deg]");
                spec.waypoints.push_back(
                    {deg_to_rad(wp[1].get<double>()), deg_to_rad(wp[0].get<double>())});
            }
            spec.speed = num(traj, "speed_mps", 5.0);
            spec.heading_smoothing_tau = num(traj, "heading_smoothing_tau_s", 0.0);
            m.truth = generate_trajectory(spec, m.sample_period, m.times);
            if (traj.contains("duration_s")) {
                const double cap = traj["duration_s"].get<double>();
                while (!m.times.empty() && m.times.back() > cap) {
                    m.times.pop_back();
                    m.truth.pop_back();
                }
            }
        } else if (traj.contains("samples")) {
            for (const auto& s : traj["samples"]) {
                m.times.push_back(s.at("t_s").get<double>());
                m.truth.push_back({{deg_to_rad(s.at("lat_deg").get<double>()),
                                    deg_to_rad(s.at("lon_deg").get<double>())},
                                   deg_to_rad(s.value("heading_deg", 0.0))});
            }
        } else {
            throw ConfigError("config: trajectory needs waypoints or samples");
        }

        if (doc.contains("radar")) {
            const json& r = doc["radar"];
            m.radar.p_detect = num(r, "p_detect", 1.0);
            m.radar.sigma_range = num(r, "sigma_range_m", 0.0);
            m.radar.sigma_bearing = num(r, "sigma_bearing_rad", 0.0);
            m.radar.p_clutter_per_spoke = num(r, "p_clutter_per_spoke", 0.0);
            m.radar.n_spokes = num_int(r, "n_spokes", 360);
            m.radar.rho_max = num(r, "rho_max_m", 5000.0);
        }

        if (doc.contains("lfm")) {
            const json& l = doc["lfm"];
            m.lfm.p_hit = num(l, "p_hit", 0.9);
            m.lfm.p_random = num(l, "p_random", 1.0 - m.lfm.p_hit);
            m.lfm.sigma_lfm = num(l, "sigma_lfm_m", 25.0);
            m.lfm.rho_max = m.radar.rho_max;
            m.first_stage.sample_spacing = num(l, "sample_spacing_m", 5.0);
            m.first_stage.position_std = num(l, "first_stage_pos_std_m", 61.0);
            m.first_stage.heading_std = num(l, "first_stage_heading_std_rad", 0.03);
            if (l.contains("pso")) {
                const json& p = l["pso"];
                m.pso.n_particles = num_int(p, "n_particles", 32);
                m.pso.n_iters = num_int(p, "n_iters", 60);
                m.pso.inertia = num(p, "inertia", 0.72);
                m.pso.cognitive = num(p, "cognitive", 1.49);
                m.pso.social = num(p, "social", 1.49);
                if (p.contains("bounds")) {
                    const json& b = p["bounds"];
                    const double dn = num(b, "dn_m", 350.0);
                    const double de = num(b, "de_m", 350.0);
                    const double dpsi = num(b, "dpsi_rad", 0.2);
                    m.pso.bound_lower = {-dn, -de, -dpsi};
                    m.pso.bound_upper = {dn, de, dpsi};
                }
            }
        } else {
            m.lfm.rho_max = m.radar.rho_max;
        }

        if (doc.contains("detector")) {
            const json& d = doc["detector"];
            m.detector.lambda = num_int(d, "lambda", 218);
            m.detector.mu = num_int(d, "mu", 109);
            m.detector.gap = num_int(d, "gap", 121);
            m.detector.h = num(d, "h_m", 10.0);
            m.detector.gamma_gauss = num(d, "gamma_gauss", 0.0);
            m.detector.gamma_kde = num(d, "gamma_kde", 0.0);
            m.detector.kde_leave_one_out = d.value("kde_leave_one_out", false);
            cfg.p_fa = num(d, "p_fa", 1e-3);
        }

        if (doc.contains("fault")) {
            const json& f = doc["fault"];
            const std::string kind = f.value("kind", "none");
            if (kind == "none") {
                cfg.fault.kind = FaultKind::none;
            } else if (kind == "spoof") {
                cfg.fault.kind = FaultKind::spoof;
            } else if (kind == "jam") {
                cfg.fault.kind = FaultKind::jam;
            } else {
                throw ConfigError("config: fault.kind must be none, spoof or jam");
            }
            cfg.fault.t_onset = num(f, "t_onset_s", 0.0);
            cfg.fault.f_slope = num(f, "f_slope_m_per_min", 0.0);
            if (cfg.fault.kind == FaultKind::spoof && !(cfg.fault.f_slope > 0.0))
                throw ConfigError("config: spoof fault needs f_slope_m_per_min > 0");
        }

        if (doc.contains("dataset_dir")) {
            std::filesystem::path d = doc["dataset_dir"].get<std::string>();
            if (d.is_relative()) d = base_dir / d;
            cfg.dataset_dir = d.string();
        }
        cfg.em_tol = num(doc, "em_tol", 1e-6);
        cfg.em_max_iters = num_int(doc, "em_max_iters", 200);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return cfg;
}

MissionConfig load_mission_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_mission_config(buf.str(), path.parent_path());
}

DetectorGrid load_detector_grid(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open grid " + path.string());
    json doc;
    try {
        in >> doc;
        DetectorGrid grid;
        for (const auto& v : doc.at("mu")) grid.mu.push_back(v.get<int>());
        for (const auto& v : doc.at("lambda")) grid.lambda.push_back(v.get<int>());
        for (const auto& v : doc.at("gap")) grid.gap.push_back(v.get<int>());
        if (doc.contains("h_m"))
            for (const auto& v : doc["h_m"]) grid.h.push_back(v.get<double>());
        return grid;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("grid: ") + e.what());
    }
}

std::vector<std::pair<Pose, RadarScan>> load_lfm_dataset(const std::filesystem::path& dir,
                                                         double rho_max) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw ConfigError("dataset dir not found: " + dir.string());

    std::set<std::string> stems;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        const auto pos = name.find("_pose.csv");
        if (pos != std::string::npos && pos + 9 == name.size()) stems.insert(name.substr(0, pos));
    }
    if (stems.empty()) throw ConfigError("dataset dir has no *_pose.csv files: " + dir.string());

    std::vector<std::pair<Pose, RadarScan>> dataset;
    for (const auto& stem : stems) {
        const fs::path pose_path = dir / (stem + "_pose.csv");
        const fs::path scan_path = dir / (stem + "_scan.csv");
        if (!fs::exists(scan_path)) throw ConfigError("missing scan file " + scan_path.string());

        std::ifstream in(pose_path);
        std::string header, row;
        std::getline(in, header);
        std::getline(in, row);
        double lat_deg = 0, lon_deg = 0, heading_deg = 0;
        if (std::sscanf(row.c_str(), "%lf,%lf,%lf", &lat_deg, &lon_deg, &heading_deg) != 3)
            throw ConfigError("bad pose row in " + pose_path.string());
        Pose pose{{deg_to_rad(lat_deg), deg_to_rad(lon_deg)}, deg_to_rad(heading_deg)};
        dataset.emplace_back(pose, read_scan_csv(scan_path, rho_max));
    }
    return dataset;
}

void write_pose_csv(const std::filesystem::path& path, const Pose& pose) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    char line[128];
    std::snprintf(line, sizeof(line), "lat_deg,lon_deg,heading_deg\n%.12f,%.12f,%.8f\n",
                  rad_to_deg(pose.position.lat), rad_to_deg(pose.position.lon),
                  rad_to_deg(pose.heading));
    out << line;
}

}  // namespace coastnav
