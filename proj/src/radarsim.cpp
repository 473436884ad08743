#include "coastnav/radarsim.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <stdexcept>

namespace coastnav {

RadarScan cast_scan(const Pose& true_pose, const ShorelineSamples& samples,
                    const RadarNoiseParams& noise, std::uint64_t rng_seed, double timestamp) {
    RadarScan scan;
    scan.rho_max = noise.rho_max;
    scan.timestamp = timestamp;

    const int n = noise.n_spokes;
    const double spoke_width = 2.0 * kPi / n;
    const NedPoint ship = to_ned(true_pose.position, samples.origin());

    // nearest sample range per spoke
    std::vector<double> nearest(static_cast<std::size_t>(n),
                                std::numeric_limits<double>::infinity());
    for (const auto& q : samples.points()) {
        const NedPoint rel = q - ship;
        const double range = rel.norm();
        if (range <= 0.0 || range > noise.rho_max) continue;
        const double bearing = wrap_two_pi(ned_azimuth(rel) - true_pose.heading);
        const int spoke = static_cast<int>(std::lround(bearing / spoke_width)) % n;
        nearest[spoke] = std::min(nearest[spoke], range);
    }

    std::mt19937_64 rng(rng_seed);
    std::bernoulli_distribution detect(noise.p_detect);
    std::bernoulli_distribution clutter(noise.p_clutter_per_spoke);
    std::normal_distribution<double> range_noise(0.0, 1.0);
    std::uniform_real_distribution<double> uniform_range(0.0, noise.rho_max);

    constexpr double kMinRange = 1e-3;
    for (int s = 0; s < n; ++s) {
        const double bearing = s * spoke_width;
        if (std::isfinite(nearest[s]) && detect(rng)) {
            double r = nearest[s];
            if (noise.sigma_range > 0.0) r += noise.sigma_range * range_noise(rng);
            r = std::clamp(r, kMinRange, noise.rho_max);
            scan.observations.push_back({r, bearing});
        }
        if (noise.p_clutter_per_spoke > 0.0 && clutter(rng)) {
            const double r = noise.rho_max - uniform_range(rng);  // (0, rho_max]
            scan.observations.push_back({r, bearing});
        }
    }
    return scan;
}

std::vector<StaticTarget> detect_static_targets(const Pose& true_pose,
                                                const std::vector<Landmark>& landmarks,
                                                const RadarNoiseParams& noise,
                                                std::uint64_t rng_seed) {
    std::mt19937_64 rng(rng_seed);
    std::bernoulli_distribution detect(noise.p_detect);
    std::normal_distribution<double> gauss(0.0, 1.0);

    std::vector<StaticTarget> targets;
    for (const auto& lm : landmarks) {
        const NedPoint rel = to_ned(lm.position, true_pose.position);
        const double range = rel.norm();
        if (range <= 0.0 || range > noise.rho_max) continue;
        if (!detect(rng)) continue;
        double rho = range;
        double beta = wrap_two_pi(ned_azimuth(rel) - true_pose.heading);
        if (noise.sigma_range > 0.0) rho = std::max(1e-3, rho + noise.sigma_range * gauss(rng));
        if (noise.sigma_bearing > 0.0) beta = wrap_two_pi(beta + noise.sigma_bearing * gauss(rng));
        targets.push_back({rho, beta, noise.sigma_range * noise.sigma_range,
                           noise.sigma_bearing * noise.sigma_bearing});
    }
    return targets;
}

void write_scan_csv(const std::filesystem::path& path, const RadarScan& scan, int n_spokes) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "spoke_index,range_m,bearing_rad\n";
    const double spoke_width = 2.0 * kPi / n_spokes;
    char line[96];
    for (const auto& z : scan.observations) {
        const int spoke = static_cast<int>(std::lround(z.bearing / spoke_width)) % n_spokes;
        std::snprintf(line, sizeof(line), "%d,%.9g,%.17g\n", spoke, z.range, z.bearing);
        out << line;
    }
}

RadarScan read_scan_csv(const std::filesystem::path& path, double rho_max) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    RadarScan scan;
    scan.rho_max = rho_max;
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        int spoke = 0;
        RadarObservation z;
        if (std::sscanf(line.c_str(), "%d,%lf,%lf", &spoke, &z.range, &z.bearing) != 3)
            throw std::runtime_error("bad scan row in " + path.string() + ": " + line);
        scan.observations.push_back(z);
    }
    return scan;
}

}  // namespace coastnav
