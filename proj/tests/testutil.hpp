#pragma once

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "coastnav/chart.hpp"
#include "coastnav/geodesy.hpp"

// Synthetic scenes shared across the test suites.

namespace testutil {

using namespace coastnav;

inline const GeodeticPoint kOrigin{deg_to_rad(55.0), deg_to_rad(10.0)};

/// Closed ring of n vertices approximating a circle of `radius` meters
/// centered `center_ned` away from `origin`.
inline std::vector<GeodeticPoint> circle_ring(const GeodeticPoint& origin, NedPoint center_ned,
                                              double radius, int n = 256) {
    std::vector<GeodeticPoint> ring;
    ring.reserve(n + 1);
    for (int k = 0; k < n; ++k) {
        const double a = 2.0 * kPi * k / n;
        ring.push_back(to_geo(center_ned + polar_to_ned(radius, a), origin));
    }
    ring.push_back(ring.front());
    return ring;
}

/// One circular island.
inline Chart circle_island_chart(const GeodeticPoint& origin, NedPoint center, double radius,
                                 int n = 256) {
    Chart chart;
    chart.shorelines.push_back(circle_ring(origin, center, radius, n));
    return chart;
}

/// Three islands of different sizes around the origin; rich enough scene to
/// constrain all three pose axes.
inline Chart archipelago_chart(const GeodeticPoint& origin) {
    Chart chart;
    chart.shorelines.push_back(circle_ring(origin, {2500.0, 500.0}, 700.0, 256));
    chart.shorelines.push_back(circle_ring(origin, {-800.0, 2600.0}, 450.0, 192));
    chart.shorelines.push_back(circle_ring(origin, {500.0, -2200.0}, 550.0, 192));
    chart.landmarks.push_back({"b1", to_geo({1200.0, 900.0}, origin)});
    chart.landmarks.push_back({"b2", to_geo({-400.0, 1500.0}, origin)});
    chart.landmarks.push_back({"b3", to_geo({900.0, -1100.0}, origin)});
    return chart;
}

/// A long straight east-west coastline `offset_north` meters from origin.
inline Chart straight_coast_chart(const GeodeticPoint& origin, double offset_north,
                                  double half_length = 20000.0) {
    Chart chart;
    chart.shorelines.push_back({to_geo({offset_north, -half_length}, origin),
                                to_geo({offset_north, half_length}, origin)});
    return chart;
}

/// Ring-shaped shoreline around the origin (every spoke sees land).
inline Chart atoll_chart(const GeodeticPoint& origin, double radius, int n = 720) {
    return circle_island_chart(origin, {0.0, 0.0}, radius, n);
}

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        dir_ = std::filesystem::temp_directory_path() /
               ("coastnav_test_" + tag + "_" + std::to_string(std::rand()));
        std::filesystem::create_directories(dir_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(dir_, ec);
    }
    const std::filesystem::path& path() const { return dir_; }

private:
    std::filesystem::path dir_;
};

inline void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

}  // namespace testutil
