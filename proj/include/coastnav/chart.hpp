#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "coastnav/geodesy.hpp"

// Vector chart access: shoreline polylines, point landmarks, local shoreline
// sampling and exact minimum-distance queries against the samples.

namespace coastnav {

struct Landmark {
    std::string id;
    GeodeticPoint position;
};

struct Chart {
    std::vector<std::vector<GeodeticPoint>> shorelines;  // each polyline >= 2 vertices
    std::vector<Landmark> landmarks;                     // ids unique
};

/// Raised on malformed or empty chart input, with feature context.
class ChartError : public std::runtime_error {
public:
    explicit ChartError(const std::string& what) : std::runtime_error(what) {}
};

/// Parse a GeoJSON FeatureCollection. LineString/Polygon features with
/// property kind="shoreline" become shorelines (polygon rings are closed
/// boundary polylines); Point features with kind="landmark" and "id" become
/// landmarks. Coordinates are [lon, lat] in degrees.
Chart parse_chart(const std::string& geojson_text);

/// Load a chart file from disk. See parse_chart for the format.
Chart load_chart(const std::filesystem::path& path);

/// Shoreline points densified at `spacing` and expressed in NED at `origin`,
/// restricted to a disc of the query radius. Construction builds a uniform
/// grid over the samples so nearest-sample queries do not scan every point.
class ShorelineSamples {
public:
    ShorelineSamples() = default;
    ShorelineSamples(GeodeticPoint origin, std::vector<NedPoint> points, double spacing);

    const GeodeticPoint& origin() const { return origin_; }
    const std::vector<NedPoint>& points() const { return points_; }
    double spacing() const { return spacing_; }
    bool empty() const { return points_.empty(); }
    std::size_t size() const { return points_.size(); }

    /// Distance from p to the nearest sample. Equals the brute-force scan
    /// bit-for-bit. Throws std::invalid_argument when there are no samples.
    double min_distance(const NedPoint& p) const;

private:
    GeodeticPoint origin_;
    std::vector<NedPoint> points_;
    double spacing_ = 0.0;

    // uniform grid over the sample bounding box
    double cell_ = 1.0;
    double min_n_ = 0.0, min_e_ = 0.0;
    int nx_ = 0, ny_ = 0;
    std::vector<std::vector<std::uint32_t>> cells_;

    void build_index();
};

/// Densified samples of every shoreline segment intersecting the disc of
/// `radius` around `origin`. Empty result when no shoreline is in range.
ShorelineSamples extract_shoreline(const Chart& chart, const GeodeticPoint& origin,
                                   double radius, double spacing);

/// Convenience free-function form of the nearest-sample query.
inline double min_distance(const NedPoint& p, const ShorelineSamples& samples) {
    return samples.min_distance(p);
}

}  // namespace coastnav
