#include "coastnav/chart.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

namespace coastnav {

namespace {

using nlohmann::json;

GeodeticPoint parse_position(const json& coord, const std::string& where) {
    if (!coord.is_array() || coord.size() < 2 || !coord[0].is_number() || !coord[1].is_number())
        throw ChartError(where + ": coordinate must be a [lon, lat] number pair");
    const double lon_deg = coord[0].get<double>();
    const double lat_deg = coord[1].get<double>();
    GeodeticPoint p{deg_to_rad(lat_deg), deg_to_rad(lon_deg)};
    if (!p.valid()) {
        std::ostringstream os;
        os << where << ": coordinate out of range (lon " << lon_deg << ", lat " << lat_deg << ")";
        throw ChartError(os.str());
    }
    return p;
}

std::vector<GeodeticPoint> parse_line(const json& coords, const std::string& where) {
    std::vector<GeodeticPoint> line;
    if (!coords.is_array() || coords.size() < 2)
        throw ChartError(where + ": needs at least 2 vertices");
    line.reserve(coords.size());
    for (const auto& c : coords) line.push_back(parse_position(c, where));
    return line;
}

}  // namespace

Chart parse_chart(const std::string& geojson_text) {
    json doc;
    try {
        doc = json::parse(geojson_text);
    } catch (const json::exception& e) {
        throw ChartError(std::string("chart is not valid JSON: ") + e.what());
    }
    if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" ||
        !doc.contains("features") || !doc["features"].is_array())
        throw ChartError("chart must be a GeoJSON FeatureCollection");

    Chart chart;
    std::set<std::string> seen_ids;
    std::size_t index = 0;
    for (const auto& feature : doc["features"]) {
        const std::string where = "feature #" + std::to_string(index++);
        if (!feature.is_object() || !feature.contains("geometry"))
            throw ChartError(where + ": missing geometry");
        const auto& geom = feature["geometry"];
        const std::string gtype = geom.value("type", "");
        const json props = feature.value("properties", json::object());
        const std::string kind = props.value("kind", "");

        if (kind == "shoreline") {
            if (gtype == "LineString") {
                chart.shorelines.push_back(parse_line(geom["coordinates"], where));
            } else if (gtype == "Polygon") {
                for (const auto& ring : geom["coordinates"]) {
                    auto line = parse_line(ring, where);
                    if (line.front().lat != line.back().lat || line.front().lon != line.back().lon)
                        line.push_back(line.front());  // close the ring
                    chart.shorelines.push_back(std::move(line));
                }
            } else {
                throw ChartError(where + ": shoreline must be LineString or Polygon, got " + gtype);
            }
        } else if (kind == "landmark") {
            if (gtype != "Point")
                throw ChartError(where + ": landmark must be a Point, got " + gtype);
            if (!props.contains("id") || !props["id"].is_string())
                throw ChartError(where + ": landmark needs a string \"id\" property");
            Landmark lm{props["id"].get<std::string>(), parse_position(geom["coordinates"], where)};
            if (!seen_ids.insert(lm.id).second)
                throw ChartError(where + ": duplicate landmark id \"" + lm.id + "\"");
            chart.landmarks.push_back(std::move(lm));
        }
        // other kinds are ignored
    }
    if (chart.shorelines.empty() && chart.landmarks.empty())
        throw ChartError("chart contains no shoreline or landmark features");
    return chart;
}

Chart load_chart(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ChartError("cannot open chart file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_chart(buf.str());
}

ShorelineSamples::ShorelineSamples(GeodeticPoint origin, std::vector<NedPoint> points,
                                   double spacing)
    : origin_(origin), points_(std::move(points)), spacing_(spacing) {
    build_index();
}

void ShorelineSamples::build_index() {
    if (points_.empty()) return;
    double max_n = -std::numeric_limits<double>::infinity();
    double max_e = -std::numeric_limits<double>::infinity();
    min_n_ = std::numeric_limits<double>::infinity();
    min_e_ = std::numeric_limits<double>::infinity();
    for (const auto& p : points_) {
        min_n_ = std::min(min_n_, p.north);
        min_e_ = std::min(min_e_, p.east);
        max_n = std::max(max_n, p.north);
        max_e = std::max(max_e, p.east);
    }
    // aim for a handful of samples per cell
    cell_ = std::max(4.0 * std::max(spacing_, 1e-3), 1e-3);
    nx_ = std::max(1, static_cast<int>((max_n - min_n_) / cell_) + 1);
    ny_ = std::max(1, static_cast<int>((max_e - min_e_) / cell_) + 1);
    cells_.assign(static_cast<std::size_t>(nx_) * ny_, {});
    for (std::uint32_t i = 0; i < points_.size(); ++i) {
        int cx = std::clamp(static_cast<int>((points_[i].north - min_n_) / cell_), 0, nx_ - 1);
        int cy = std::clamp(static_cast<int>((points_[i].east - min_e_) / cell_), 0, ny_ - 1);
        cells_[static_cast<std::size_t>(cx) * ny_ + cy].push_back(i);
    }
}

double ShorelineSamples::min_distance(const NedPoint& p) const {
    if (points_.empty())
        throw std::invalid_argument("min_distance: no shoreline samples in range");

    const int qx = static_cast<int>(std::floor((p.north - min_n_) / cell_));
    const int qy = static_cast<int>(std::floor((p.east - min_e_) / cell_));
    const int max_ring = std::max({std::abs(qx), std::abs(qx - (nx_ - 1)),
                                   std::abs(qy), std::abs(qy - (ny_ - 1))}) +
                         1;

    double best2 = std::numeric_limits<double>::infinity();
    for (int ring = 0; ring <= max_ring; ++ring) {
        // any sample in a cell at Chebyshev ring r is at least (r-1)*cell away
        if (ring > 1 && (ring - 1) * cell_ > std::sqrt(best2)) break;
        const int x0 = qx - ring, x1 = qx + ring;
        const int y0 = qy - ring, y1 = qy + ring;
        for (int cx = x0; cx <= x1; ++cx) {
            if (cx < 0 || cx >= nx_) continue;
            for (int cy = y0; cy <= y1; ++cy) {
                if (cy < 0 || cy >= ny_) continue;
                if (ring > 0 && cx != x0 && cx != x1 && cy != y0 && cy != y1)
                    continue;  // interior of ring already visited
                for (std::uint32_t idx : cells_[static_cast<std::size_t>(cx) * ny_ + cy]) {
                    const double dn = p.north - points_[idx].north;
                    const double de = p.east - points_[idx].east;
                    const double d2 = dn * dn + de * de;
                    if (d2 < best2) best2 = d2;
                }
            }
        }
    }
    return std::sqrt(best2);
}

ShorelineSamples extract_shoreline(const Chart& chart, const GeodeticPoint& origin, double radius,
                                   double spacing) {
    if (radius <= 0.0 || spacing <= 0.0)
        throw std::invalid_argument("extract_shoreline: radius and spacing must be positive");

    std::vector<NedPoint> out;
    const double r2 = radius * radius;
    auto keep = [&](const NedPoint& p) {
        if (p.north * p.north + p.east * p.east <= r2) out.push_back(p);
    };

    for (const auto& line : chart.shorelines) {
        std::vector<NedPoint> v(line.size());
        for (std::size_t i = 0; i < line.size(); ++i) v[i] = to_ned(line[i], origin);
        const bool closed =
            line.size() > 2 && v.front().north == v.back().north && v.front().east == v.back().east;
        for (std::size_t i = 0; i + 1 < v.size(); ++i) {
            const NedPoint d = v[i + 1] - v[i];
            const double len = d.norm();
            if (len == 0.0) continue;
            const int steps = std::max(1, static_cast<int>(std::ceil(len / spacing)));
            for (int k = 0; k < steps; ++k) keep(v[i] + (static_cast<double>(k) / steps) * d);
        }
        if (!closed) keep(v.back());
    }
    return ShorelineSamples(origin, std::move(out), spacing);
}

}  // namespace coastnav
