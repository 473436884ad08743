#include "coastnav/geodesy.hpp"

namespace coastnav {

RadiiOfCurvature radii_of_curvature(double lat, const Wgs84Params& wgs) {
    const double s = std::sin(lat);
    const double t = 1.0 - wgs.e2 * s * s;
    const double rt = std::sqrt(t);
    return {wgs.a / rt, wgs.a * (1.0 - wgs.e2) / (t * rt)};
}

NedPoint to_ned(const GeodeticPoint& p, const GeodeticPoint& origin, const Wgs84Params& wgs) {
    const auto [n, m] = radii_of_curvature(origin.lat, wgs);
    return {m * (p.lat - origin.lat), n * std::cos(origin.lat) * (p.lon - origin.lon)};
}

GeodeticPoint to_geo(const NedPoint& p, const GeodeticPoint& origin, const Wgs84Params& wgs) {
    const auto [n, m] = radii_of_curvature(origin.lat, wgs);
    return {origin.lat + p.north / m, origin.lon + p.east / (n * std::cos(origin.lat))};
}

}  // namespace coastnav
