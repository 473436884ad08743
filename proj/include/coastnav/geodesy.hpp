#pragma once

#include <cmath>

// WGS84 ellipsoid model and the local North-East tangent-plane transforms.
// All angles are radians, all distances meters, altitude is zero throughout.

namespace coastnav {

inline constexpr double kPi = 3.14159265358979323846;

/// Wrap an angle to (-pi, pi].
inline double wrap_pi(double a) {
    a = std::fmod(a, 2.0 * kPi);
    if (a <= -kPi) a += 2.0 * kPi;
    if (a > kPi) a -= 2.0 * kPi;
    return a;
}

/// Wrap an angle to [0, 2*pi).
inline double wrap_two_pi(double a) {
    a = std::fmod(a, 2.0 * kPi);
    if (a < 0.0) a += 2.0 * kPi;
    if (a >= 2.0 * kPi) a = 0.0;
    return a;
}

inline double deg_to_rad(double d) { return d * kPi / 180.0; }
inline double rad_to_deg(double r) { return r * 180.0 / kPi; }

/// Zero-altitude geodetic coordinates. lat in [-pi/2, pi/2], lon in [-pi, pi].
struct GeodeticPoint {
    double lat = 0.0;
    double lon = 0.0;

    bool valid() const {
        return std::isfinite(lat) && std::isfinite(lon) &&
               std::abs(lat) <= kPi / 2.0 && std::abs(lon) <= kPi;
    }
};

/// Local tangent-plane offset in meters (down component is identically zero).
struct NedPoint {
    double north = 0.0;
    double east = 0.0;

    double norm() const { return std::hypot(north, east); }
};

inline NedPoint operator+(NedPoint a, NedPoint b) { return {a.north + b.north, a.east + b.east}; }
inline NedPoint operator-(NedPoint a, NedPoint b) { return {a.north - b.north, a.east - b.east}; }
inline NedPoint operator*(double s, NedPoint p) { return {s * p.north, s * p.east}; }

/// 3-DOF own-ship pose: position plus heading from true north, (-pi, pi].
struct Pose {
    GeodeticPoint position;
    double heading = 0.0;
};

/// Ellipsoid constants. e2 = 1 - b^2/a^2.
struct Wgs84Params {
    double a = 6378137.0;
    double b = 6356752.3142;
    double e2 = 1.0 - (6356752.3142 * 6356752.3142) / (6378137.0 * 6378137.0);

    static Wgs84Params from_axes(double a, double b) {
        return Wgs84Params{a, b, 1.0 - (b * b) / (a * a)};
    }
};

/// The default ellipsoid used by the whole library.
inline const Wgs84Params& wgs84() {
    static const Wgs84Params p{};
    return p;
}

/// Prime-vertical (n) and meridional (m) radii of curvature at a latitude.
struct RadiiOfCurvature {
    double n = 0.0;
    double m = 0.0;
};

RadiiOfCurvature radii_of_curvature(double lat, const Wgs84Params& wgs = wgs84());

/// Geodetic point to NED meters in the tangent plane at `origin`.
/// Pure-latitude offsets map to north, pure-longitude offsets to east;
/// both radii are evaluated at the origin latitude so the transform pair
/// is exactly invertible. Valid for offsets up to roughly 0.5 deg.
NedPoint to_ned(const GeodeticPoint& p, const GeodeticPoint& origin,
                const Wgs84Params& wgs = wgs84());

/// Exact algebraic inverse of to_ned at the same origin.
GeodeticPoint to_geo(const NedPoint& p, const GeodeticPoint& origin,
                     const Wgs84Params& wgs = wgs84());

/// Polar (range, azimuth-from-north) to NED components.
inline NedPoint polar_to_ned(double range, double azimuth) {
    return {range * std::cos(azimuth), range * std::sin(azimuth)};
}

/// Azimuth from true north of a NED vector.
inline double ned_azimuth(const NedPoint& p) { return std::atan2(p.east, p.north); }

}  // namespace coastnav
