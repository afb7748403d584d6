#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "seqnav/errors.hpp"

namespace seqnav {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

inline double deg2rad(double deg) { return deg * (kPi / 180.0); }
inline double rad2deg(double rad) { return rad * (180.0 / kPi); }

// Wrap an angle to (-pi, pi].
inline double wrap_angle(double a) {
  a = std::fmod(a, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  if (a > kPi) a -= 2.0 * kPi;
  return a;
}

// A GNSS fix in degrees. Longitude is normalized to (-180, 180] on
// construction; latitude must stay within [-90, 90].
struct GeoFix {
  double lat = 0.0;
  double lon = 0.0;

  GeoFix() = default;
  GeoFix(double lat_deg, double lon_deg) : lat(lat_deg), lon(lon_deg) {
    if (!std::isfinite(lat) || !std::isfinite(lon)) {
      throw InvalidSpec("GeoFix: non-finite coordinates");
    }
    if (lat < -90.0 || lat > 90.0) {
      throw InvalidSpec("GeoFix: latitude out of [-90, 90]");
    }
    lon = std::fmod(lon, 360.0);
    if (lon <= -180.0) lon += 360.0;
    if (lon > 180.0) lon -= 360.0;
  }
};

// Reference ellipsoid: semi-major axis (m) and squared eccentricity.
struct Ellipsoid {
  double semi_major_a;
  double eccentricity_sq;

  static constexpr Ellipsoid wgs84() {
    return Ellipsoid{6378137.0, 0.00669437999014};
  }
};

// A point in the robot-local frame: x rightward, y forward, in meters.
struct LocalPoint {
  double x = 0.0;
  double y = 0.0;
};

// Heading angle in radians, normalized to (-pi, pi].
struct Bearing {
  double rad = 0.0;

  Bearing() = default;
  explicit Bearing(double radians) : rad(wrap_angle(radians)) {}
};

enum class Command : std::uint8_t { Left, Straight, Right };

inline const char* to_string(Command c) {
  switch (c) {
    case Command::Left: return "left";
    case Command::Straight: return "straight";
    case Command::Right: return "right";
  }
  return "?";
}

// Meridional (scales dlat) and prime-vertical (scales dlon) curvature radii.
struct CurvatureRadii {
  double meridional_c_m;
  double prime_vertical_c_e;
};

inline CurvatureRadii curvature_radii(double phi_rad,
                                      const Ellipsoid& ell = Ellipsoid::wgs84()) {
  const double s = std::sin(phi_rad);
  const double w = 1.0 - ell.eccentricity_sq * s * s;
  const double c_m =
      ell.semi_major_a * (1.0 - ell.eccentricity_sq) / (w * std::sqrt(w));
  const double c_e = ell.semi_major_a / std::sqrt(w);
  return {c_m, c_e};
}

// Haversine distance on a sphere whose radius is the prime-vertical radius
// of curvature at the midpoint latitude of the two fixes.
inline double great_circle_distance(const GeoFix& a, const GeoFix& b,
                                    const Ellipsoid& ell = Ellipsoid::wgs84()) {
  const double p1 = deg2rad(a.lat);
  const double p2 = deg2rad(b.lat);
  const double dphi = p2 - p1;
  const double dlam = deg2rad(b.lon) - deg2rad(a.lon);
  const double sp = std::sin(0.5 * dphi);
  const double sl = std::sin(0.5 * dlam);
  const double h = sp * sp + std::cos(p1) * std::cos(p2) * sl * sl;
  const double radius =
      curvature_radii(0.5 * (p1 + p2), ell).prime_vertical_c_e;
  return 2.0 * radius * std::asin(std::min(1.0, std::sqrt(h)));
}

inline constexpr double kCoincidenceToleranceM = 0.01;

// Bearing of the motion from prev to curr. Throws CoincidentFixes when the
// fixes are closer than the coincidence tolerance; callers hold the last
// valid bearing in that case.
inline Bearing bearing(const GeoFix& prev, const GeoFix& curr,
                       const Ellipsoid& ell = Ellipsoid::wgs84(),
                       double coincidence_tol_m = kCoincidenceToleranceM) {
  if (great_circle_distance(prev, curr, ell) < coincidence_tol_m) {
    throw CoincidentFixes("bearing: fixes closer than coincidence tolerance");
  }
  const double p1 = deg2rad(prev.lat);
  const double p2 = deg2rad(curr.lat);
  const double dlam = deg2rad(curr.lon) - deg2rad(prev.lon);
  const double y = std::sin(dlam) * std::cos(p2);
  const double x = std::cos(p1) * std::sin(p2) -
                   std::sin(p1) * std::cos(p2) * std::cos(dlam);
  return Bearing(std::atan2(y, x));
}

// Equirectangular projection of a route point into the robot-local frame,
// rotated by the robot bearing.
inline LocalPoint global_to_local(const GeoFix& route_pt, const GeoFix& robot,
                                  const Bearing& beta,
                                  const Ellipsoid& ell = Ellipsoid::wgs84()) {
  const double phi_c = deg2rad(robot.lat);
  const CurvatureRadii radii = curvature_radii(phi_c, ell);
  const double dx =
      radii.prime_vertical_c_e * std::cos(phi_c) *
      (deg2rad(route_pt.lon) - deg2rad(robot.lon));
  const double dy = radii.meridional_c_m * (deg2rad(route_pt.lat) - phi_c);
  const double cb = std::cos(beta.rad);
  const double sb = std::sin(beta.rad);
  return LocalPoint{cb * dx - sb * dy, sb * dx + cb * dy};
}

inline double velocity_from_fixes(const GeoFix& prev, const GeoFix& curr,
                                  double dt_s,
                                  const Ellipsoid& ell = Ellipsoid::wgs84()) {
  if (!(dt_s > 0.0)) {
    throw NonPositiveInterval("velocity_from_fixes: dt must be > 0");
  }
  return great_circle_distance(prev, curr, ell) / dt_s;
}

inline constexpr double kDefaultTau1M = 1.0;
inline constexpr double kDefaultTau2M = 2.5;

struct CommandDiagnostics {
  // Times both the Left and Right conditions fired on the same record.
  long left_right_conflicts = 0;
};

// Discrete command from the two transformed route points. Only the lateral
// components matter. When both the Left and Right conditions fire, Left wins
// and the conflict is counted.
inline Command infer_command(const LocalPoint& p1, const LocalPoint& p2,
                             double tau1 = kDefaultTau1M,
                             double tau2 = kDefaultTau2M,
                             CommandDiagnostics* diag = nullptr) {
  const bool left = p1.x <= -tau1 || p2.x <= -tau2;
  const bool right = p1.x >= tau1 || p2.x >= tau2;
  if (left && right && diag != nullptr) ++diag->left_right_conflicts;
  if (left) return Command::Left;
  if (right) return Command::Right;
  return Command::Straight;
}

}  // namespace seqnav
