#pragma once
#include <cmath>
#include <optional>

namespace dcuprl {

struct Vec2 {
    double x = 0.0, y = 0.0;
};

/// Distance along ray (origin, unit dir) to segment (a,b), if it hits.
inline std::optional<double> ray_segment(double ox, double oy, double dx, double dy, double ax,
                                         double ay, double bx, double by) {
    const double ex = bx - ax, ey = by - ay;
    const double denom = dx * ey - dy * ex;
    if (std::abs(denom) < 1e-12) return std::nullopt; // parallel
    const double t = ((ax - ox) * ey - (ay - oy) * ex) / denom;
    const double s = ((ax - ox) * dy - (ay - oy) * dx) / denom;
    if (t >= 0.0 && s >= 0.0 && s <= 1.0) return t;
    return std::nullopt;
}

/// Distance along ray to an axis-aligned box (center cx,cy, full size w,h).
/// A ray starting inside reports the exit distance.
inline std::optional<double> ray_aabb(double ox, double oy, double dx, double dy, double cx,
                                      double cy, double w, double h) {
    const double x0 = cx - w / 2, x1 = cx + w / 2;
    const double y0 = cy - h / 2, y1 = cy + h / 2;
    double tmin = -1e300, tmax = 1e300;
    if (std::abs(dx) < 1e-12) {
        if (ox < x0 || ox > x1) return std::nullopt;
    } else {
        double ta = (x0 - ox) / dx, tb = (x1 - ox) / dx;
        tmin = std::max(tmin, std::min(ta, tb));
        tmax = std::min(tmax, std::max(ta, tb));
    }
    if (std::abs(dy) < 1e-12) {
        if (oy < y0 || oy > y1) return std::nullopt;
    } else {
        double ta = (y0 - oy) / dy, tb = (y1 - oy) / dy;
        tmin = std::max(tmin, std::min(ta, tb));
        tmax = std::min(tmax, std::max(ta, tb));
    }
    if (tmax < tmin || tmax < 0.0) return std::nullopt;
    return tmin >= 0.0 ? tmin : tmax;
}

/// Distance along ray to a circle (center, radius); nearest nonnegative root.
inline std::optional<double> ray_circle(double ox, double oy, double dx, double dy, double cx,
                                        double cy, double r) {
    const double fx = ox - cx, fy = oy - cy;
    const double b = fx * dx + fy * dy;
    const double c = fx * fx + fy * fy - r * r;
    const double disc = b * b - c;
    if (disc < 0.0) return std::nullopt;
    const double sq = std::sqrt(disc);
    const double t1 = -b - sq, t2 = -b + sq;
    if (t1 >= 0.0) return t1;
    if (t2 >= 0.0) return t2;
    return std::nullopt;
}

/// Wrap an angle into (-pi, pi].
inline double wrap_angle(double a) {
    const double two_pi = 6.283185307179586477;
    a = std::fmod(a, two_pi);
    if (a <= -3.141592653589793238) a += two_pi;
    if (a > 3.141592653589793238) a -= two_pi;
    return a;
}

inline bool point_in_box(double px, double py, double cx, double cy, double w, double h) {
    return std::abs(px - cx) <= w / 2 && std::abs(py - cy) <= h / 2;
}

inline bool point_in_circle(double px, double py, double cx, double cy, double r) {
    const double dx = px - cx, dy = py - cy;
    return dx * dx + dy * dy <= r * r;
}

} // namespace dcuprl
