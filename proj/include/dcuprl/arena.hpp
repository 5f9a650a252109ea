#pragma once
#include <optional>
#include <string>
#include <vector>

#include "dcuprl/errors.hpp"
#include "dcuprl/geometry.hpp"

namespace dcuprl {

/**
 * Static 2D world: boundary wall segments plus box/circle obstacles,
 * loaded from a line-oriented text file. One primitive per line:
 *
 *   wall x0 y0 x1 y1
 *   box cx cy w h
 *   circle cx cy r
 *   start x y yaw|rand
 *   # comment
 *
 * Units are meters. Each primitive gets a fixed shading albedo from a
 * small cycling palette, used only by the grayscale render.
 */
struct Wall {
    double x0, y0, x1, y1;
    float albedo;
};

struct Box {
    double cx, cy, w, h;
    float albedo;
};

struct Circle {
    double cx, cy, r;
    float albedo;
};

struct Arena {
    std::string id; // file stem, e.g. "env1"
    std::vector<Wall> walls;
    std::vector<Box> boxes;
    std::vector<Circle> circles;
    double start_x = 0.0, start_y = 0.0;
    std::optional<double> start_yaw; // nullopt = randomize at reset

    std::size_t obstacle_count() const { return boxes.size() + circles.size(); }

    /// Nearest hit distance along the ray, plus the albedo of what was hit.
    struct Hit {
        double dist;
        float albedo;
    };
    std::optional<Hit> cast_ray(double ox, double oy, double angle) const;

    bool point_in_obstacle(double px, double py) const;

    /// Axis-aligned bounds of the boundary walls.
    void wall_bounds(double& x0, double& y0, double& x1, double& y1) const;

    /// Parse, validate geometry (obstacles strictly inside the walls,
    /// start pose free), and check the per-environment obstacle budget
    /// for the shipped ids (env1: exactly 4, env2: more than env1).
    static Arena load(const std::string& path);
    static Arena parse(const std::string& text, const std::string& id);
};

} // namespace dcuprl
