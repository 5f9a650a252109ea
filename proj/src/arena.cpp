#include "dcuprl/arena.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dcuprl/tensor.hpp"

namespace dcuprl {
namespace {

// Shading palette cycled over primitives in file order. Mixed bright and
// dark entries so grayscale renders conflate distance with material, the
// way real intensity images do.
constexpr float kAlbedos[] = {0.90f, 0.55f, 0.80f, 0.40f, 1.00f, 0.30f, 0.70f, 0.50f, 0.85f, 0.25f};
constexpr int kAlbedoCount = 10;

} // namespace

std::optional<Arena::Hit> Arena::cast_ray(double ox, double oy, double angle) const {
    const double dx = std::cos(angle), dy = std::sin(angle);
    std::optional<Hit> best;
    auto consider = [&](std::optional<double> t, float albedo) {
        if (t && (!best || *t < best->dist)) best = Hit{*t, albedo};
    };
    for (const auto& w : walls) consider(ray_segment(ox, oy, dx, dy, w.x0, w.y0, w.x1, w.y1), w.albedo);
    for (const auto& b : boxes) consider(ray_aabb(ox, oy, dx, dy, b.cx, b.cy, b.w, b.h), b.albedo);
    for (const auto& c : circles) consider(ray_circle(ox, oy, dx, dy, c.cx, c.cy, c.r), c.albedo);
    return best;
}

bool Arena::point_in_obstacle(double px, double py) const {
    for (const auto& b : boxes)
        if (point_in_box(px, py, b.cx, b.cy, b.w, b.h)) return true;
    for (const auto& c : circles)
        if (point_in_circle(px, py, c.cx, c.cy, c.r)) return true;
    return false;
}

void Arena::wall_bounds(double& x0, double& y0, double& x1, double& y1) const {
    x0 = y0 = 1e300;
    x1 = y1 = -1e300;
    for (const auto& w : walls) {
        x0 = std::min({x0, w.x0, w.x1});
        y0 = std::min({y0, w.y0, w.y1});
        x1 = std::max({x1, w.x0, w.x1});
        y1 = std::max({y1, w.y0, w.y1});
    }
}

Arena Arena::parse(const std::string& text, const std::string& id) {
    Arena a;
    a.id = id;
    bool have_start = false;
    int albedo_idx = 0;
    auto next_albedo = [&] { return kAlbedos[albedo_idx++ % kAlbedoCount]; };

    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string kind;
        if (!(ls >> kind)) continue;
        auto fail = [&](const std::string& why) -> ConfigError {
            return ConfigError("arena " + id + " line " + std::to_string(lineno) + ": " + why);
        };
        if (kind == "wall") {
            Wall w{};
            if (!(ls >> w.x0 >> w.y0 >> w.x1 >> w.y1)) throw fail("wall needs x0 y0 x1 y1");
            w.albedo = next_albedo();
            a.walls.push_back(w);
        } else if (kind == "box") {
            Box b{};
            if (!(ls >> b.cx >> b.cy >> b.w >> b.h)) throw fail("box needs cx cy w h");
            if (b.w <= 0 || b.h <= 0) throw fail("box needs positive size");
            b.albedo = next_albedo();
            a.boxes.push_back(b);
        } else if (kind == "circle") {
            Circle c{};
            if (!(ls >> c.cx >> c.cy >> c.r)) throw fail("circle needs cx cy r");
            if (c.r <= 0) throw fail("circle needs positive radius");
            c.albedo = next_albedo();
            a.circles.push_back(c);
        } else if (kind == "start") {
            std::string yaw;
            if (!(ls >> a.start_x >> a.start_y >> yaw)) throw fail("start needs x y yaw|rand");
            if (yaw == "rand") {
                a.start_yaw.reset();
            } else {
                try {
                    a.start_yaw = std::stod(yaw);
                } catch (...) {
                    throw fail("bad yaw value '" + yaw + "'");
                }
            }
            have_start = true;
        } else {
            throw fail("unknown primitive '" + kind + "'");
        }
    }

    if (a.walls.empty()) throw ConfigError("arena " + id + ": no walls");
    if (!have_start) throw ConfigError("arena " + id + ": no start line");

    double x0, y0, x1, y1;
    a.wall_bounds(x0, y0, x1, y1);
    auto strictly_inside = [&](double px, double py) {
        return px > x0 && px < x1 && py > y0 && py < y1;
    };
    for (const auto& b : a.boxes)
        if (!strictly_inside(b.cx - b.w / 2, b.cy - b.h / 2) ||
            !strictly_inside(b.cx + b.w / 2, b.cy + b.h / 2))
            throw ConfigError("arena " + id + ": box at (" + std::to_string(b.cx) + "," +
                              std::to_string(b.cy) + ") not strictly inside walls");
    for (const auto& c : a.circles)
        if (!strictly_inside(c.cx - c.r, c.cy - c.r) || !strictly_inside(c.cx + c.r, c.cy + c.r))
            throw ConfigError("arena " + id + ": circle at (" + std::to_string(c.cx) + "," +
                              std::to_string(c.cy) + ") not strictly inside walls");

    if (!strictly_inside(a.start_x, a.start_y))
        throw ConfigError("arena " + id + ": start pose outside walls");
    if (a.point_in_obstacle(a.start_x, a.start_y))
        throw ConfigError("arena " + id + ": start pose inside an obstacle");

    if (id == "env1" && a.obstacle_count() != 4)
        throw ConfigError("arena env1 must have exactly 4 obstacles, found " +
                          std::to_string(a.obstacle_count()));
    if (id == "env2" && a.obstacle_count() <= 4)
        throw ConfigError("arena env2 must have more than 4 obstacles, found " +
                          std::to_string(a.obstacle_count()));
    return a;
}

Arena Arena::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open arena file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), std::filesystem::path(path).stem().string());
}

} // namespace dcuprl
