#include "dcuprl/camera.hpp"

#include <algorithm>
#include <cmath>

#include "dcuprl/tensor.hpp"

namespace dcuprl {

void CameraConfig::validate() const {
    if (width <= 0 || height <= 0) throw ConfigError("camera: nonpositive resolution");
    if (fov <= 0.0 || fov >= 3.141592653589793238)
        throw ConfigError("camera: fov must be in (0, pi), got " + std::to_string(fov));
    if (max_range <= 0.0) throw ConfigError("camera: max_range must be positive");
}

float DepthImage::min_value() const {
    float m = data[0];
    for (float v : data) m = std::min(m, v);
    return m;
}

RaySweep sweep_rays(const Arena& arena, double x, double y, double yaw, const CameraConfig& cam) {
    cam.validate();
    RaySweep out;
    out.dist.resize(static_cast<std::size_t>(cam.width));
    out.albedo.resize(static_cast<std::size_t>(cam.width));
    out.bearing.resize(static_cast<std::size_t>(cam.width));
    for (int j = 0; j < cam.width; ++j) {
        // column centers, left edge of image = +fov/2
        const double bearing = cam.fov / 2.0 - (j + 0.5) * cam.fov / cam.width;
        out.bearing[static_cast<std::size_t>(j)] = bearing;
        const auto hit = arena.cast_ray(x, y, yaw + bearing);
        if (hit && hit->dist < cam.max_range) {
            // never report zero range, even when scraping a surface
            out.dist[static_cast<std::size_t>(j)] = std::max(hit->dist, 1e-4);
            out.albedo[static_cast<std::size_t>(j)] = hit->albedo;
        } else {
            out.dist[static_cast<std::size_t>(j)] = cam.max_range;
            out.albedo[static_cast<std::size_t>(j)] = 0.0f;
        }
    }
    return out;
}

namespace {

struct Band {
    int top, bottom; // pixel rows [top, bottom)
};

Band wall_band(double d, double bearing, const CameraConfig& cam) {
    const double d_perp = std::max(d * std::cos(bearing), 1e-6);
    double h = static_cast<double>(cam.height) * cam.wall_focal / d_perp;
    h = std::clamp(h, 1.0, static_cast<double>(cam.height));
    const double half = h / 2.0;
    const double center = cam.height / 2.0;
    int top = static_cast<int>(std::floor(center - half + 0.5));
    int bottom = static_cast<int>(std::floor(center + half + 0.5));
    top = std::clamp(top, 0, cam.height - 1);
    bottom = std::clamp(bottom, top + 1, cam.height);
    return {top, bottom};
}

} // namespace

DepthImage depth_from_rays(const RaySweep& rays, const CameraConfig& cam) {
    DepthImage img;
    img.width = cam.width;
    img.height = cam.height;
    img.max_range = static_cast<float>(cam.max_range);
    img.data.assign(static_cast<std::size_t>(cam.width) * cam.height,
                    static_cast<float>(cam.max_range));
    for (int j = 0; j < cam.width; ++j) {
        const double d = rays.dist[static_cast<std::size_t>(j)];
        if (d >= cam.max_range) continue;
        const Band band = wall_band(d, rays.bearing[static_cast<std::size_t>(j)], cam);
        for (int r = band.top; r < band.bottom; ++r)
            img.data[static_cast<std::size_t>(r) * cam.width + j] = static_cast<float>(d);
    }
    return img;
}

PixelImage pixel_from_rays(const RaySweep& rays, const CameraConfig& cam) {
    PixelImage img;
    img.width = cam.width;
    img.height = cam.height;
    img.data.assign(static_cast<std::size_t>(cam.width) * cam.height, 0);
    for (int j = 0; j < cam.width; ++j) {
        const double d = rays.dist[static_cast<std::size_t>(j)];
        if (d >= cam.max_range) continue;
        const double shade = std::clamp(1.0 - d / cam.max_range, 0.0, 1.0) *
                             rays.albedo[static_cast<std::size_t>(j)];
        const auto value = static_cast<std::uint8_t>(std::floor(255.0 * shade + 0.5)); // half up
        const Band band = wall_band(d, rays.bearing[static_cast<std::size_t>(j)], cam);
        for (int r = band.top; r < band.bottom; ++r)
            img.data[static_cast<std::size_t>(r) * cam.width + j] = value;
    }
    return img;
}

DepthImage render_depth(const Arena& arena, double x, double y, double yaw,
                        const CameraConfig& cam) {
    return depth_from_rays(sweep_rays(arena, x, y, yaw, cam), cam);
}

PixelImage render_pixel(const Arena& arena, double x, double y, double yaw,
                        const CameraConfig& cam) {
    return pixel_from_rays(sweep_rays(arena, x, y, yaw, cam), cam);
}

DepthImage depth_noise(const DepthImage& img, double sigma, Rng& rng) {
    if (sigma < 0.0) throw ContractError("depth_noise: sigma must be >= 0");
    if (sigma == 0.0) return img;
    DepthImage out = img;
    for (auto& v : out.data) {
        const double noisy = static_cast<double>(v) + sigma * rng.normal();
        v = static_cast<float>(std::clamp(noisy, 1e-6, static_cast<double>(img.max_range)));
    }
    return out;
}

} // namespace dcuprl
