#pragma once
#include <vector>

#include "dcuprl/arena.hpp"
#include "dcuprl/rng.hpp"

namespace dcuprl {

struct CameraConfig {
    int width = 40;
    int height = 40;
    double fov = 1.5707963267948966; // 90 degrees
    double max_range = 10.0;
    double wall_focal = 1.0; // wall band height constant, meters

    void validate() const;
};

/// Row-major range image in meters; every value is in (0, max_range].
struct DepthImage {
    int width = 0, height = 0;
    float max_range = 0.0f;
    std::vector<float> data;

    float at(int row, int col) const { return data[static_cast<std::size_t>(row) * width + col]; }
    float min_value() const;
};

/// Row-major 8-bit grayscale image (shaded render, no metric semantics).
struct PixelImage {
    int width = 0, height = 0;
    std::vector<std::uint8_t> data;
};

/// Per-column ray sweep from pose (x,y,yaw). Column 0 is the leftmost
/// bearing (+fov/2); distances are clamped to max_range.
struct RaySweep {
    std::vector<double> dist;    // length = width; max_range when nothing hit
    std::vector<float> albedo;   // of the hit primitive, 0 when nothing hit
    std::vector<double> bearing; // column bearing offset relative to yaw
};

RaySweep sweep_rays(const Arena& arena, double x, double y, double yaw, const CameraConfig& cam);

/// Column-raycast depth render. Each column's wall band carries the ray
/// distance; pixels outside the band carry max_range. The band's height
/// is H*f/d_perp with d_perp = d*cos(bearing), the usual flat-wall
/// perspective correction, and is at least one pixel for any actual hit.
DepthImage render_depth(const Arena& arena, double x, double y, double yaw,
                        const CameraConfig& cam);

/// Same geometry, Lambert-style shading: band value is
/// round_half_up(255 * (1 - d/max_range) * albedo); background is 0.
PixelImage render_pixel(const Arena& arena, double x, double y, double yaw,
                        const CameraConfig& cam);

DepthImage depth_from_rays(const RaySweep& rays, const CameraConfig& cam);
PixelImage pixel_from_rays(const RaySweep& rays, const CameraConfig& cam);

/// Additive iid Gaussian range noise, clamped to (0, max_range].
/// sigma = 0 returns the input bit-identically (no RNG draws).
DepthImage depth_noise(const DepthImage& img, double sigma, Rng& rng);

} // namespace dcuprl
