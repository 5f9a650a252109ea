#pragma once
#include <string>

#include "dcuprl/camera.hpp"

namespace dcuprl {

/**
 * 16-bit binary PGM (P5, maxval 65535, big-endian samples per the format).
 * Depth values are quantized as round(d / max_range * 65535).
 */
void write_depth_pgm(const std::string& path, const DepthImage& img);
DepthImage read_depth_pgm(const std::string& path, double max_range);

/// Pixel images are widened to 16-bit (v * 257) so both dumps share one format.
void write_pixel_pgm(const std::string& path, const PixelImage& img);

} // namespace dcuprl
