#include "dcuprl/pgm.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>

#include "dcuprl/tensor.hpp"

namespace dcuprl {
namespace {

void write_p5(const std::string& path, int w, int h, const std::vector<std::uint16_t>& samples) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    out << "P5\n" << w << " " << h << "\n65535\n";
    for (std::uint16_t v : samples) {
        const char bytes[2] = {static_cast<char>(v >> 8), static_cast<char>(v & 0xff)};
        out.write(bytes, 2);
    }
    if (!out) throw ConfigError("write failed: " + path);
}

} // namespace

void write_depth_pgm(const std::string& path, const DepthImage& img) {
    std::vector<std::uint16_t> samples(img.data.size());
    for (std::size_t i = 0; i < img.data.size(); ++i) {
        const double q = std::floor(static_cast<double>(img.data[i]) / img.max_range * 65535.0 + 0.5);
        samples[i] = static_cast<std::uint16_t>(std::min(q, 65535.0));
    }
    write_p5(path, img.width, img.height, samples);
}

void write_pixel_pgm(const std::string& path, const PixelImage& img) {
    std::vector<std::uint16_t> samples(img.data.size());
    for (std::size_t i = 0; i < img.data.size(); ++i)
        samples[i] = static_cast<std::uint16_t>(img.data[i] * 257); // 0..255 -> 0..65535
    write_p5(path, img.width, img.height, samples);
}

DepthImage read_depth_pgm(const std::string& path, double max_range) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open: " + path);
    std::string magic;
    int w, h, maxval;
    in >> magic >> w >> h >> maxval;
    if (magic != "P5" || maxval != 65535)
        throw ConfigError("not a 16-bit P5 PGM: " + path);
    in.get(); // single whitespace after maxval
    DepthImage img;
    img.width = w;
    img.height = h;
    img.max_range = static_cast<float>(max_range);
    img.data.resize(static_cast<std::size_t>(w) * h);
    for (auto& v : img.data) {
        const int hi = in.get(), lo = in.get();
        if (hi < 0 || lo < 0) throw ConfigError("truncated PGM: " + path);
        const auto q = static_cast<std::uint16_t>((hi << 8) | lo);
        v = static_cast<float>(q / 65535.0 * max_range);
    }
    return img;
}

} // namespace dcuprl
