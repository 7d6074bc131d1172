#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "aclab/attribution.hpp"
#include "aclab/tensor.hpp"

namespace aclab {

struct ImageRgb {
    size_t width = 0;
    size_t height = 0;
    std::vector<uint8_t> pixels;  // row-major RGB

    ImageRgb() = default;
    ImageRgb(size_t w, size_t h, std::array<uint8_t, 3> fill = {255, 255, 255});
    void set(size_t x, size_t y, std::array<uint8_t, 3> rgb);
};

// Non-interlaced 8-bit RGB PNG with a single IDAT stream holding stored
// (uncompressed) deflate blocks, so output bytes are stable across zlib
// versions and reruns.
void writePng(const ImageRgb& image, const std::filesystem::path& path);
std::vector<uint8_t> encodePng(const ImageRgb& image);

// Binary PGM (P5) of a [0,1] grayscale plane.
void writePgm(const Tensor& plane, const std::filesystem::path& path);

// Diverging blue-white-red map: 0 -> (0,0,255), 0.5 -> (255,255,255),
// 1 -> (255,0,0), piecewise-linear, round-half-to-even.
std::array<uint8_t, 3> bwrColor(double v);

// Heatmap of normalized attribution values, one cell per pixel scaled up.
ImageRgb renderHeatmap(const AttributionMap& map, size_t cellSize = 8);

// Minimal line/scatter rasterizers; numerics belong to the CSV outputs.
ImageRgb renderLineChart(const std::vector<double>& xs,
                         const std::vector<double>& ys, size_t width = 640,
                         size_t height = 480);
ImageRgb renderScatter(const Tensor& points,
                       const std::vector<std::string>& groupLabels,
                       size_t width = 720, size_t height = 720);

}  // namespace aclab
