#include "aclab/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>

#include "aclab/error.hpp"

namespace aclab {

namespace {

uint32_t crc32Of(const uint8_t* data, size_t length, uint32_t crc = 0) {
    static const auto table = [] {
        std::array<uint32_t, 256> t{};
        for (uint32_t i = 0; i < 256; ++i) {
            uint32_t c = i;
            for (int k = 0; k < 8; ++k) {
                c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
            }
            t[i] = c;
        }
        return t;
    }();
    crc ^= 0xFFFFFFFFu;
    for (size_t i = 0; i < length; ++i) {
        crc = table[(crc ^ data[i]) & 0xFF] ^ (crc >> 8);
    }
    return crc ^ 0xFFFFFFFFu;
}

uint32_t adler32Of(const uint8_t* data, size_t length) {
    uint32_t a = 1, b = 0;
    for (size_t i = 0; i < length; ++i) {
        a = (a + data[i]) % 65521u;
        b = (b + a) % 65521u;
    }
    return (b << 16) | a;
}

void pushBigU32(std::vector<uint8_t>& out, uint32_t v) {
    out.push_back(static_cast<uint8_t>(v >> 24));
    out.push_back(static_cast<uint8_t>(v >> 16));
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v));
}

void pushChunk(std::vector<uint8_t>& out, const char type[4],
               const std::vector<uint8_t>& data) {
    pushBigU32(out, static_cast<uint32_t>(data.size()));
    const size_t typeAt = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), data.begin(), data.end());
    pushBigU32(out, crc32Of(out.data() + typeAt, 4 + data.size()));
}

uint8_t toByte(double v) {
    return static_cast<uint8_t>(
        std::min(255.0, std::max(0.0, std::nearbyint(v * 255.0))));
}

}  // namespace

ImageRgb::ImageRgb(size_t w, size_t h, std::array<uint8_t, 3> fill)
    : width(w), height(h), pixels(w * h * 3) {
    for (size_t i = 0; i < w * h; ++i) {
        pixels[i * 3] = fill[0];
        pixels[i * 3 + 1] = fill[1];
        pixels[i * 3 + 2] = fill[2];
    }
}

void ImageRgb::set(size_t x, size_t y, std::array<uint8_t, 3> rgb) {
    if (x >= width || y >= height) return;
    const size_t at = (y * width + x) * 3;
    pixels[at] = rgb[0];
    pixels[at + 1] = rgb[1];
    pixels[at + 2] = rgb[2];
}

std::vector<uint8_t> encodePng(const ImageRgb& image) {
    if (image.width == 0 || image.height == 0 ||
        image.pixels.size() != image.width * image.height * 3) {
        throw std::invalid_argument("png: inconsistent image buffer");
    }
    std::vector<uint8_t> out = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};

    std::vector<uint8_t> ihdr;
    pushBigU32(ihdr, static_cast<uint32_t>(image.width));
    pushBigU32(ihdr, static_cast<uint32_t>(image.height));
    ihdr.push_back(8);  // bit depth
    ihdr.push_back(2);  // color type RGB
    ihdr.push_back(0);  // compression
    ihdr.push_back(0);  // filter
    ihdr.push_back(0);  // non-interlaced
    pushChunk(out, "IHDR", ihdr);

    // Scanlines with filter byte 0.
    const size_t rowBytes = image.width * 3;
    std::vector<uint8_t> rawStream;
    rawStream.reserve(image.height * (rowBytes + 1));
    for (size_t y = 0; y < image.height; ++y) {
        rawStream.push_back(0);
        rawStream.insert(rawStream.end(),
                         image.pixels.begin() + y * rowBytes,
                         image.pixels.begin() + (y + 1) * rowBytes);
    }

    // zlib wrapper around stored deflate blocks.
    std::vector<uint8_t> idat = {0x78, 0x01};
    size_t offset = 0;
    do {
        const size_t take = std::min<size_t>(65535, rawStream.size() - offset);
        const bool final = offset + take == rawStream.size();
        idat.push_back(final ? 0x01 : 0x00);
        idat.push_back(static_cast<uint8_t>(take & 0xFF));
        idat.push_back(static_cast<uint8_t>(take >> 8));
        idat.push_back(static_cast<uint8_t>(~take & 0xFF));
        idat.push_back(static_cast<uint8_t>((~take >> 8) & 0xFF));
        idat.insert(idat.end(), rawStream.begin() + offset,
                    rawStream.begin() + offset + take);
        offset += take;
    } while (offset < rawStream.size());
    pushBigU32(idat, adler32Of(rawStream.data(), rawStream.size()));
    pushChunk(out, "IDAT", idat);

    pushChunk(out, "IEND", {});
    return out;
}

void writePng(const ImageRgb& image, const std::filesystem::path& path) {
    const auto bytes = encodePng(image);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("png: cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<long>(bytes.size()));
    if (!out) throw IoError("png: write failed for " + path.string());
}

void writePgm(const Tensor& plane, const std::filesystem::path& path) {
    if (plane.rank() != 2) {
        throw std::invalid_argument("pgm: expected (h,w) plane, got " +
                                    plane.shapeString());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("pgm: cannot write " + path.string());
    out << "P5\n" << plane.shape()[1] << ' ' << plane.shape()[0] << "\n255\n";
    for (double v : plane.values()) {
        const uint8_t b = toByte(v);
        out.write(reinterpret_cast<const char*>(&b), 1);
    }
    if (!out) throw IoError("pgm: write failed for " + path.string());
}

std::array<uint8_t, 3> bwrColor(double v) {
    v = std::clamp(v, 0.0, 1.0);
    if (v <= 0.5) {
        const uint8_t ramp = toByte(v * 2.0);
        return {ramp, ramp, 255};
    }
    const uint8_t ramp = toByte((1.0 - v) * 2.0);
    return {255, ramp, ramp};
}

ImageRgb renderHeatmap(const AttributionMap& map, size_t cellSize) {
    const size_t h = map.values.shape()[0], w = map.values.shape()[1];
    ImageRgb image(w * cellSize, h * cellSize);
    for (size_t y = 0; y < h; ++y) {
        for (size_t x = 0; x < w; ++x) {
            const auto rgb = bwrColor(map.values[y * w + x]);
            for (size_t dy = 0; dy < cellSize; ++dy) {
                for (size_t dx = 0; dx < cellSize; ++dx) {
                    image.set(x * cellSize + dx, y * cellSize + dy, rgb);
                }
            }
        }
    }
    return image;
}

namespace {

struct Frame {
    double xLo, xHi, yLo, yHi;
    size_t width, height, margin;

    size_t px(double x) const {
        const double t = xHi > xLo ? (x - xLo) / (xHi - xLo) : 0.5;
        return margin + static_cast<size_t>(std::nearbyint(
                            t * static_cast<double>(width - 2 * margin)));
    }
    size_t py(double y) const {
        const double t = yHi > yLo ? (y - yLo) / (yHi - yLo) : 0.5;
        return height - margin -
               static_cast<size_t>(std::nearbyint(
                   t * static_cast<double>(height - 2 * margin)));
    }
};

void drawSegment(ImageRgb& image, long x0, long y0, long x1, long y1,
                 std::array<uint8_t, 3> rgb) {
    const long dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
    const long sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
    long err = dx + dy;
    while (true) {
        if (x0 >= 0 && y0 >= 0) {
            image.set(static_cast<size_t>(x0), static_cast<size_t>(y0), rgb);
        }
        if (x0 == x1 && y0 == y1) break;
        const long e2 = 2 * err;
        if (e2 >= dy) {
            err += dy;
            x0 += sx;
        }
        if (e2 <= dx) {
            err += dx;
            y0 += sy;
        }
    }
}

void drawBox(ImageRgb& image, size_t margin) {
    const std::array<uint8_t, 3> black{0, 0, 0};
    drawSegment(image, margin, margin, image.width - margin, margin, black);
    drawSegment(image, margin, image.height - margin, image.width - margin,
                image.height - margin, black);
    drawSegment(image, margin, margin, margin, image.height - margin, black);
    drawSegment(image, image.width - margin, margin, image.width - margin,
                image.height - margin, black);
}

void drawMarker(ImageRgb& image, size_t cx, size_t cy, size_t radius,
                std::array<uint8_t, 3> rgb) {
    for (size_t dy = 0; dy <= 2 * radius; ++dy) {
        for (size_t dx = 0; dx <= 2 * radius; ++dx) {
            image.set(cx + dx - radius, cy + dy - radius, rgb);
        }
    }
}

constexpr std::array<std::array<uint8_t, 3>, 10> kPalette = {{
    {31, 119, 180},
    {255, 127, 14},
    {44, 160, 44},
    {214, 39, 40},
    {148, 103, 189},
    {140, 86, 75},
    {227, 119, 194},
    {127, 127, 127},
    {188, 189, 34},
    {23, 190, 207},
}};

}  // namespace

ImageRgb renderLineChart(const std::vector<double>& xs,
                         const std::vector<double>& ys, size_t width,
                         size_t height) {
    if (xs.size() != ys.size() || xs.empty()) {
        throw std::invalid_argument("chart: series sizes inconsistent");
    }
    ImageRgb image(width, height);
    const size_t margin = 32;
    drawBox(image, margin);
    Frame frame{*std::min_element(xs.begin(), xs.end()),
                *std::max_element(xs.begin(), xs.end()),
                *std::min_element(ys.begin(), ys.end()),
                *std::max_element(ys.begin(), ys.end()),
                width,
                height,
                margin + 8};
    const std::array<uint8_t, 3> blue{31, 119, 180};
    for (size_t i = 0; i + 1 < xs.size(); ++i) {
        drawSegment(image, frame.px(xs[i]), frame.py(ys[i]),
                    frame.px(xs[i + 1]), frame.py(ys[i + 1]), blue);
    }
    for (size_t i = 0; i < xs.size(); ++i) {
        drawMarker(image, frame.px(xs[i]), frame.py(ys[i]), 2, {214, 39, 40});
    }
    return image;
}

ImageRgb renderScatter(const Tensor& points,
                       const std::vector<std::string>& groupLabels,
                       size_t width, size_t height) {
    if (points.rank() != 2 || points.shape()[1] != 2 ||
        points.shape()[0] != groupLabels.size()) {
        throw std::invalid_argument("chart: bad scatter inputs");
    }
    const size_t n = points.shape()[0];
    ImageRgb image(width, height);
    const size_t margin = 32;
    drawBox(image, margin);

    double xLo = points[0], xHi = points[0], yLo = points[1], yHi = points[1];
    for (size_t i = 0; i < n; ++i) {
        xLo = std::min(xLo, points[i * 2]);
        xHi = std::max(xHi, points[i * 2]);
        yLo = std::min(yLo, points[i * 2 + 1]);
        yHi = std::max(yHi, points[i * 2 + 1]);
    }
    Frame frame{xLo, xHi, yLo, yHi, width, height, margin + 8};

    std::map<std::string, size_t> colorOf;
    for (size_t i = 0; i < n; ++i) {
        const auto [it, inserted] =
            colorOf.try_emplace(groupLabels[i], colorOf.size());
        const auto rgb = kPalette[it->second % kPalette.size()];
        drawMarker(image, frame.px(points[i * 2]), frame.py(points[i * 2 + 1]),
                   1, rgb);
    }

    // Group centroids as larger plus markers.
    std::map<std::string, std::array<double, 3>> sums;
    for (size_t i = 0; i < n; ++i) {
        auto& s = sums[groupLabels[i]];
        s[0] += points[i * 2];
        s[1] += points[i * 2 + 1];
        s[2] += 1.0;
    }
    const std::array<uint8_t, 3> black{0, 0, 0};
    for (const auto& [label, s] : sums) {
        const size_t cx = frame.px(s[0] / s[2]);
        const size_t cy = frame.py(s[1] / s[2]);
        drawSegment(image, cx - 6, cy, cx + 6, cy, black);
        drawSegment(image, cx, cy - 6, cx, cy + 6, black);
    }
    return image;
}

}  // namespace aclab
