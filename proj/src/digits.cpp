#include "aclab/digits.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "aclab/rng.hpp"

namespace aclab {

namespace {

constexpr size_t kSide = 28;
constexpr double kPi = 3.14159265358979323846;

struct Pt {
    double x, y;
};

using Polyline = std::vector<Pt>;

Polyline arc(double cx, double cy, double rx, double ry, double degFrom,
             double degTo, int segments = 18) {
    Polyline line;
    line.reserve(segments + 1);
    for (int i = 0; i <= segments; ++i) {
        const double t =
            (degFrom + (degTo - degFrom) * i / segments) * kPi / 180.0;
        line.push_back({cx + rx * std::cos(t), cy + ry * std::sin(t)});
    }
    return line;
}

// Stroke skeletons in unit coordinates, y growing downward.
std::vector<Polyline> glyphStrokes(int digit) {
    switch (digit) {
        case 0:
            return {arc(0.5, 0.5, 0.19, 0.30, 0, 360, 28)};
        case 1:
            return {{{0.38, 0.30}, {0.52, 0.18}, {0.52, 0.82}}};
        case 2: {
            auto top = arc(0.5, 0.34, 0.17, 0.16, 180, 372);
            top.push_back({0.33, 0.82});
            return {top, {{0.33, 0.82}, {0.70, 0.82}}};
        }
        case 3:
            return {arc(0.5, 0.34, 0.16, 0.15, 195, 450),
                    arc(0.5, 0.65, 0.17, 0.16, 270, 525)};
        case 4:
            return {{{0.63, 0.18}, {0.63, 0.82}},
                    {{0.63, 0.18}, {0.30, 0.60}, {0.74, 0.60}}};
        case 5:
            return {{{0.68, 0.18}, {0.36, 0.18}, {0.34, 0.46}},
                    arc(0.48, 0.62, 0.19, 0.19, 235, 525)};
        case 6:
            return {arc(0.70, 0.63, 0.35, 0.45, 195, 260),
                    arc(0.50, 0.66, 0.16, 0.15, 0, 360, 24)};
        case 7:
            return {{{0.30, 0.18}, {0.70, 0.18}, {0.44, 0.82}},
                    {{0.38, 0.50}, {0.62, 0.50}}};
        case 8:
            return {arc(0.5, 0.33, 0.15, 0.14, 0, 360, 24),
                    arc(0.5, 0.66, 0.17, 0.16, 0, 360, 24)};
        case 9:
            return {arc(0.5, 0.34, 0.16, 0.15, 0, 360, 24),
                    arc(0.25, 0.50, 0.41, 0.35, -20, 55)};
        default:
            throw std::invalid_argument("digits: class out of range");
    }
}

double segmentDistance(const Pt& p, const Pt& a, const Pt& b) {
    const double vx = b.x - a.x, vy = b.y - a.y;
    const double wx = p.x - a.x, wy = p.y - a.y;
    const double vv = vx * vx + vy * vy;
    double t = vv > 0.0 ? (wx * vx + wy * vy) / vv : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double dx = p.x - (a.x + t * vx), dy = p.y - (a.y + t * vy);
    return std::sqrt(dx * dx + dy * dy);
}

}  // namespace

Dataset synthesizeDigits(size_t count, uint64_t seed, const DigitStyle& style) {
    Dataset data;
    data.name = "digits-" + std::to_string(count);
    data.images = Tensor({count, 1, kSide, kSide});
    data.labels.resize(count);

    constexpr uint64_t s = rng::streams::kDigits;
    for (size_t img = 0; img < count; ++img) {
        const int label = static_cast<int>(rng::below(10, seed, s, img, 0));
        data.labels[img] = label;

        const double angle = rng::uniformRange(-0.18, 0.18, seed, s, img, 1);
        const double zoom = rng::uniformRange(0.85, 1.12, seed, s, img, 2);
        const double tx = rng::uniformRange(-0.08, 0.08, seed, s, img, 3);
        const double ty = rng::uniformRange(-0.08, 0.08, seed, s, img, 4);
        const double thickness =
            rng::uniformRange(0.035, 0.055, seed, s, img, 5);
        const double ink = rng::uniformRange(style.minInk, 1.0, seed, s, img, 6);
        const double bgAmp = rng::uniformRange(0.3 * style.backgroundAmplitude,
                                               style.backgroundAmplitude, seed,
                                               s, img, 7);

        const double ca = std::cos(angle), sa = std::sin(angle);
        auto warp = [&](Pt p) -> Pt {
            const double dx = p.x - 0.5, dy = p.y - 0.5;
            return {0.5 + zoom * (ca * dx - sa * dy) + tx,
                    0.5 + zoom * (sa * dx + ca * dy) + ty};
        };

        std::vector<Polyline> strokes = glyphStrokes(label);
        for (auto& stroke : strokes) {
            for (auto& pt : stroke) pt = warp(pt);
        }

        // Smooth background: bilinear interpolation of a coarse noise grid.
        constexpr size_t kGrid = 7;
        std::array<double, kGrid * kGrid> grid{};
        for (size_t g = 0; g < grid.size(); ++g) {
            grid[g] = rng::uniform01(seed, s, img, 100 + g);
        }

        double* pixels = data.images.data() + img * kSide * kSide;
        constexpr double edge = 0.02;
        for (size_t py = 0; py < kSide; ++py) {
            for (size_t px = 0; px < kSide; ++px) {
                const Pt p = {(px + 0.5) / kSide, (py + 0.5) / kSide};
                double dist = 1e9;
                for (const auto& stroke : strokes) {
                    for (size_t i = 0; i + 1 < stroke.size(); ++i) {
                        dist = std::min(
                            dist, segmentDistance(p, stroke[i], stroke[i + 1]));
                    }
                }
                const double glyph =
                    std::clamp((thickness - dist) / edge, 0.0, 1.0);

                const double gx = p.x * (kGrid - 1), gy = p.y * (kGrid - 1);
                const size_t x0 = std::min<size_t>(kGrid - 2, gx);
                const size_t y0 = std::min<size_t>(kGrid - 2, gy);
                const double fx = gx - x0, fy = gy - y0;
                const double bg =
                    (1 - fy) * ((1 - fx) * grid[y0 * kGrid + x0] +
                                fx * grid[y0 * kGrid + x0 + 1]) +
                    fy * ((1 - fx) * grid[(y0 + 1) * kGrid + x0] +
                          fx * grid[(y0 + 1) * kGrid + x0 + 1]);
                const double noise =
                    style.speckle *
                    rng::uniform01(seed, s, img, 1000 + py * kSide + px);

                double v = ink * glyph + bgAmp * bg * (1.0 - glyph) + noise;
                v = std::clamp(v, 0.0, 1.0);
                pixels[py * kSide + px] = std::nearbyint(v * 255.0) / 255.0;
            }
        }
    }
    return data;
}

}  // namespace aclab
