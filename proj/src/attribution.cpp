#include "aclab/attribution.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "aclab/error.hpp"
#include "aclab/parallel.hpp"
#include "aclab/rng.hpp"

namespace aclab {

namespace {

using Accum = std::vector<long double>;

// Pairwise tree over [lo, hi) in index order. The shape of the tree depends
// only on the index range, never on thread scheduling.
Accum pairwiseSum(const std::vector<std::vector<double>>& terms, size_t lo,
                  size_t hi) {
    if (hi - lo == 1) {
        const auto& t = terms[lo];
        Accum acc(t.size());
        for (size_t k = 0; k < t.size(); ++k) acc[k] = t[k];
        return acc;
    }
    const size_t mid = lo + (hi - lo) / 2;
    Accum left = pairwiseSum(terms, lo, mid);
    const Accum right = pairwiseSum(terms, mid, hi);
    for (size_t k = 0; k < left.size(); ++k) left[k] += right[k];
    return left;
}

}  // namespace

Tensor channelReduce(const Tensor& g) {
    if (g.rank() != 3) {
        throw std::invalid_argument("channelReduce: expected (c,h,w), got " +
                                    g.shapeString());
    }
    const size_t c = g.shape()[0], h = g.shape()[1], w = g.shape()[2];
    Tensor out({h, w});
    for (size_t ch = 0; ch < c; ++ch) {
        for (size_t k = 0; k < h * w; ++k) {
            const double v = std::fabs(g[ch * h * w + k]);
            if (ch == 0 || v > out[k]) out[k] = v;
        }
    }
    return out;
}

Tensor normalizeMinMax(const Tensor& plane) {
    const double lo = plane.minValue();
    const double hi = plane.maxValue();
    Tensor out(plane.shape());
    if (hi == lo) {
        for (size_t k = 0; k < out.size(); ++k) out[k] = 0.5;
        return out;
    }
    const double range = hi - lo;
    for (size_t k = 0; k < out.size(); ++k) {
        out[k] = (plane[k] - lo) / range;
    }
    return out;
}

AttributionMap normalizeMinMax(AttributionMap m) {
    m.values = normalizeMinMax(m.raw);
    return m;
}

AttributionMap integrate(const Checkpoint& ckpt, const Tensor& x,
                         int classIndex, const SamplerSpec& spec,
                         size_t sampleCount, uint64_t seed,
                         bool multiplyByInput, ScoreMode mode, size_t threads,
                         IntegrationStats* stats) {
    if (sampleCount == 0) {
        throw std::invalid_argument("integrate: sample count must be >= 1");
    }
    spec.validate();
    const SampleStream stream{spec, x, seed, sampleCount};

    // Per-sample gradients land in index-addressed slots; the reduction
    // below is a fixed-order tree, so worker count cannot perturb results.
    std::vector<std::vector<double>> gradients(sampleCount);
    std::vector<double> norms(sampleCount);
    parallelFor(sampleCount, threads, [&](size_t i) {
        const Tensor sample = stream.draw(i);
        Tensor grad = inputGradient(ckpt, sample, classIndex, mode);
        if (!grad.allFinite()) {
            throw std::runtime_error(
                "integrate: non-finite gradient at sample " +
                std::to_string(i));
        }
        norms[i] = grad.l2Norm();
        if (!multiplyByInput) {
            for (size_t k = 0; k < grad.size(); ++k) {
                grad[k] = std::fabs(grad[k]);
            }
        }
        gradients[i] = std::move(grad.values());
    });

    const Accum sum = pairwiseSum(gradients, 0, sampleCount);
    const long double n = static_cast<long double>(sampleCount);

    Tensor mean(x.shape());
    for (size_t k = 0; k < mean.size(); ++k) {
        mean[k] = static_cast<double>(sum[k] / n);
    }

    // Two-pass per-element variance: exactly zero for identical samples,
    // accumulated in fixed sample order.
    long double seTotal = 0.0L;
    {
        std::vector<long double> sqDev(mean.size(), 0.0L);
        for (size_t i = 0; i < sampleCount; ++i) {
            const std::vector<double>& g = gradients[i];
            for (size_t k = 0; k < g.size(); ++k) {
                const long double d = static_cast<long double>(g[k]) - mean[k];
                sqDev[k] += d * d;
            }
        }
        for (size_t k = 0; k < mean.size(); ++k) {
            seTotal += std::sqrt(static_cast<double>(sqDev[k] / (n * n)));
        }
    }

    Tensor gated = mean;
    if (multiplyByInput) {
        for (size_t k = 0; k < gated.size(); ++k) gated[k] = x[k] * gated[k];
    }

    AttributionMap map;
    map.raw = channelReduce(gated);
    map.values = normalizeMinMax(map.raw);
    map.meta.modelId = ckpt.digest;
    map.meta.sampler = spec;
    map.meta.sampleCount = sampleCount;
    map.meta.seed = seed;
    map.meta.multiplyByInput = multiplyByInput;
    map.meta.scoreMode = mode;
    map.meta.classIndex = classIndex;
    map.meta.meanStdError =
        static_cast<double>(seTotal / static_cast<long double>(mean.size()));
    if (stats) stats->sampleGradNorms = std::move(norms);
    return map;
}

void writeAttributionCsv(const AttributionMap& m,
                         const std::filesystem::path& path) {
    std::FILE* f = std::fopen(path.string().c_str(), "wb");
    if (!f) throw IoError("attribution: cannot write " + path.string());
    const size_t h = m.values.shape()[0], w = m.values.shape()[1];
    for (size_t y = 0; y < h; ++y) {
        for (size_t x = 0; x < w; ++x) {
            std::fprintf(f, "%s%.17g", x ? "," : "", m.values[y * w + x]);
        }
        std::fputc('\n', f);
    }
    std::fclose(f);
}

void writeAttributionMetaJson(const AttributionMap& m,
                              const std::filesystem::path& path) {
    nlohmann::json j = {
        {"modelId", m.meta.modelId},
        {"sampler", m.meta.sampler.label()},
        {"sampleCount", m.meta.sampleCount},
        {"seed", m.meta.seed},
        {"multiplyByInput", m.meta.multiplyByInput},
        {"scoreMode", toString(m.meta.scoreMode)},
        {"classIndex", m.meta.classIndex},
        {"meanStdError", m.meta.meanStdError},
        {"rawMin", m.raw.minValue()},
        {"rawMax", m.raw.maxValue()},
    };
    std::ofstream out(path);
    if (!out) throw IoError("attribution: cannot write " + path.string());
    out << j.dump(2) << '\n';
}

}  // namespace aclab
