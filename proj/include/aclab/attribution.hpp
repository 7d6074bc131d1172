#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "aclab/model.hpp"
#include "aclab/samplers.hpp"
#include "aclab/tensor.hpp"

namespace aclab {

struct AttributionMeta {
    std::string modelId;  // checkpoint digest
    SamplerSpec sampler;
    size_t sampleCount = 0;
    uint64_t seed = 0;
    bool multiplyByInput = false;
    ScoreMode scoreMode = ScoreMode::Logit;
    int classIndex = 0;
    double meanStdError = 0.0;  // mean per-pixel standard error of the mean
};

// Per-pixel relevance map. `raw` is the channel-reduced integration result,
// `values` its min-max normalization into [0,1].
struct AttributionMap {
    Tensor values;  // (h, w), in [0,1]
    Tensor raw;     // (h, w), pre-normalization
    AttributionMeta meta;
};

struct IntegrationStats {
    std::vector<double> sampleGradNorms;  // L2 norm of each sample's gradient
};

// Gradient integration over a sample stream: raw = mean_i |grad f(x_i, y)|;
// with multiplyByInput the signed gradients are averaged first and then
// gated by the input, |x * mean_i grad|. Accumulation is a fixed pairwise
// tree in extended precision over sample-index order, so results are
// bit-identical for any worker count and the mean of identical gradients is
// exact. Non-finite sample gradients abort the run.
AttributionMap integrate(const Checkpoint& ckpt, const Tensor& x,
                         int classIndex, const SamplerSpec& spec,
                         size_t sampleCount, uint64_t seed,
                         bool multiplyByInput = false,
                         ScoreMode mode = ScoreMode::Logit, size_t threads = 1,
                         IntegrationStats* stats = nullptr);

// (c,h,w) -> (h,w): per-location maximum of absolute channel values.
Tensor channelReduce(const Tensor& g);

// values = (raw - min) / (max - min); constant maps normalize to all 0.5.
AttributionMap normalizeMinMax(AttributionMap m);
Tensor normalizeMinMax(const Tensor& plane);

// CSV grid (row-major, 17 significant digits) plus JSON meta sidecar.
void writeAttributionCsv(const AttributionMap& m,
                         const std::filesystem::path& path);
void writeAttributionMetaJson(const AttributionMap& m,
                              const std::filesystem::path& path);

}  // namespace aclab
