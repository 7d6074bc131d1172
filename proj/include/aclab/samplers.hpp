#pragma once

#include <cstdint>
#include <string>

#include "aclab/tensor.hpp"

namespace aclab {

enum class SamplerKind { BernoulliDrop, GaussianNoise, LinearScale, Identity };

// Description of a sampling distribution q(x) used to derive samples from an
// input for gradient integration.
struct SamplerSpec {
    SamplerKind kind = SamplerKind::Identity;
    double p = 0.0;            // BernoulliDrop: per-pixel drop probability
    double sigma = 0.0;        // GaussianNoise: stddev in normalized units
    bool clampToRange = true;  // GaussianNoise: clamp samples back to [0,1]

    void validate() const;
    std::string label() const;  // e.g. "bernoulli(p=0.7)"

    bool operator==(const SamplerSpec&) const = default;
};

// Deterministic stream of derived samples. Sample i is a pure function of
// (spec, baseInput, seed, i): draws are keyed per (seed, sample index,
// pixel index), so they do not depend on iteration order or threading.
struct SampleStream {
    SamplerSpec spec;
    Tensor baseInput;
    uint64_t seed = 0;
    size_t count = 1;

    // BernoulliDrop: each pixel site independently zeroed with probability p
    // (all channels of a site jointly). GaussianNoise: x + N(0, sigma^2)
    // i.i.d. per coordinate, optionally clamped to [0,1]. LinearScale:
    // ((i+1)/count) * x, so the last sample is the unscaled input.
    // Identity: x.
    Tensor draw(size_t index) const;
};

// Fraction of coordinates where sample equals base, over the coordinates
// where base is nonzero. Empty support yields 0.
double keptFraction(const Tensor& sample, const Tensor& base);

// Config-file form: "bernoulli:0.7", "gaussian:0.15", "gaussian:0.2:unclamped",
// "linear", "identity".
SamplerSpec parseSamplerSpec(const std::string& token);

}  // namespace aclab
