#pragma once

#include <cstdint>

#include "aclab/dataset.hpp"

namespace aclab {

// Rendering controls for the procedural digit corpus.
struct DigitStyle {
    double backgroundAmplitude = 0.15;  // smooth background texture level
    double speckle = 0.02;              // per-pixel noise level
    double minInk = 0.75;               // stroke intensity range low end
};

// Procedurally rendered 28x28 grayscale digit corpus: per-class stroke
// skeletons with random shift/rotation/scale/thickness jitter plus smooth
// background texture. Pixels are quantized to 1/255 steps so an IDX
// round-trip reproduces the in-memory dataset exactly. Deterministic in
// (count, seed, style); every image is an independent function of its index.
Dataset synthesizeDigits(size_t count, uint64_t seed,
                         const DigitStyle& style = {});

}  // namespace aclab
