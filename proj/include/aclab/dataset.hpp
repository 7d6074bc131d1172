#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "aclab/tensor.hpp"

namespace aclab {

// Normalized image corpus: pixels in [0,1], labels in [0, classCount).
struct Dataset {
    Tensor images;  // (n, channels, height, width)
    std::vector<int> labels;
    std::string name;

    size_t count() const { return labels.size(); }
    std::array<size_t, 3> imageShape() const;
    Tensor image(size_t index) const;  // copies one (c,h,w) slice

    void validate(int classCount = -1) const;
};

// IDX (MNIST-style) readers/writers. Big-endian u32 magic and dimension
// sizes, then unsigned bytes; 0x00000803 for images, 0x00000801 for labels.
// Pixels are rescaled bytes/255 into [0,1].
Dataset loadIdx(const std::filesystem::path& imagesPath,
                const std::filesystem::path& labelsPath,
                const std::string& name = "");

void saveIdx(const Dataset& data, const std::filesystem::path& imagesPath,
             const std::filesystem::path& labelsPath);

// Raw-RGB directory: files named <index>_<label>.rgb holding header-less
// interleaved 8-bit RGB bytes of fixed width x height.
Dataset loadRawRgbDir(const std::filesystem::path& dir, size_t width,
                      size_t height);

// Deterministic uniform sample of n items without replacement. The result
// order is the draw order; n == count() yields a full permutation.
Dataset subsample(const Dataset& data, size_t n, uint64_t seed);

// Index sequence behind subsample(), exposed for fixtures.
std::vector<size_t> subsampleIndices(size_t populationSize, size_t n,
                                     uint64_t seed);

}  // namespace aclab
