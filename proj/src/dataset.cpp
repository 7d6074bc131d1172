#include "aclab/dataset.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "aclab/error.hpp"
#include "aclab/rng.hpp"

namespace aclab {

namespace {

constexpr uint32_t kImagesMagic = 0x00000803;
constexpr uint32_t kLabelsMagic = 0x00000801;

uint32_t readBigU32(std::istream& in, const std::string& path) {
    unsigned char buf[4];
    in.read(reinterpret_cast<char*>(buf), 4);
    if (!in) throw IoError("idx: truncated file " + path);
    return (static_cast<uint32_t>(buf[0]) << 24) |
           (static_cast<uint32_t>(buf[1]) << 16) |
           (static_cast<uint32_t>(buf[2]) << 8) | static_cast<uint32_t>(buf[3]);
}

void writeBigU32(std::ostream& out, uint32_t v) {
    unsigned char buf[4] = {static_cast<unsigned char>(v >> 24),
                            static_cast<unsigned char>(v >> 16),
                            static_cast<unsigned char>(v >> 8),
                            static_cast<unsigned char>(v)};
    out.write(reinterpret_cast<const char*>(buf), 4);
}

std::vector<unsigned char> readBytes(std::istream& in, size_t n,
                                     const std::string& path) {
    std::vector<unsigned char> bytes(n);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<long>(n));
    if (static_cast<size_t>(in.gcount()) != n) {
        throw IoError("idx: truncated file " + path);
    }
    return bytes;
}

}  // namespace

std::array<size_t, 3> Dataset::imageShape() const {
    if (images.rank() != 4) {
        throw std::invalid_argument("dataset: images must be (n,c,h,w), got " +
                                    images.shapeString());
    }
    return {images.shape()[1], images.shape()[2], images.shape()[3]};
}

Tensor Dataset::image(size_t index) const {
    if (index >= count()) {
        throw std::invalid_argument("dataset: image index " +
                                    std::to_string(index) + " out of range");
    }
    const auto [c, h, w] = imageShape();
    const size_t stride = c * h * w;
    Tensor out({c, h, w});
    std::memcpy(out.data(), images.data() + index * stride,
                stride * sizeof(double));
    return out;
}

void Dataset::validate(int classCount) const {
    if (images.rank() != 4 || images.shape()[0] != labels.size()) {
        throw std::invalid_argument(
            "dataset: images " + images.shapeString() + " inconsistent with " +
            std::to_string(labels.size()) + " labels");
    }
    for (double v : images.values()) {
        if (v < 0.0 || v > 1.0) {
            throw std::invalid_argument("dataset: pixel out of [0,1] range");
        }
    }
    for (int l : labels) {
        if (l < 0 || (classCount >= 0 && l >= classCount)) {
            throw std::invalid_argument("dataset: label " + std::to_string(l) +
                                        " out of range");
        }
    }
}

Dataset loadIdx(const std::filesystem::path& imagesPath,
                const std::filesystem::path& labelsPath,
                const std::string& name) {
    std::ifstream imgFile(imagesPath, std::ios::binary);
    if (!imgFile) throw IoError("idx: cannot open " + imagesPath.string());
    const uint32_t imgMagic = readBigU32(imgFile, imagesPath.string());
    if (imgMagic != kImagesMagic) {
        throw IoError("idx: bad image magic number in " + imagesPath.string());
    }
    const size_t n = readBigU32(imgFile, imagesPath.string());
    const size_t h = readBigU32(imgFile, imagesPath.string());
    const size_t w = readBigU32(imgFile, imagesPath.string());
    const auto pixels = readBytes(imgFile, n * h * w, imagesPath.string());

    std::ifstream labFile(labelsPath, std::ios::binary);
    if (!labFile) throw IoError("idx: cannot open " + labelsPath.string());
    const uint32_t labMagic = readBigU32(labFile, labelsPath.string());
    if (labMagic != kLabelsMagic) {
        throw IoError("idx: bad label magic number in " + labelsPath.string());
    }
    const size_t labCount = readBigU32(labFile, labelsPath.string());
    if (labCount != n) {
        throw IoError("idx: image/label count mismatch (" + std::to_string(n) +
                      " images vs " + std::to_string(labCount) + " labels)");
    }
    const auto labelBytes = readBytes(labFile, labCount, labelsPath.string());

    Dataset data;
    data.name = name.empty() ? imagesPath.stem().string() : name;
    data.images = Tensor({n, 1, h, w});
    for (size_t i = 0; i < pixels.size(); ++i) {
        data.images[i] = static_cast<double>(pixels[i]) / 255.0;
    }
    data.labels.assign(labelBytes.begin(), labelBytes.end());
    return data;
}

void saveIdx(const Dataset& data, const std::filesystem::path& imagesPath,
             const std::filesystem::path& labelsPath) {
    const auto [c, h, w] = data.imageShape();
    if (c != 1) {
        throw std::invalid_argument(
            "idx: only single-channel datasets serialize to IDX, got channels=" +
            std::to_string(c));
    }
    std::ofstream imgFile(imagesPath, std::ios::binary);
    if (!imgFile) throw IoError("idx: cannot write " + imagesPath.string());
    writeBigU32(imgFile, kImagesMagic);
    writeBigU32(imgFile, static_cast<uint32_t>(data.count()));
    writeBigU32(imgFile, static_cast<uint32_t>(h));
    writeBigU32(imgFile, static_cast<uint32_t>(w));
    std::vector<unsigned char> bytes(data.images.size());
    for (size_t i = 0; i < bytes.size(); ++i) {
        const double v = data.images[i];
        bytes[i] = static_cast<unsigned char>(
            std::min(255.0, std::max(0.0, std::nearbyint(v * 255.0))));
    }
    imgFile.write(reinterpret_cast<const char*>(bytes.data()),
                  static_cast<long>(bytes.size()));

    std::ofstream labFile(labelsPath, std::ios::binary);
    if (!labFile) throw IoError("idx: cannot write " + labelsPath.string());
    writeBigU32(labFile, kLabelsMagic);
    writeBigU32(labFile, static_cast<uint32_t>(data.count()));
    for (int l : data.labels) {
        const unsigned char b = static_cast<unsigned char>(l);
        labFile.write(reinterpret_cast<const char*>(&b), 1);
    }
}

Dataset loadRawRgbDir(const std::filesystem::path& dir, size_t width,
                      size_t height) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) {
        throw IoError("raw-rgb: not a directory: " + dir.string());
    }
    struct Entry {
        size_t index;
        int label;
        fs::path path;
    };
    std::vector<Entry> entries;
    for (const auto& item : fs::directory_iterator(dir)) {
        if (!item.is_regular_file() || item.path().extension() != ".rgb")
            continue;
        const std::string stem = item.path().stem().string();
        const auto sep = stem.find('_');
        if (sep == std::string::npos) {
            throw IoError("raw-rgb: file name not <index>_<label>.rgb: " +
                          item.path().string());
        }
        try {
            entries.push_back({std::stoul(stem.substr(0, sep)),
                               std::stoi(stem.substr(sep + 1)), item.path()});
        } catch (const std::exception&) {
            throw IoError("raw-rgb: file name not <index>_<label>.rgb: " +
                          item.path().string());
        }
    }
    if (entries.empty()) {
        throw IoError("raw-rgb: no .rgb files in " + dir.string());
    }
    std::sort(entries.begin(), entries.end(),
              [](const Entry& a, const Entry& b) { return a.index < b.index; });

    const size_t n = entries.size();
    const size_t bytesPerImage = 3 * width * height;
    Dataset data;
    data.name = dir.filename().string();
    data.images = Tensor({n, 3, height, width});
    data.labels.resize(n);
    for (size_t i = 0; i < n; ++i) {
        std::ifstream f(entries[i].path, std::ios::binary);
        if (!f) throw IoError("raw-rgb: cannot open " + entries[i].path.string());
        const auto bytes = readBytes(f, bytesPerImage, entries[i].path.string());
        char probe;
        if (f.read(&probe, 1)) {
            throw IoError("raw-rgb: file larger than " + std::to_string(width) +
                          "x" + std::to_string(height) + " RGB: " +
                          entries[i].path.string());
        }
        // Interleaved RGB on disk, planar (c,h,w) in memory.
        double* base = data.images.data() + i * bytesPerImage;
        for (size_t px = 0; px < width * height; ++px) {
            for (size_t ch = 0; ch < 3; ++ch) {
                base[ch * width * height + px] =
                    static_cast<double>(bytes[px * 3 + ch]) / 255.0;
            }
        }
        data.labels[i] = entries[i].label;
    }
    return data;
}

std::vector<size_t> subsampleIndices(size_t populationSize, size_t n,
                                     uint64_t seed) {
    if (n > populationSize) {
        throw std::invalid_argument(
            "subsample: requested " + std::to_string(n) + " of " +
            std::to_string(populationSize) + " items");
    }
    std::vector<size_t> pool(populationSize);
    for (size_t i = 0; i < populationSize; ++i) pool[i] = i;
    // Partial Fisher-Yates: the first n slots are the sample, in draw order.
    for (size_t i = 0; i < n; ++i) {
        const size_t j =
            i + static_cast<size_t>(rng::below(populationSize - i, seed,
                                               rng::streams::kSubsample, i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(n);
    return pool;
}

Dataset subsample(const Dataset& data, size_t n, uint64_t seed) {
    const auto indices = subsampleIndices(data.count(), n, seed);
    const auto [c, h, w] = data.imageShape();
    const size_t stride = c * h * w;
    Dataset out;
    out.name = data.name + "/sub" + std::to_string(n);
    out.images = Tensor({n, c, h, w});
    out.labels.resize(n);
    for (size_t i = 0; i < n; ++i) {
        std::memcpy(out.images.data() + i * stride,
                    data.images.data() + indices[i] * stride,
                    stride * sizeof(double));
        out.labels[i] = data.labels[indices[i]];
    }
    return out;
}

}  // namespace aclab
