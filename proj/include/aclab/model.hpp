#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "aclab/dataset.hpp"
#include "aclab/tape.hpp"
#include "aclab/tensor.hpp"

namespace aclab {

// Which scalar f(x,y) input gradients differentiate.
enum class ScoreMode { Logit, LogProbability };

ScoreMode scoreModeFromString(const std::string& s);
std::string toString(ScoreMode mode);

struct LayerSpec {
    enum class Kind { Conv, Relu, MaxPool, Dense };
    Kind kind = Kind::Relu;
    size_t units = 0;   // Conv: output channels; Dense: output width
    size_t kernel = 0;  // Conv only, odd
};

struct ModelConfig {
    std::array<size_t, 3> inputShape{1, 28, 28};  // (channels, height, width)
    std::vector<LayerSpec> layers;
    size_t classCount = 10;
    uint64_t seed = 0;

    // conv3x3x8 / relu / maxpool2 / conv3x3x16 / relu / maxpool2 /
    // dense 64 / relu / dense classCount.
    static ModelConfig reference(std::array<size_t, 3> inputShape,
                                 size_t classCount, uint64_t seed);

    // Walks the shape chain from inputShape to classCount; throws on an
    // inconsistent configuration.
    void validate() const;

    // Width of the activation immediately before the final dense layer.
    size_t penultimateWidth() const;
};

struct TrainMeta {
    double epochsTrained = 0.0;
    double trainAccuracy = -1.0;  // -1 when not evaluated
    double testAccuracy = -1.0;
};

// Immutable snapshot of model parameters; safe to share across threads.
struct Checkpoint {
    ModelConfig config;
    std::vector<std::pair<std::string, Tensor>> parameters;
    TrainMeta meta;
    std::string digest;  // sha256 of the serialized form

    const Tensor& param(const std::string& name) const;
    // Checks every named parameter shape against the config chain.
    void validateParameters() const;
};

struct AugmentSpec {
    std::array<double, 2> gaussianSigmaRange{0.0, 0.0};
    std::array<double, 2> luminanceRange{1.0, 1.0};
    void validate() const;
};

struct TrainSpec {
    double learningRate = 1e-3;
    size_t batchSize = 8;
    // Exactly one schedule: full passes when epochs > 0, otherwise a fixed
    // number of batches (0 batches is a valid no-op fine-tune).
    size_t epochs = 0;
    size_t batchCount = 0;
    std::optional<AugmentSpec> augmentation;
    uint64_t seed = 0;
    void validate() const;
};

struct TrainStats {
    std::vector<double> epochMeanLoss;
};

// Fan-in-scaled normal initialization, deterministic in config.seed.
Checkpoint initModel(const ModelConfig& config);

// Plain SGD on softmax cross-entropy. Deterministic in spec.seed; per-image
// augmentation draws are keyed by (epoch, dataset index) so the trajectory
// is independent of batch partitioning details.
Checkpoint train(const Checkpoint& start, const Dataset& data,
                 const TrainSpec& spec, const Dataset* evalData = nullptr,
                 TrainStats* stats = nullptr);

// Softmax class probabilities; nonnegative, summing to 1.
Tensor predict(const Checkpoint& ckpt, const Tensor& x);

// Activation vector of the layer immediately before the final dense layer.
Tensor embedding(const Checkpoint& ckpt, const Tensor& x);

// d f(x,y) / dx with f per scoreMode; same shape as x.
Tensor inputGradient(const Checkpoint& ckpt, const Tensor& x, int classIndex,
                     ScoreMode mode = ScoreMode::Logit);

// Fraction of correct argmax predictions; cap > 0 limits evaluated items.
double accuracy(const Checkpoint& ckpt, const Dataset& data, size_t cap = 0);

// Applies the augmentation draw for (epoch, imageIndex); exposed for tests.
Tensor augmentImage(const Tensor& x, const AugmentSpec& aug, uint64_t seed,
                    uint64_t epoch, uint64_t imageIndex);

// Checkpoint container: "ACLB" magic, u16 version, u32-length-prefixed JSON
// header (config, trainMeta, parameter manifest), then raw little-endian
// f64 blocks in manifest order. Bit-exact round-trip.
std::vector<uint8_t> serializeCheckpoint(const Checkpoint& ckpt);
Checkpoint deserializeCheckpoint(const std::vector<uint8_t>& bytes);
void saveCheckpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint loadCheckpoint(const std::filesystem::path& path);

// Shared forward-pass builder over a tape.
struct ForwardNodes {
    Tape::NodeId input = -1;
    Tape::NodeId logits = -1;
    Tape::NodeId penultimate = -1;
    std::vector<std::pair<std::string, Tape::NodeId>> params;
};
ForwardNodes buildForward(Tape& tape, const Checkpoint& ckpt, const Tensor& x,
                          bool trackInput, bool trackParams);

}  // namespace aclab
