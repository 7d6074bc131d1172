#include "aclab/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "aclab/error.hpp"
#include "aclab/rng.hpp"
#include "aclab/sha256.hpp"

namespace aclab {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little,
              "checkpoint container assumes a little-endian host");

ScoreMode scoreModeFromString(const std::string& s) {
    if (s == "logit") return ScoreMode::Logit;
    if (s == "log-probability") return ScoreMode::LogProbability;
    throw ConfigError("score mode must be 'logit' or 'log-probability', got '" +
                      s + "'");
}

std::string toString(ScoreMode mode) {
    return mode == ScoreMode::Logit ? "logit" : "log-probability";
}

namespace {

const char* kindName(LayerSpec::Kind k) {
    switch (k) {
        case LayerSpec::Kind::Conv: return "conv";
        case LayerSpec::Kind::Relu: return "relu";
        case LayerSpec::Kind::MaxPool: return "maxpool";
        case LayerSpec::Kind::Dense: return "dense";
    }
    return "?";
}

LayerSpec::Kind kindFromName(const std::string& s) {
    if (s == "conv") return LayerSpec::Kind::Conv;
    if (s == "relu") return LayerSpec::Kind::Relu;
    if (s == "maxpool") return LayerSpec::Kind::MaxPool;
    if (s == "dense") return LayerSpec::Kind::Dense;
    throw IoError("checkpoint: unknown layer kind '" + s + "'");
}

struct ParamInfo {
    std::string name;
    std::vector<size_t> shape;
    size_t fanIn;
};

// Walks the layer chain; also yields parameter shapes and the width feeding
// the final dense layer.
struct ChainWalk {
    std::vector<ParamInfo> params;
    size_t penultimateWidth = 0;
};

ChainWalk walkChain(const ModelConfig& cfg) {
    if (cfg.classCount < 2) {
        throw std::invalid_argument("model: classCount must be at least 2");
    }
    if (cfg.layers.empty()) {
        throw std::invalid_argument("model: no layers configured");
    }
    for (size_t d : cfg.inputShape) {
        if (d == 0) throw std::invalid_argument("model: zero input dimension");
    }
    ChainWalk walk;
    bool spatial = true;
    size_t c = cfg.inputShape[0], h = cfg.inputShape[1], w = cfg.inputShape[2];
    size_t width = 0;
    size_t convIndex = 0, denseIndex = 0;
    size_t lastDense = cfg.layers.size();
    for (size_t i = 0; i < cfg.layers.size(); ++i) {
        if (cfg.layers[i].kind == LayerSpec::Kind::Dense) lastDense = i;
    }
    if (lastDense != cfg.layers.size() - 1) {
        throw std::invalid_argument("model: final layer must be dense");
    }

    for (size_t i = 0; i < cfg.layers.size(); ++i) {
        const LayerSpec& layer = cfg.layers[i];
        switch (layer.kind) {
            case LayerSpec::Kind::Conv: {
                if (!spatial) {
                    throw std::invalid_argument(
                        "model: conv after dense in layer chain");
                }
                if (layer.units == 0 || layer.kernel % 2 == 0 ||
                    layer.kernel > std::min(h, w)) {
                    throw std::invalid_argument(
                        "model: invalid conv layer at index " +
                        std::to_string(i));
                }
                ++convIndex;
                const std::string base = "conv" + std::to_string(convIndex);
                walk.params.push_back({base + ".weight",
                                       {layer.units, c, layer.kernel,
                                        layer.kernel},
                                       c * layer.kernel * layer.kernel});
                walk.params.push_back(
                    {base + ".bias", {layer.units}, c * layer.kernel * layer.kernel});
                c = layer.units;
                break;
            }
            case LayerSpec::Kind::Relu:
                break;
            case LayerSpec::Kind::MaxPool: {
                if (!spatial || h < 2 || w < 2) {
                    throw std::invalid_argument(
                        "model: invalid maxpool at index " + std::to_string(i));
                }
                h /= 2;
                w /= 2;
                break;
            }
            case LayerSpec::Kind::Dense: {
                const size_t in = spatial ? c * h * w : width;
                if (layer.units == 0) {
                    throw std::invalid_argument(
                        "model: dense layer with zero units at index " +
                        std::to_string(i));
                }
                if (i == lastDense) walk.penultimateWidth = in;
                ++denseIndex;
                const std::string base = "dense" + std::to_string(denseIndex);
                walk.params.push_back(
                    {base + ".weight", {layer.units, in}, in});
                walk.params.push_back({base + ".bias", {layer.units}, in});
                spatial = false;
                width = layer.units;
                break;
            }
        }
    }
    if (width != cfg.classCount) {
        throw std::invalid_argument(
            "model: final dense width " + std::to_string(width) +
            " does not match classCount " + std::to_string(cfg.classCount));
    }
    return walk;
}

json configToJson(const ModelConfig& cfg) {
    json layers = json::array();
    for (const auto& l : cfg.layers) {
        json j = {{"kind", kindName(l.kind)}};
        if (l.kind == LayerSpec::Kind::Conv) {
            j["units"] = l.units;
            j["kernel"] = l.kernel;
        } else if (l.kind == LayerSpec::Kind::Dense) {
            j["units"] = l.units;
        }
        layers.push_back(j);
    }
    return json{{"inputShape", cfg.inputShape},
                {"layers", layers},
                {"classCount", cfg.classCount},
                {"seed", cfg.seed}};
}

ModelConfig configFromJson(const json& j) {
    ModelConfig cfg;
    const auto shape = j.at("inputShape");
    cfg.inputShape = {shape.at(0).get<size_t>(), shape.at(1).get<size_t>(),
                      shape.at(2).get<size_t>()};
    for (const auto& l : j.at("layers")) {
        LayerSpec spec;
        spec.kind = kindFromName(l.at("kind").get<std::string>());
        if (l.contains("units")) spec.units = l.at("units").get<size_t>();
        if (l.contains("kernel")) spec.kernel = l.at("kernel").get<size_t>();
        cfg.layers.push_back(spec);
    }
    cfg.classCount = j.at("classCount").get<size_t>();
    cfg.seed = j.at("seed").get<uint64_t>();
    return cfg;
}

void checkInputShape(const ModelConfig& cfg, const Tensor& x,
                     const char* what) {
    const std::vector<size_t> expected{cfg.inputShape[0], cfg.inputShape[1],
                                       cfg.inputShape[2]};
    if (x.shape() != expected) {
        throw std::invalid_argument(std::string(what) + ": input " +
                                    x.shapeString() + " does not match model " +
                                    shapeString(expected));
    }
}

}  // namespace

ModelConfig ModelConfig::reference(std::array<size_t, 3> inputShape,
                                   size_t classCount, uint64_t seed) {
    ModelConfig cfg;
    cfg.inputShape = inputShape;
    cfg.classCount = classCount;
    cfg.seed = seed;
    using K = LayerSpec::Kind;
    cfg.layers = {{K::Conv, 8, 3},  {K::Relu, 0, 0}, {K::MaxPool, 0, 0},
                  {K::Conv, 16, 3}, {K::Relu, 0, 0}, {K::MaxPool, 0, 0},
                  {K::Dense, 64, 0}, {K::Relu, 0, 0},
                  {K::Dense, classCount, 0}};
    return cfg;
}

void ModelConfig::validate() const { walkChain(*this); }

size_t ModelConfig::penultimateWidth() const {
    return walkChain(*this).penultimateWidth;
}

const Tensor& Checkpoint::param(const std::string& name) const {
    for (const auto& [n, t] : parameters) {
        if (n == name) return t;
    }
    throw std::invalid_argument("checkpoint: no parameter named '" + name + "'");
}

void Checkpoint::validateParameters() const {
    const ChainWalk walk = walkChain(config);
    if (walk.params.size() != parameters.size()) {
        throw std::invalid_argument(
            "checkpoint: expected " + std::to_string(walk.params.size()) +
            " parameters, found " + std::to_string(parameters.size()));
    }
    for (size_t i = 0; i < parameters.size(); ++i) {
        if (parameters[i].first != walk.params[i].name ||
            parameters[i].second.shape() != walk.params[i].shape) {
            throw std::invalid_argument(
                "checkpoint: parameter '" + parameters[i].first + "' " +
                parameters[i].second.shapeString() + " does not match config " +
                walk.params[i].name + " " + shapeString(walk.params[i].shape));
        }
    }
}

void AugmentSpec::validate() const {
    if (!(0.0 <= gaussianSigmaRange[0] &&
          gaussianSigmaRange[0] <= gaussianSigmaRange[1])) {
        throw std::invalid_argument("augment: bad sigma range");
    }
    if (!(0.0 <= luminanceRange[0] && luminanceRange[0] <= luminanceRange[1])) {
        throw std::invalid_argument("augment: bad luminance range");
    }
}

void TrainSpec::validate() const {
    if (!(learningRate >= 0.0) || !std::isfinite(learningRate)) {
        throw std::invalid_argument("train: learningRate must be nonnegative");
    }
    if (batchSize < 1) {
        throw std::invalid_argument("train: batchSize must be at least 1");
    }
    if (epochs > 0 && batchCount > 0) {
        throw std::invalid_argument(
            "train: specify epochs or batchCount, not both");
    }
    if (augmentation) augmentation->validate();
}

Checkpoint initModel(const ModelConfig& config) {
    const ChainWalk walk = walkChain(config);
    Checkpoint ckpt;
    ckpt.config = config;
    ckpt.parameters.reserve(walk.params.size());
    for (size_t p = 0; p < walk.params.size(); ++p) {
        const ParamInfo& info = walk.params[p];
        Tensor t(info.shape);
        const double scale = 1.0 / std::sqrt(static_cast<double>(info.fanIn));
        for (size_t k = 0; k < t.size(); ++k) {
            t[k] = scale * rng::normal(config.seed, rng::streams::kInit, p, k);
        }
        ckpt.parameters.emplace_back(info.name, std::move(t));
    }
    const auto bytes = serializeCheckpoint(ckpt);
    ckpt.digest = sha256Hex(bytes.data(), bytes.size());
    return ckpt;
}

ForwardNodes buildForward(Tape& tape, const Checkpoint& ckpt, const Tensor& x,
                          bool trackInput, bool trackParams) {
    checkInputShape(ckpt.config, x, "forward");
    ForwardNodes nodes;
    nodes.input = tape.leaf(x, trackInput);
    nodes.params.reserve(ckpt.parameters.size());
    for (const auto& [name, tensor] : ckpt.parameters) {
        nodes.params.emplace_back(name, tape.leaf(tensor, trackParams));
    }

    size_t lastDense = ckpt.config.layers.size();
    for (size_t i = 0; i < ckpt.config.layers.size(); ++i) {
        if (ckpt.config.layers[i].kind == LayerSpec::Kind::Dense) lastDense = i;
    }

    Tape::NodeId current = nodes.input;
    size_t paramCursor = 0;
    for (size_t i = 0; i < ckpt.config.layers.size(); ++i) {
        const LayerSpec& layer = ckpt.config.layers[i];
        switch (layer.kind) {
            case LayerSpec::Kind::Conv: {
                const auto w = nodes.params[paramCursor++].second;
                const auto b = nodes.params[paramCursor++].second;
                current = tape.conv2d(current, w, b);
                break;
            }
            case LayerSpec::Kind::Relu:
                current = tape.relu(current);
                break;
            case LayerSpec::Kind::MaxPool:
                current = tape.maxPool2(current);
                break;
            case LayerSpec::Kind::Dense: {
                if (i == lastDense) nodes.penultimate = current;
                const auto w = nodes.params[paramCursor++].second;
                const auto b = nodes.params[paramCursor++].second;
                current = tape.dense(current, w, b);
                break;
            }
        }
    }
    nodes.logits = current;
    return nodes;
}

Tensor predict(const Checkpoint& ckpt, const Tensor& x) {
    Tape tape;
    const ForwardNodes nodes = buildForward(tape, ckpt, x, false, false);
    const Tensor& logits = tape.value(nodes.logits);
    Tensor probs(logits.shape());
    const double m = logits.maxValue();
    double z = 0.0;
    for (size_t i = 0; i < logits.size(); ++i) {
        probs[i] = std::exp(logits[i] - m);
        z += probs[i];
    }
    for (size_t i = 0; i < probs.size(); ++i) probs[i] /= z;
    return probs;
}

Tensor embedding(const Checkpoint& ckpt, const Tensor& x) {
    Tape tape;
    const ForwardNodes nodes = buildForward(tape, ckpt, x, false, false);
    return tape.value(nodes.penultimate);
}

Tensor inputGradient(const Checkpoint& ckpt, const Tensor& x, int classIndex,
                     ScoreMode mode) {
    if (classIndex < 0 ||
        static_cast<size_t>(classIndex) >= ckpt.config.classCount) {
        throw std::invalid_argument(
            "inputGradient: class " + std::to_string(classIndex) +
            " out of range for " + std::to_string(ckpt.config.classCount) +
            " classes");
    }
    Tape tape;
    const ForwardNodes nodes = buildForward(tape, ckpt, x, true, false);
    Tape::NodeId score;
    if (mode == ScoreMode::Logit) {
        score = tape.selectLogit(nodes.logits, classIndex);
    } else {
        // log p_y == -crossEntropy(logits, y)
        score = tape.scale(tape.softmaxCrossEntropy(nodes.logits, classIndex),
                           -1.0);
    }
    auto grads = tape.backward(score);
    return std::move(grads.byLeaf.at(0).second);
}

double accuracy(const Checkpoint& ckpt, const Dataset& data, size_t cap) {
    const size_t n =
        (cap > 0) ? std::min(cap, data.count()) : data.count();
    if (n == 0) throw std::invalid_argument("accuracy: empty dataset");
    size_t hits = 0;
    for (size_t i = 0; i < n; ++i) {
        const Tensor probs = predict(ckpt, data.image(i));
        size_t best = 0;
        for (size_t k = 1; k < probs.size(); ++k) {
            if (probs[k] > probs[best]) best = k;
        }
        if (static_cast<int>(best) == data.labels[i]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(n);
}

Tensor augmentImage(const Tensor& x, const AugmentSpec& aug, uint64_t seed,
                    uint64_t epoch, uint64_t imageIndex) {
    const double sigma =
        rng::uniformRange(aug.gaussianSigmaRange[0], aug.gaussianSigmaRange[1],
                          seed, rng::streams::kAugmentField, epoch, imageIndex,
                          0);
    const double alpha =
        rng::uniformRange(aug.luminanceRange[0], aug.luminanceRange[1], seed,
                          rng::streams::kAugmentField, epoch, imageIndex, 1);
    const uint64_t noiseSeed =
        rng::word(seed, rng::streams::kAugmentNoise, epoch, imageIndex);
    Tensor out(x.shape());
    for (size_t k = 0; k < x.size(); ++k) {
        const double noise = sigma * rng::normal(noiseSeed, k);
        out[k] = std::clamp(alpha * x[k] + noise, 0.0, 1.0);
    }
    return out;
}

Checkpoint train(const Checkpoint& start, const Dataset& data,
                 const TrainSpec& spec, const Dataset* evalData,
                 TrainStats* stats) {
    spec.validate();
    start.validateParameters();
    if (data.count() == 0) {
        throw std::invalid_argument("train: empty dataset");
    }
    const auto [c, h, w] = data.imageShape();
    if (c != start.config.inputShape[0] || h != start.config.inputShape[1] ||
        w != start.config.inputShape[2]) {
        throw std::invalid_argument("train: dataset images " +
                                    shapeString({c, h, w}) +
                                    " do not match model input " +
                                    shapeString({start.config.inputShape[0],
                                                 start.config.inputShape[1],
                                                 start.config.inputShape[2]}));
    }

    const size_t n = data.count();
    const size_t batchesPerEpoch = (n + spec.batchSize - 1) / spec.batchSize;
    const size_t totalBatches = spec.epochs > 0
                                    ? spec.epochs * batchesPerEpoch
                                    : spec.batchCount;

    std::vector<Tensor> params;
    params.reserve(start.parameters.size());
    for (const auto& [name, tensor] : start.parameters) params.push_back(tensor);

    std::vector<Tensor> gradAccum(params.size());
    std::vector<size_t> order;
    size_t orderEpoch = static_cast<size_t>(-1);

    double epochLossSum = 0.0;
    size_t epochLossCount = 0;
    std::vector<double> epochLosses;

    Checkpoint work = start;  // reuse config; parameters swapped in per batch

    for (size_t batch = 0; batch < totalBatches; ++batch) {
        const size_t epoch = batch / batchesPerEpoch;
        if (epoch != orderEpoch) {
            if (orderEpoch != static_cast<size_t>(-1) && epochLossCount > 0) {
                epochLosses.push_back(epochLossSum / epochLossCount);
                epochLossSum = 0.0;
                epochLossCount = 0;
            }
            order = subsampleIndices(
                n, n, rng::word(spec.seed, rng::streams::kShuffle, epoch));
            orderEpoch = epoch;
        }
        const size_t lo = (batch % batchesPerEpoch) * spec.batchSize;
        const size_t hi = std::min(n, lo + spec.batchSize);
        const size_t batchN = hi - lo;

        for (size_t p = 0; p < params.size(); ++p) {
            gradAccum[p] = Tensor(params[p].shape());
            work.parameters[p].second = params[p];
        }

        for (size_t pos = lo; pos < hi; ++pos) {
            const size_t idx = order[pos];
            Tensor x = data.image(idx);
            if (spec.augmentation) {
                x = augmentImage(x, *spec.augmentation, spec.seed, epoch, idx);
            }
            Tape tape;
            const ForwardNodes nodes = buildForward(tape, work, x, false, true);
            const Tape::NodeId loss =
                tape.softmaxCrossEntropy(nodes.logits, data.labels[idx]);
            epochLossSum += tape.value(loss)[0];
            ++epochLossCount;
            const auto grads = tape.backward(loss);
            for (size_t p = 0; p < params.size(); ++p) {
                const Tensor& g = grads.byLeaf[p].second;
                for (size_t k = 0; k < g.size(); ++k) gradAccum[p][k] += g[k];
            }
        }

        const double step = spec.learningRate / static_cast<double>(batchN);
        for (size_t p = 0; p < params.size(); ++p) {
            for (size_t k = 0; k < params[p].size(); ++k) {
                params[p][k] -= step * gradAccum[p][k];
            }
        }
    }
    if (epochLossCount > 0) {
        epochLosses.push_back(epochLossSum / epochLossCount);
    }

    Checkpoint result = start;
    for (size_t p = 0; p < params.size(); ++p) {
        if (!params[p].allFinite()) {
            throw std::runtime_error("train: parameters diverged (non-finite)");
        }
        result.parameters[p].second = std::move(params[p]);
    }
    result.meta.epochsTrained =
        start.meta.epochsTrained +
        static_cast<double>(totalBatches) / static_cast<double>(batchesPerEpoch);
    result.meta.trainAccuracy = accuracy(result, data, 2000);
    result.meta.testAccuracy =
        evalData ? accuracy(result, *evalData, 0) : -1.0;
    const auto bytes = serializeCheckpoint(result);
    result.digest = sha256Hex(bytes.data(), bytes.size());
    if (stats) stats->epochMeanLoss = std::move(epochLosses);
    return result;
}

std::vector<uint8_t> serializeCheckpoint(const Checkpoint& ckpt) {
    json manifest = json::array();
    size_t offset = 0;
    for (const auto& [name, tensor] : ckpt.parameters) {
        manifest.push_back(
            {{"name", name}, {"shape", tensor.shape()}, {"offset", offset}});
        offset += tensor.size() * sizeof(double);
    }
    const json header = {
        {"config", configToJson(ckpt.config)},
        {"trainMeta",
         {{"epochsTrained", ckpt.meta.epochsTrained},
          {"trainAccuracy", ckpt.meta.trainAccuracy},
          {"testAccuracy", ckpt.meta.testAccuracy}}},
        {"parameters", manifest}};
    const std::string headerText = header.dump();

    std::vector<uint8_t> bytes;
    bytes.reserve(4 + 2 + 4 + headerText.size() + offset);
    const char magic[4] = {'A', 'C', 'L', 'B'};
    bytes.insert(bytes.end(), magic, magic + 4);
    const uint16_t version = 1;
    bytes.push_back(static_cast<uint8_t>(version & 0xFF));
    bytes.push_back(static_cast<uint8_t>(version >> 8));
    const uint32_t headerLen = static_cast<uint32_t>(headerText.size());
    for (int i = 0; i < 4; ++i) {
        bytes.push_back(static_cast<uint8_t>(headerLen >> (8 * i)));
    }
    bytes.insert(bytes.end(), headerText.begin(), headerText.end());
    for (const auto& [name, tensor] : ckpt.parameters) {
        const size_t at = bytes.size();
        bytes.resize(at + tensor.size() * sizeof(double));
        std::memcpy(bytes.data() + at, tensor.data(),
                    tensor.size() * sizeof(double));
    }
    return bytes;
}

Checkpoint deserializeCheckpoint(const std::vector<uint8_t>& bytes) {
    if (bytes.size() < 10 || std::memcmp(bytes.data(), "ACLB", 4) != 0) {
        throw IoError("checkpoint: bad magic bytes");
    }
    const uint16_t version = static_cast<uint16_t>(bytes[4]) |
                             (static_cast<uint16_t>(bytes[5]) << 8);
    if (version != 1) {
        throw IoError("checkpoint: unsupported format version " +
                      std::to_string(version));
    }
    uint32_t headerLen = 0;
    for (int i = 0; i < 4; ++i) {
        headerLen |= static_cast<uint32_t>(bytes[6 + i]) << (8 * i);
    }
    if (bytes.size() < 10 + static_cast<size_t>(headerLen)) {
        throw IoError("checkpoint: truncated header");
    }
    json header;
    try {
        header = json::parse(bytes.begin() + 10,
                             bytes.begin() + 10 + headerLen);
    } catch (const json::parse_error& e) {
        throw IoError(std::string("checkpoint: malformed header: ") + e.what());
    }

    Checkpoint ckpt;
    ckpt.config = configFromJson(header.at("config"));
    const auto& meta = header.at("trainMeta");
    ckpt.meta.epochsTrained = meta.at("epochsTrained").get<double>();
    ckpt.meta.trainAccuracy = meta.at("trainAccuracy").get<double>();
    ckpt.meta.testAccuracy = meta.at("testAccuracy").get<double>();

    const size_t paramBase = 10 + headerLen;
    for (const auto& entry : header.at("parameters")) {
        const std::string name = entry.at("name").get<std::string>();
        const std::vector<size_t> shape =
            entry.at("shape").get<std::vector<size_t>>();
        const size_t offset = entry.at("offset").get<size_t>();
        const size_t count = shapeProduct(shape);
        if (paramBase + offset + count * sizeof(double) > bytes.size()) {
            throw IoError("checkpoint: truncated parameter block '" + name +
                          "'");
        }
        std::vector<double> values(count);
        std::memcpy(values.data(), bytes.data() + paramBase + offset,
                    count * sizeof(double));
        ckpt.parameters.emplace_back(name, Tensor(shape, std::move(values)));
    }
    ckpt.validateParameters();
    ckpt.digest = sha256Hex(bytes.data(), bytes.size());
    return ckpt;
}

void saveCheckpoint(const Checkpoint& ckpt,
                    const std::filesystem::path& path) {
    const auto bytes = serializeCheckpoint(ckpt);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("checkpoint: cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<long>(bytes.size()));
    if (!out) throw IoError("checkpoint: write failed for " + path.string());
}

Checkpoint loadCheckpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) throw IoError("checkpoint: cannot open " + path.string());
    const auto size = static_cast<size_t>(in.tellg());
    in.seekg(0);
    std::vector<uint8_t> bytes(size);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<long>(size));
    if (!in) throw IoError("checkpoint: read failed for " + path.string());
    return deserializeCheckpoint(bytes);
}

}  // namespace aclab
