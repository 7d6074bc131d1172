#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "aclab/model.hpp"
#include "aclab/rng.hpp"
#include "aclab/tensor.hpp"

namespace testutil {

inline std::filesystem::path fixturesDir() {
    return std::filesystem::path(ACLAB_FIXTURES_DIR);
}

// Central finite differences of a scalar function, the independent oracle
// for every analytic gradient in the suite.
inline aclab::Tensor finiteDifferenceGradient(
    const std::function<double(const aclab::Tensor&)>& f, aclab::Tensor x,
    double step = 1e-4) {
    aclab::Tensor grad(x.shape());
    for (size_t i = 0; i < x.size(); ++i) {
        const double keep = x[i];
        x[i] = keep + step;
        const double up = f(x);
        x[i] = keep - step;
        const double down = f(x);
        x[i] = keep;
        grad[i] = (up - down) / (2.0 * step);
    }
    return grad;
}

// Relative error with an absolute floor near zero.
inline bool gradientsClose(const aclab::Tensor& analytic,
                           const aclab::Tensor& numeric, double relTol = 1e-4,
                           double absFloor = 1e-6) {
    if (!analytic.sameShape(numeric)) return false;
    for (size_t i = 0; i < analytic.size(); ++i) {
        const double diff = std::fabs(analytic[i] - numeric[i]);
        const double scale =
            std::max(std::fabs(analytic[i]), std::fabs(numeric[i]));
        if (diff > absFloor && diff > relTol * scale) return false;
    }
    return true;
}

inline aclab::Tensor randomTensor(std::vector<size_t> shape, uint64_t seed,
                                  double lo = -1.0, double hi = 1.0) {
    aclab::Tensor t(std::move(shape));
    for (size_t i = 0; i < t.size(); ++i) {
        t[i] = aclab::rng::uniformRange(lo, hi, seed, 0xfeed, i);
    }
    return t;
}

inline std::string readFileBytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Single dense layer model computing logits = Wx + b over a (1,h,w) input.
inline aclab::Checkpoint linearModel(const aclab::Tensor& weight,
                                     const aclab::Tensor& bias,
                                     std::array<size_t, 3> inputShape) {
    aclab::ModelConfig cfg;
    cfg.inputShape = inputShape;
    cfg.classCount = weight.shape()[0];
    cfg.seed = 0;
    cfg.layers = {{aclab::LayerSpec::Kind::Dense, cfg.classCount, 0}};
    aclab::Checkpoint ckpt = aclab::initModel(cfg);
    ckpt.parameters[0].second = weight;
    ckpt.parameters[1].second = bias;
    return ckpt;
}

// Small random two-layer network (dense/relu/dense) for oracle checks.
inline aclab::Checkpoint tinyDenseNet(size_t inputPixels, size_t hidden,
                                      size_t classes, uint64_t seed) {
    aclab::ModelConfig cfg;
    cfg.inputShape = {1, 1, inputPixels};
    cfg.classCount = classes;
    cfg.seed = seed;
    cfg.layers = {{aclab::LayerSpec::Kind::Dense, hidden, 0},
                  {aclab::LayerSpec::Kind::Relu, 0, 0},
                  {aclab::LayerSpec::Kind::Dense, classes, 0}};
    return aclab::initModel(cfg);
}

// Small random conv net exercising every primitive.
inline aclab::Checkpoint tinyConvNet(size_t side, size_t classes,
                                     uint64_t seed) {
    aclab::ModelConfig cfg;
    cfg.inputShape = {1, side, side};
    cfg.classCount = classes;
    cfg.seed = seed;
    using K = aclab::LayerSpec::Kind;
    cfg.layers = {{K::Conv, 4, 3},  {K::Relu, 0, 0},    {K::MaxPool, 0, 0},
                  {K::Dense, 8, 0}, {K::Relu, 0, 0},
                  {K::Dense, classes, 0}};
    return aclab::initModel(cfg);
}

}  // namespace testutil
