#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "aclab/attribution.hpp"
#include "aclab/dataset.hpp"
#include "aclab/model.hpp"
#include "aclab/samplers.hpp"
#include "aclab/tensor.hpp"

namespace aclab {

enum class Pooling { PerImage, Corpus };

struct HistogramConfig {
    size_t bins = 32;                    // equal-width bins over [0,1]
    Pooling pooling = Pooling::PerImage;
    void validate() const;
};

// Histogram plug-in mutual-information estimate between paired pixel values,
// in nats, with the certainty lower bound exp(I - H(x)).
struct MIEstimate {
    double miNats = 0.0;
    double entropyXNats = 0.0;
    double entropyZNats = 0.0;
    double conditionalEntropyNats = 0.0;  // H(x|z) = H(x) - I(x;z)
    double certaintyLowerBound = 0.0;     // exp(miNats - entropyXNats)
    size_t sampleCount = 0;               // pooled pixel pairs
    HistogramConfig config;
};

// Accumulates paired (x, z) pixel values into a joint histogram; supports
// corpus pooling across many images before estimating.
class JointHistogram {
  public:
    explicit JointHistogram(HistogramConfig cfg);
    void add(const Tensor& x, const Tensor& z);
    MIEstimate estimate() const;

  private:
    HistogramConfig cfg_;
    std::vector<uint64_t> counts_;  // bins x bins, row = x bin
    uint64_t total_ = 0;
};

// Plug-in MI over pooled pixel pairs of one image/map pair. RGB inputs are
// reduced to luminance first. Values must lie in [0,1].
MIEstimate estimateMI(const Tensor& x, const Tensor& z,
                      const HistogramConfig& cfg);

// Plug-in entropy -sum p ln p of the binned values, in nats.
double entropy(const Tensor& x, const HistogramConfig& cfg);

// exp(mi - hx), the Pr(x|z) lower bound; rejects mi > hx beyond 1e-9.
double certaintyBound(double miNats, double entropyXNats);

// (c,h,w) -> (h,w). 3 channels use 0.299R + 0.587G + 0.114B.
Tensor toLuminance(const Tensor& x);

struct BenchmarkMethod {
    SamplerSpec sampler;
    bool multiplyByInput = false;
    std::string label() const;
};

// Comma-separated sampler tokens, each optionally suffixed "*input" for the
// gradient-times-input variant, e.g. "bernoulli:0.7,linear*input".
std::vector<BenchmarkMethod> parseBenchmarkMethods(const std::string& list);

struct BenchmarkRow {
    std::string method;
    double meanMiNats = 0.0;
    double stddev = 0.0;
    double normalizedToIg = 0.0;  // meanMiNats / LinearScale mean
    std::vector<double> perImageMi;
};

struct BenchmarkTable {
    std::vector<BenchmarkRow> rows;
    size_t imageCount = 0;
    size_t sampleCount = 0;
    uint64_t seed = 0;
    HistogramConfig config;
    bool normalized = false;
};

// Mean MI per method over a deterministic image subsample, plus the
// IG-normalized column (ratio to the LinearScale method's mean). Per-image
// integration seeds depend only on the image, so identical methods yield
// identical rows and per-image values support paired comparison.
BenchmarkTable benchmark(const Checkpoint& ckpt, const Dataset& data,
                         const std::vector<BenchmarkMethod>& methods,
                         size_t sampleCount, size_t imageCount, uint64_t seed,
                         const HistogramConfig& cfg, bool normalizeToIg = true,
                         ScoreMode mode = ScoreMode::Logit, size_t threads = 1);

void writeBenchmarkCsv(const BenchmarkTable& table,
                       const std::filesystem::path& path);
void writeBenchmarkJson(const BenchmarkTable& table,
                        const std::filesystem::path& path);

}  // namespace aclab
