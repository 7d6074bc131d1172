#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "aclab/certainty.hpp"
#include "aclab/dataset.hpp"
#include "aclab/model.hpp"
#include "aclab/samplers.hpp"
#include "aclab/tensor.hpp"

namespace aclab {

// Joint 2-D projection of embedding groups with per-group centroids.
struct ProjectionResult {
    Tensor points;                         // (n, 2)
    std::vector<std::string> groupLabels;  // one per point
    std::vector<std::pair<std::string, std::array<double, 2>>> centroids;
    std::vector<std::pair<std::string, double>> centroidDistanceToNatural;
};

// Principal components of the double-centered cosine kernel K(u,v) =
// u.v/(|u||v|). Points are eigenvector coordinates scaled by sqrt(eigenvalue).
// Eigenpairs come from power iteration with Gram-Schmidt deflation
// (tolerance 1e-10, at most 1e4 iterations) on the factored centered kernel,
// with a deterministic start vector; each eigenvector's largest-magnitude
// coordinate is made positive. Rejects zero rows; n must exceed outDim.
Tensor cosineKernelPca(const Tensor& vectors, size_t outDim,
                       std::vector<double>* eigenvalues = nullptr);

// Embeds natural images plus perGroup samples per sampler via the model's
// penultimate layer, projects everything jointly, and reports each group's
// centroid distance to the natural-image centroid.
ProjectionResult alignmentStudy(const Checkpoint& ckpt, const Dataset& data,
                                const std::vector<SamplerSpec>& samplerGrid,
                                size_t perGroup, uint64_t seed,
                                size_t threads = 1);

struct SweepResult {
    std::vector<double> grid;          // dropping probabilities
    std::vector<double> meanGradNorm;  // mean L2 input-gradient norm per p
    std::vector<double> meanMI;        // mean per-image MI per p
    double argmaxGradNorm = 0.0;
    double argmaxMI = 0.0;
};

// Mean gradient norms and explanation MI across a grid of Bernoulli dropping
// probabilities. Sample draws are keyed per image, shared across the grid.
// Defaults to the log-probability score: the saturation this sweep probes
// (activation rising under moderate suppression, collapsing near p=1) shows
// up in the softmax head at desk scale, while raw logit gradients of a
// shallow net shrink monotonically with the active-unit count.
SweepResult pSweep(const Checkpoint& ckpt, const Dataset& data,
                   const std::vector<double>& grid, size_t sampleCount,
                   size_t imageCount, uint64_t seed, const HistogramConfig& cfg,
                   ScoreMode mode = ScoreMode::LogProbability,
                   size_t threads = 1);

struct FragilityReport {
    BenchmarkTable before;
    BenchmarkTable after;
    struct Change {
        std::string method;
        double beforeMi = 0.0;
        double afterMi = 0.0;
        double absoluteChange = 0.0;  // after - before
        double relativeChange = 0.0;  // (after - before) / before
    };
    std::vector<Change> changes;
};

// Benchmarks the base model, fine-tunes it with the given augmentation, and
// benchmarks again; reports per-method absolute and relative MI change.
FragilityReport augmentationFragility(
    const Checkpoint& base, const Dataset& trainData, const Dataset& evalData,
    const AugmentSpec& aug, const TrainSpec& fineTune,
    const std::vector<BenchmarkMethod>& methods, size_t sampleCount,
    size_t imageCount, uint64_t seed, const HistogramConfig& cfg,
    size_t threads = 1);

void writeProjectionCsv(const ProjectionResult& projection,
                        const std::filesystem::path& path);
void writeCentroidCsv(const ProjectionResult& projection,
                      const std::filesystem::path& path);
void writeSweepCsv(const SweepResult& sweep, const std::filesystem::path& path);
void writeFragilityCsv(const FragilityReport& report,
                       const std::filesystem::path& path);

}  // namespace aclab
