#include "aclab/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "aclab/error.hpp"
#include "aclab/parallel.hpp"
#include "aclab/rng.hpp"

namespace aclab {

namespace {

constexpr double kPowerTolerance = 1e-10;
constexpr size_t kPowerMaxIterations = 10000;
constexpr uint64_t kPowerStartSeed = 0x4b50434153746172ULL;  // fixed start

}  // namespace

Tensor cosineKernelPca(const Tensor& vectors, size_t outDim,
                       std::vector<double>* eigenvalues) {
    if (vectors.rank() != 2) {
        throw std::invalid_argument("kpca: expected (n,d) matrix, got " +
                                    vectors.shapeString());
    }
    const size_t n = vectors.shape()[0], d = vectors.shape()[1];
    if (n < outDim + 1) {
        throw std::invalid_argument("kpca: need more than " +
                                    std::to_string(outDim) + " rows, got " +
                                    std::to_string(n));
    }

    // Row-normalize: the cosine kernel is the Gram matrix of unit rows, so
    // the centered kernel factors as (C U)(C U)^T and never needs to be
    // materialized.
    std::vector<double> unit(n * d);
    for (size_t i = 0; i < n; ++i) {
        double norm = 0.0;
        for (size_t j = 0; j < d; ++j) {
            const double v = vectors[i * d + j];
            norm += v * v;
        }
        norm = std::sqrt(norm);
        if (norm == 0.0) {
            throw std::invalid_argument("kpca: zero vector at row " +
                                        std::to_string(i) +
                                        " (cosine undefined)");
        }
        for (size_t j = 0; j < d; ++j) unit[i * d + j] = vectors[i * d + j] / norm;
    }
    std::vector<double> colMean(d, 0.0);
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < d; ++j) colMean[j] += unit[i * d + j];
    }
    for (size_t j = 0; j < d; ++j) colMean[j] /= static_cast<double>(n);
    std::vector<double> centered(n * d);
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < d; ++j) {
            centered[i * d + j] = unit[i * d + j] - colMean[j];
        }
    }

    auto applyKernel = [&](const std::vector<double>& v,
                           std::vector<double>& out) {
        // out = (C U)(C U)^T v, via the d-dimensional intermediate.
        std::vector<double> t(d, 0.0);
        for (size_t i = 0; i < n; ++i) {
            const double vi = v[i];
            if (vi == 0.0) continue;
            for (size_t j = 0; j < d; ++j) t[j] += centered[i * d + j] * vi;
        }
        for (size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (size_t j = 0; j < d; ++j) s += centered[i * d + j] * t[j];
            out[i] = s;
        }
    };

    std::vector<std::vector<double>> eigenvectors;
    std::vector<double> lambdas;
    Tensor points({n, outDim});

    for (size_t k = 0; k < outDim; ++k) {
        std::vector<double> v(n);
        for (size_t i = 0; i < n; ++i) {
            v[i] = rng::uniform01(kPowerStartSeed, rng::streams::kPcaStart, k,
                                  i) -
                   0.5;
        }
        auto orthogonalize = [&](std::vector<double>& w) {
            for (const auto& prev : eigenvectors) {
                double dot = 0.0;
                for (size_t i = 0; i < n; ++i) dot += prev[i] * w[i];
                for (size_t i = 0; i < n; ++i) w[i] -= dot * prev[i];
            }
        };
        auto normalize = [&](std::vector<double>& w) {
            double norm = 0.0;
            for (double x : w) norm += x * x;
            norm = std::sqrt(norm);
            if (norm > 0.0) {
                for (double& x : w) x /= norm;
            }
            return norm;
        };
        orthogonalize(v);
        normalize(v);

        std::vector<double> w(n);
        double lambda = 0.0;
        bool converged = false;
        for (size_t iter = 0; iter < kPowerMaxIterations; ++iter) {
            applyKernel(v, w);
            orthogonalize(w);
            lambda = normalize(w);
            if (lambda <= 1e-14) {
                // Exhausted spectrum: remaining components carry nothing.
                converged = true;
                lambda = 0.0;
                break;
            }
            double diff = 0.0;
            for (size_t i = 0; i < n; ++i) {
                diff = std::max(diff, std::fabs(w[i] - v[i]));
            }
            v = w;
            if (diff < kPowerTolerance) {
                converged = true;
                break;
            }
        }
        if (!converged) {
            throw std::runtime_error(
                "kpca: power iteration failed to converge for component " +
                std::to_string(k));
        }

        // Sign convention: largest-magnitude coordinate positive, first such
        // index on ties.
        size_t big = 0;
        for (size_t i = 1; i < n; ++i) {
            if (std::fabs(v[i]) > std::fabs(v[big])) big = i;
        }
        if (v[big] < 0.0) {
            for (double& x : v) x = -x;
        }

        const double scale = std::sqrt(std::max(0.0, lambda));
        for (size_t i = 0; i < n; ++i) points[i * outDim + k] = v[i] * scale;
        eigenvectors.push_back(v);
        lambdas.push_back(lambda);
    }

    if (eigenvalues) *eigenvalues = lambdas;
    return points;
}

ProjectionResult alignmentStudy(const Checkpoint& ckpt, const Dataset& data,
                                const std::vector<SamplerSpec>& samplerGrid,
                                size_t perGroup, uint64_t seed,
                                size_t threads) {
    if (perGroup < 1) {
        throw std::invalid_argument("alignment: perGroup must be >= 1");
    }
    const Dataset bases = subsample(
        data, perGroup, rng::word(seed, rng::streams::kAlignPick));
    const size_t groups = samplerGrid.size() + 1;  // natural first
    const size_t n = groups * perGroup;
    const size_t dim = ckpt.config.penultimateWidth();

    Tensor embeddings({n, dim});
    std::vector<std::string> labels(n);

    // Group 0 embeds the natural images themselves; group g >= 1 embeds one
    // derived sample per base image.
    parallelFor(n, threads, [&](size_t item) {
        const size_t g = item / perGroup;
        const size_t i = item % perGroup;
        Tensor input = bases.image(i);
        if (g > 0) {
            const SampleStream stream{
                samplerGrid[g - 1], input,
                rng::word(seed, rng::streams::kAlignStream, g - 1), perGroup};
            input = stream.draw(i);
        }
        const Tensor emb = embedding(ckpt, input);
        for (size_t j = 0; j < dim; ++j) embeddings[item * dim + j] = emb[j];
    });
    for (size_t g = 0; g < groups; ++g) {
        const std::string label =
            g == 0 ? "natural" : samplerGrid[g - 1].label();
        for (size_t i = 0; i < perGroup; ++i) labels[g * perGroup + i] = label;
    }

    ProjectionResult result;
    result.points = cosineKernelPca(embeddings, 2);
    result.groupLabels = std::move(labels);

    std::array<double, 2> naturalCentroid{0.0, 0.0};
    for (size_t g = 0; g < groups; ++g) {
        std::array<double, 2> centroid{0.0, 0.0};
        for (size_t i = 0; i < perGroup; ++i) {
            centroid[0] += result.points[(g * perGroup + i) * 2];
            centroid[1] += result.points[(g * perGroup + i) * 2 + 1];
        }
        centroid[0] /= static_cast<double>(perGroup);
        centroid[1] /= static_cast<double>(perGroup);
        const std::string& label = result.groupLabels[g * perGroup];
        result.centroids.emplace_back(label, centroid);
        if (g == 0) {
            naturalCentroid = centroid;
        }
        const double dx = centroid[0] - naturalCentroid[0];
        const double dy = centroid[1] - naturalCentroid[1];
        result.centroidDistanceToNatural.emplace_back(
            label, std::sqrt(dx * dx + dy * dy));
    }
    return result;
}

SweepResult pSweep(const Checkpoint& ckpt, const Dataset& data,
                   const std::vector<double>& grid, size_t sampleCount,
                   size_t imageCount, uint64_t seed, const HistogramConfig& cfg,
                   ScoreMode mode, size_t threads) {
    cfg.validate();
    if (grid.empty()) {
        throw std::invalid_argument("sweep: empty probability grid");
    }
    for (double p : grid) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw std::invalid_argument("sweep: p " + std::to_string(p) +
                                        " outside [0,1]");
        }
    }
    const Dataset sample = subsample(
        data, imageCount, rng::word(seed, rng::streams::kSubsample));

    SweepResult result;
    result.grid = grid;
    result.meanGradNorm.assign(grid.size(), 0.0);
    result.meanMI.assign(grid.size(), 0.0);

    for (size_t gi = 0; gi < grid.size(); ++gi) {
        SamplerSpec spec;
        spec.kind = SamplerKind::BernoulliDrop;
        spec.p = grid[gi];

        std::vector<double> miPerImage(imageCount, 0.0);
        std::vector<double> normPerImage(imageCount, 0.0);
        parallelFor(imageCount, threads, [&](size_t i) {
            IntegrationStats stats;
            // Stream seeds are keyed per image only, so mask draws are
            // shared across the p grid.
            const AttributionMap map = integrate(
                ckpt, sample.image(i), sample.labels[i], spec, sampleCount,
                rng::word(seed, rng::streams::kSweepStream, i), false, mode, 1,
                &stats);
            miPerImage[i] = estimateMI(sample.image(i), map.values, cfg).miNats;
            double sum = 0.0;
            for (double v : stats.sampleGradNorms) sum += v;
            normPerImage[i] = sum / static_cast<double>(sampleCount);
        });
        double miSum = 0.0, normSum = 0.0;
        for (size_t i = 0; i < imageCount; ++i) {
            miSum += miPerImage[i];
            normSum += normPerImage[i];
        }
        result.meanMI[gi] = miSum / static_cast<double>(imageCount);
        result.meanGradNorm[gi] = normSum / static_cast<double>(imageCount);
    }

    const auto argmax = [](const std::vector<double>& v) {
        return static_cast<size_t>(
            std::max_element(v.begin(), v.end()) - v.begin());
    };
    result.argmaxGradNorm = grid[argmax(result.meanGradNorm)];
    result.argmaxMI = grid[argmax(result.meanMI)];
    return result;
}

FragilityReport augmentationFragility(
    const Checkpoint& base, const Dataset& trainData, const Dataset& evalData,
    const AugmentSpec& aug, const TrainSpec& fineTune,
    const std::vector<BenchmarkMethod>& methods, size_t sampleCount,
    size_t imageCount, uint64_t seed, const HistogramConfig& cfg,
    size_t threads) {
    FragilityReport report;
    report.before = benchmark(base, evalData, methods, sampleCount, imageCount,
                              seed, cfg, /*normalizeToIg=*/false,
                              ScoreMode::Logit, threads);

    TrainSpec tuned = fineTune;
    tuned.augmentation = aug;
    const Checkpoint after = train(base, trainData, tuned, &evalData);
    report.after = benchmark(after, evalData, methods, sampleCount, imageCount,
                             seed, cfg, /*normalizeToIg=*/false,
                             ScoreMode::Logit, threads);

    for (size_t m = 0; m < methods.size(); ++m) {
        FragilityReport::Change change;
        change.method = report.before.rows[m].method;
        change.beforeMi = report.before.rows[m].meanMiNats;
        change.afterMi = report.after.rows[m].meanMiNats;
        change.absoluteChange = change.afterMi - change.beforeMi;
        change.relativeChange =
            change.beforeMi != 0.0 ? change.absoluteChange / change.beforeMi
                                   : 0.0;
        report.changes.push_back(change);
    }
    return report;
}

void writeProjectionCsv(const ProjectionResult& projection,
                        const std::filesystem::path& path) {
    std::FILE* f = std::fopen(path.string().c_str(), "wb");
    if (!f) throw IoError("projection: cannot write " + path.string());
    std::fprintf(f, "x,y,group\n");
    const size_t n = projection.points.shape()[0];
    for (size_t i = 0; i < n; ++i) {
        std::fprintf(f, "%.17g,%.17g,%s\n", projection.points[i * 2],
                     projection.points[i * 2 + 1],
                     projection.groupLabels[i].c_str());
    }
    std::fclose(f);
}

void writeCentroidCsv(const ProjectionResult& projection,
                      const std::filesystem::path& path) {
    std::FILE* f = std::fopen(path.string().c_str(), "wb");
    if (!f) throw IoError("projection: cannot write " + path.string());
    std::fprintf(f, "group,cx,cy,distanceToNatural\n");
    for (size_t g = 0; g < projection.centroids.size(); ++g) {
        std::fprintf(f, "%s,%.17g,%.17g,%.17g\n",
                     projection.centroids[g].first.c_str(),
                     projection.centroids[g].second[0],
                     projection.centroids[g].second[1],
                     projection.centroidDistanceToNatural[g].second);
    }
    std::fclose(f);
}

void writeSweepCsv(const SweepResult& sweep,
                   const std::filesystem::path& path) {
    std::FILE* f = std::fopen(path.string().c_str(), "wb");
    if (!f) throw IoError("sweep: cannot write " + path.string());
    std::fprintf(f, "p,gradNorm,miNats\n");
    for (size_t i = 0; i < sweep.grid.size(); ++i) {
        std::fprintf(f, "%.17g,%.17g,%.17g\n", sweep.grid[i],
                     sweep.meanGradNorm[i], sweep.meanMI[i]);
    }
    std::fclose(f);
}

void writeFragilityCsv(const FragilityReport& report,
                       const std::filesystem::path& path) {
    std::FILE* f = std::fopen(path.string().c_str(), "wb");
    if (!f) throw IoError("fragility: cannot write " + path.string());
    std::fprintf(f, "method,beforeMI_nats,afterMI_nats,absoluteChange,"
                    "relativeChange\n");
    for (const auto& change : report.changes) {
        std::fprintf(f, "%s,%.17g,%.17g,%.17g,%.17g\n", change.method.c_str(),
                     change.beforeMi, change.afterMi, change.absoluteChange,
                     change.relativeChange);
    }
    std::fclose(f);
}

}  // namespace aclab
