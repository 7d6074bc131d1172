#include "aclab/certainty.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "aclab/error.hpp"
#include "aclab/parallel.hpp"
#include "aclab/rng.hpp"

namespace aclab {

void HistogramConfig::validate() const {
    if (bins < 2) {
        throw std::invalid_argument("histogram: need at least 2 bins");
    }
}

namespace {

size_t binOf(double v, size_t bins) {
    const size_t b = static_cast<size_t>(v * static_cast<double>(bins));
    return std::min(b, bins - 1);
}

void checkUnitRange(const Tensor& t, const char* what) {
    for (double v : t.values()) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw std::invalid_argument(std::string(what) +
                                        ": value outside [0,1]");
        }
    }
}

double entropyOf(const std::vector<double>& p) {
    double h = 0.0;
    for (double v : p) {
        if (v > 0.0) h -= v * std::log(v);
    }
    return h;
}

}  // namespace

Tensor toLuminance(const Tensor& x) {
    if (x.rank() == 1 || x.rank() == 2) return x;  // already single-plane
    if (x.rank() != 3) {
        throw std::invalid_argument("luminance: expected (c,h,w), got " +
                                    x.shapeString());
    }
    const size_t c = x.shape()[0], h = x.shape()[1], w = x.shape()[2];
    if (c == 1) {
        Tensor out({h, w});
        for (size_t k = 0; k < h * w; ++k) out[k] = x[k];
        return out;
    }
    if (c != 3) {
        throw std::invalid_argument(
            "luminance: expected 1 or 3 channels, got " + x.shapeString());
    }
    Tensor out({h, w});
    for (size_t k = 0; k < h * w; ++k) {
        out[k] = 0.299 * x[k] + 0.587 * x[h * w + k] + 0.114 * x[2 * h * w + k];
    }
    return out;
}

JointHistogram::JointHistogram(HistogramConfig cfg) : cfg_(cfg) {
    cfg_.validate();
    counts_.assign(cfg_.bins * cfg_.bins, 0);
}

void JointHistogram::add(const Tensor& x, const Tensor& z) {
    const Tensor lum = toLuminance(x);
    if (!lum.sameShape(z)) {
        throw std::invalid_argument("mi: paired shapes differ, " +
                                    lum.shapeString() + " vs " +
                                    z.shapeString());
    }
    checkUnitRange(lum, "mi: x");
    checkUnitRange(z, "mi: z");
    for (size_t k = 0; k < lum.size(); ++k) {
        counts_[binOf(lum[k], cfg_.bins) * cfg_.bins + binOf(z[k], cfg_.bins)]++;
    }
    total_ += lum.size();
}

MIEstimate JointHistogram::estimate() const {
    if (total_ == 0) {
        throw std::invalid_argument("mi: no samples accumulated");
    }
    const size_t bins = cfg_.bins;
    const double n = static_cast<double>(total_);
    std::vector<uint64_t> rowCount(bins, 0), colCount(bins, 0);
    for (size_t a = 0; a < bins; ++a) {
        for (size_t b = 0; b < bins; ++b) {
            rowCount[a] += counts_[a * bins + b];
            colCount[b] += counts_[a * bins + b];
        }
    }
    std::vector<double> px(bins, 0.0), pz(bins, 0.0);
    for (size_t b = 0; b < bins; ++b) {
        px[b] = static_cast<double>(rowCount[b]) / n;
        pz[b] = static_cast<double>(colCount[b]) / n;
    }
    double mi = 0.0;
    for (size_t a = 0; a < bins; ++a) {
        for (size_t b = 0; b < bins; ++b) {
            const uint64_t cnt = counts_[a * bins + b];
            if (cnt == 0) continue;  // 0 * ln 0 = 0
            const double pab = static_cast<double>(cnt) / n;
            mi += pab * std::log(pab / (px[a] * pz[b]));
        }
    }
    if (mi < 0.0) mi = 0.0;  // numerical dust

    MIEstimate est;
    est.config = cfg_;
    est.sampleCount = total_;
    est.miNats = mi;
    est.entropyXNats = entropyOf(px);
    est.entropyZNats = entropyOf(pz);
    est.conditionalEntropyNats = std::max(0.0, est.entropyXNats - est.miNats);
    est.certaintyLowerBound = certaintyBound(est.miNats, est.entropyXNats);
    return est;
}

MIEstimate estimateMI(const Tensor& x, const Tensor& z,
                      const HistogramConfig& cfg) {
    JointHistogram hist(cfg);
    hist.add(x, z);
    return hist.estimate();
}

double entropy(const Tensor& x, const HistogramConfig& cfg) {
    cfg.validate();
    checkUnitRange(x, "entropy");
    std::vector<uint64_t> counts(cfg.bins, 0);
    for (double v : x.values()) counts[binOf(v, cfg.bins)]++;
    std::vector<double> p(cfg.bins, 0.0);
    for (size_t b = 0; b < cfg.bins; ++b) {
        p[b] = static_cast<double>(counts[b]) / static_cast<double>(x.size());
    }
    return entropyOf(p);
}

double certaintyBound(double miNats, double entropyXNats) {
    if (miNats > entropyXNats + 1e-9) {
        throw std::invalid_argument(
            "certaintyBound: MI " + std::to_string(miNats) +
            " exceeds entropy " + std::to_string(entropyXNats) +
            " (estimator inconsistency)");
    }
    return std::min(1.0, std::exp(miNats - entropyXNats));
}

std::string BenchmarkMethod::label() const {
    return sampler.label() + (multiplyByInput ? "*input" : "");
}

std::vector<BenchmarkMethod> parseBenchmarkMethods(const std::string& list) {
    std::vector<BenchmarkMethod> methods;
    std::istringstream in(list);
    std::string token;
    while (std::getline(in, token, ',')) {
        const auto first = token.find_first_not_of(" \t");
        if (first == std::string::npos) continue;
        const auto last = token.find_last_not_of(" \t");
        token = token.substr(first, last - first + 1);
        BenchmarkMethod method;
        if (token.size() > 6 && token.substr(token.size() - 6) == "*input") {
            method.multiplyByInput = true;
            token = token.substr(0, token.size() - 6);
        }
        method.sampler = parseSamplerSpec(token);
        methods.push_back(method);
    }
    if (methods.empty()) throw ConfigError("benchmark: empty method list");
    return methods;
}

BenchmarkTable benchmark(const Checkpoint& ckpt, const Dataset& data,
                         const std::vector<BenchmarkMethod>& methods,
                         size_t sampleCount, size_t imageCount, uint64_t seed,
                         const HistogramConfig& cfg, bool normalizeToIg,
                         ScoreMode mode, size_t threads) {
    cfg.validate();
    if (methods.empty()) {
        throw std::invalid_argument("benchmark: no methods given");
    }
    if (imageCount > data.count()) {
        throw std::invalid_argument("benchmark: imageCount " +
                                    std::to_string(imageCount) + " exceeds " +
                                    std::to_string(data.count()) + " images");
    }
    size_t igRow = methods.size();
    for (size_t m = 0; m < methods.size(); ++m) {
        if (methods[m].sampler.kind == SamplerKind::LinearScale) {
            igRow = m;
            break;
        }
    }
    if (normalizeToIg && igRow == methods.size()) {
        throw std::invalid_argument(
            "benchmark: IG normalization requested but no LinearScale method "
            "present");
    }

    const Dataset sample = subsample(data, imageCount, seed);

    BenchmarkTable table;
    table.imageCount = imageCount;
    table.sampleCount = sampleCount;
    table.seed = seed;
    table.config = cfg;
    table.normalized = normalizeToIg;
    table.rows.resize(methods.size());

    for (size_t m = 0; m < methods.size(); ++m) {
        BenchmarkRow& row = table.rows[m];
        row.method = methods[m].label();
        row.perImageMi.assign(imageCount, 0.0);

        if (cfg.pooling == Pooling::Corpus) {
            // Maps are integrated in parallel, pooled in image order.
            std::vector<AttributionMap> maps(imageCount);
            parallelFor(imageCount, threads, [&](size_t i) {
                maps[i] = integrate(
                    ckpt, sample.image(i), sample.labels[i], methods[m].sampler,
                    sampleCount,
                    rng::word(seed, rng::streams::kBenchStream, i),
                    methods[m].multiplyByInput, mode, 1);
            });
            JointHistogram hist(cfg);
            for (size_t i = 0; i < imageCount; ++i) {
                hist.add(sample.image(i), maps[i].values);
            }
            const MIEstimate est = hist.estimate();
            row.meanMiNats = est.miNats;
            row.stddev = 0.0;
            row.perImageMi.clear();
        } else {
            parallelFor(imageCount, threads, [&](size_t i) {
                const AttributionMap map = integrate(
                    ckpt, sample.image(i), sample.labels[i], methods[m].sampler,
                    sampleCount,
                    rng::word(seed, rng::streams::kBenchStream, i),
                    methods[m].multiplyByInput, mode, 1);
                row.perImageMi[i] =
                    estimateMI(sample.image(i), map.values, cfg).miNats;
            });
            double sum = 0.0;
            for (double v : row.perImageMi) sum += v;
            row.meanMiNats = sum / static_cast<double>(imageCount);
            double var = 0.0;
            for (double v : row.perImageMi) {
                var += (v - row.meanMiNats) * (v - row.meanMiNats);
            }
            row.stddev = imageCount > 1
                             ? std::sqrt(var / static_cast<double>(imageCount - 1))
                             : 0.0;
        }
    }

    if (normalizeToIg) {
        const double igMean = table.rows[igRow].meanMiNats;
        if (igMean == 0.0) {
            throw std::runtime_error(
                "benchmark: LinearScale mean MI is zero; cannot normalize");
        }
        for (auto& row : table.rows) {
            row.normalizedToIg = row.meanMiNats / igMean;
        }
    }
    return table;
}

void writeBenchmarkCsv(const BenchmarkTable& table,
                       const std::filesystem::path& path) {
    std::FILE* f = std::fopen(path.string().c_str(), "wb");
    if (!f) throw IoError("benchmark: cannot write " + path.string());
    std::fprintf(f, "method,meanMI_nats,normalizedToIG,stddev,imageCount\n");
    for (const auto& row : table.rows) {
        std::fprintf(f, "%s,%.17g,", row.method.c_str(), row.meanMiNats);
        if (table.normalized) std::fprintf(f, "%.17g", row.normalizedToIg);
        std::fprintf(f, ",%.17g,%zu\n", row.stddev, table.imageCount);
    }
    std::fclose(f);
}

void writeBenchmarkJson(const BenchmarkTable& table,
                        const std::filesystem::path& path) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : table.rows) {
        nlohmann::json j = {{"method", row.method},
                            {"meanMI_nats", row.meanMiNats},
                            {"stddev", row.stddev},
                            {"perImageMI", row.perImageMi}};
        if (table.normalized) j["normalizedToIG"] = row.normalizedToIg;
        rows.push_back(j);
    }
    const nlohmann::json doc = {
        {"imageCount", table.imageCount}, {"sampleCount", table.sampleCount},
        {"seed", table.seed},             {"bins", table.config.bins},
        {"pooling", table.config.pooling == Pooling::PerImage ? "perImage"
                                                              : "corpus"},
        {"rows", rows}};
    std::ofstream out(path);
    if (!out) throw IoError("benchmark: cannot write " + path.string());
    out << doc.dump(2) << '\n';
}

}  // namespace aclab
