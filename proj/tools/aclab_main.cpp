// aclab: pixel-attribution laboratory CLI.
//
// Subcommands: mkdata, train, explain, bench, sweep, project, fragility.
// Each run reads a flat key-value config (overridable by flags), writes its
// artifacts under --out, and records a manifest with per-file sha256 hashes.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "aclab/attribution.hpp"
#include "aclab/certainty.hpp"
#include "aclab/config.hpp"
#include "aclab/dataset.hpp"
#include "aclab/diagnostics.hpp"
#include "aclab/digits.hpp"
#include "aclab/error.hpp"
#include "aclab/image_io.hpp"
#include "aclab/manifest.hpp"
#include "aclab/model.hpp"
#include "aclab/rng.hpp"
#include "aclab/samplers.hpp"

namespace fs = std::filesystem;
using namespace aclab;

namespace {

constexpr uint64_t kDefaultSeed = 1860867;

struct GlobalArgs {
    std::string configPath;
    uint64_t seed = kDefaultSeed;
    bool seedSet = false;
    std::string outDir = "out";
    size_t threads = 1;
};

struct Overrides {
    std::optional<double> p;
    std::optional<double> sigma;
    std::optional<size_t> samples;
    std::optional<size_t> bins;
    std::optional<bool> multiplyByInput;
};

Dataset loadDataset(ConfigFile& cfg, const std::string& imagesKey,
                    const std::string& labelsKey) {
    const std::string images = cfg.require("data", imagesKey);
    const std::string labels = cfg.require("data", labelsKey);
    return loadIdx(images, labels);
}

std::map<std::string, std::string> effectiveSettings(
    const ConfigFile& cfg, std::map<std::string, std::string> extra) {
    // Neither worker count nor output location is echoed: artifacts are
    // identical for any thread count and any destination, and the manifest
    // should be too.
    auto settings = cfg.flattened();
    for (auto& [k, v] : extra) settings[k] = std::move(v);
    return settings;
}

// ---- commands -----------------------------------------------------------

int runMkdata(ConfigFile& cfg, const GlobalArgs& args) {
    const size_t trainCount = cfg.getSize("mkdata", "trainCount", 6000);
    const size_t testCount = cfg.getSize("mkdata", "testCount", 2000);
    DigitStyle style;
    style.backgroundAmplitude =
        cfg.getDouble("mkdata", "background", style.backgroundAmplitude);
    style.speckle = cfg.getDouble("mkdata", "speckle", style.speckle);
    cfg.ensureConsumed();

    fs::create_directories(args.outDir);
    const Dataset train = synthesizeDigits(trainCount, args.seed, style);
    const Dataset test =
        synthesizeDigits(testCount, rng::word(args.seed, 0x7e57), style);
    const fs::path out(args.outDir);
    saveIdx(train, out / "train-images.idx", out / "train-labels.idx");
    saveIdx(test, out / "test-images.idx", out / "test-labels.idx");
    writeManifest(out, "mkdata",
                  effectiveSettings(cfg, {{"trainCount", std::to_string(trainCount)},
                                     {"testCount", std::to_string(testCount)}}),
                  args.seed,
                  {out / "train-images.idx", out / "train-labels.idx",
                   out / "test-images.idx", out / "test-labels.idx"});
    std::printf("wrote %zu train / %zu test digits to %s\n", trainCount,
                testCount, args.outDir.c_str());
    return 0;
}

int runTrain(ConfigFile& cfg, const GlobalArgs& args) {
    const Dataset trainData = loadDataset(cfg, "trainImages", "trainLabels");
    std::optional<Dataset> testData;
    if (cfg.has("data", "testImages")) {
        testData = loadDataset(cfg, "testImages", "testLabels");
    }
    const size_t classCount = cfg.getSize("model", "classCount", 10);

    TrainSpec spec;
    spec.learningRate = cfg.getDouble("train", "learningRate", 1e-3);
    spec.batchSize = cfg.getSize("train", "batchSize", 8);
    spec.epochs = cfg.getSize("train", "epochs", 0);
    spec.batchCount = cfg.getSize("train", "batches", 0);
    if (spec.epochs == 0 && spec.batchCount == 0) spec.epochs = 3;
    spec.seed = args.seed;
    if (cfg.getBool("train", "augment", false)) {
        AugmentSpec aug;
        aug.gaussianSigmaRange = {cfg.getDouble("train", "sigmaLow", 0.1),
                                  cfg.getDouble("train", "sigmaHigh", 0.3)};
        aug.luminanceRange = {cfg.getDouble("train", "lumLow", 0.1),
                              cfg.getDouble("train", "lumHigh", 0.9)};
        spec.augmentation = aug;
    }
    cfg.ensureConsumed();

    fs::create_directories(args.outDir);
    const auto shape = trainData.imageShape();
    const ModelConfig config =
        ModelConfig::reference(shape, classCount, args.seed);
    TrainStats stats;
    const Checkpoint trained =
        train(initModel(config), trainData, spec,
              testData ? &*testData : nullptr, &stats);

    const fs::path out(args.outDir);
    saveCheckpoint(trained, out / "checkpoint.aclb");
    std::FILE* f =
        std::fopen((out / "train_loss.csv").string().c_str(), "wb");
    if (!f) throw IoError("train: cannot write train_loss.csv");
    std::fprintf(f, "epoch,meanLoss\n");
    for (size_t e = 0; e < stats.epochMeanLoss.size(); ++e) {
        std::fprintf(f, "%zu,%.17g\n", e, stats.epochMeanLoss[e]);
    }
    std::fclose(f);

    writeManifest(out, "train", effectiveSettings(cfg, {}), args.seed,
                  {out / "checkpoint.aclb", out / "train_loss.csv"});
    std::printf("trained %.2f epochs, train acc %.4f, test acc %.4f\n",
                trained.meta.epochsTrained, trained.meta.trainAccuracy,
                trained.meta.testAccuracy);
    return 0;
}

int runExplain(ConfigFile& cfg, const GlobalArgs& args, const Overrides& ovr) {
    const Checkpoint ckpt = loadCheckpoint(cfg.require("explain", "checkpoint"));
    const Dataset data = loadDataset(cfg, "images", "labels");
    const size_t imageIndex = cfg.getSize("explain", "imageIndex", 0);
    if (imageIndex >= data.count()) {
        throw std::invalid_argument("explain: imageIndex out of range");
    }

    SamplerSpec spec =
        parseSamplerSpec(cfg.getString("explain", "sampler", "bernoulli:0.7"));
    if (ovr.p) spec.p = *ovr.p;
    if (ovr.sigma) spec.sigma = *ovr.sigma;
    spec.validate();
    size_t samples = cfg.getSize("explain", "samples", 50);
    if (ovr.samples) samples = *ovr.samples;
    bool multiplyByInput = cfg.getBool("explain", "multiplyByInput", false);
    if (ovr.multiplyByInput) multiplyByInput = *ovr.multiplyByInput;
    const ScoreMode mode = scoreModeFromString(
        cfg.getString("explain", "scoreMode", "logit"));
    const int label = static_cast<int>(cfg.getSize(
        "explain", "label", static_cast<size_t>(data.labels[imageIndex])));
    cfg.ensureConsumed();

    fs::create_directories(args.outDir);
    const Tensor x = data.image(imageIndex);
    const AttributionMap map =
        integrate(ckpt, x, label, spec, samples, args.seed, multiplyByInput,
                  mode, args.threads);

    const fs::path out(args.outDir);
    writeAttributionCsv(map, out / "map.csv");
    writeAttributionMetaJson(map, out / "meta.json");
    writePng(renderHeatmap(map), out / "heatmap.png");
    writePgm(map.values, out / "map.pgm");
    writeManifest(out, "explain",
                  effectiveSettings(
                      cfg,
                      {{"sampler", spec.label()},
                       {"samples", std::to_string(samples)},
                       {"multiplyByInput", multiplyByInput ? "true" : "false"}}),
                  args.seed,
                  {out / "map.csv", out / "meta.json", out / "heatmap.png",
                   out / "map.pgm"});
    std::printf("explained image %zu (label %d) with %s\n", imageIndex, label,
                spec.label().c_str());
    return 0;
}

HistogramConfig histogramFromConfig(ConfigFile& cfg, const std::string& section,
                                    const Overrides& ovr) {
    HistogramConfig hist;
    hist.bins = cfg.getSize(section, "bins", 32);
    if (ovr.bins) hist.bins = *ovr.bins;
    const std::string pooling = cfg.getString(section, "pooling", "perImage");
    if (pooling == "perImage") {
        hist.pooling = Pooling::PerImage;
    } else if (pooling == "corpus") {
        hist.pooling = Pooling::Corpus;
    } else {
        throw ConfigError("pooling must be perImage or corpus, got '" +
                          pooling + "'");
    }
    hist.validate();
    return hist;
}

int runBench(ConfigFile& cfg, const GlobalArgs& args, const Overrides& ovr) {
    const Checkpoint ckpt = loadCheckpoint(cfg.require("bench", "checkpoint"));
    const Dataset data = loadDataset(cfg, "images", "labels");
    const auto methods = parseBenchmarkMethods(cfg.getString(
        "bench", "methods", "bernoulli:0.7,gaussian:0.15,identity,linear"));
    size_t samples = cfg.getSize("bench", "samples", 100);
    if (ovr.samples) samples = *ovr.samples;
    const size_t imageCount = cfg.getSize("bench", "imageCount", 100);
    const bool normalize = cfg.getBool("bench", "normalizeToIG", true);
    const HistogramConfig hist = histogramFromConfig(cfg, "bench", ovr);
    cfg.ensureConsumed();

    fs::create_directories(args.outDir);
    const BenchmarkTable table =
        benchmark(ckpt, data, methods, samples, imageCount, args.seed, hist,
                  normalize, ScoreMode::Logit, args.threads);

    const fs::path out(args.outDir);
    writeBenchmarkCsv(table, out / "bench.csv");
    writeBenchmarkJson(table, out / "bench.json");
    writeManifest(out, "bench",
                  effectiveSettings(cfg, {{"samples", std::to_string(samples)},
                                     {"bins", std::to_string(hist.bins)}}),
                  args.seed, {out / "bench.csv", out / "bench.json"});
    for (const auto& row : table.rows) {
        std::printf("%-28s meanMI %.6f nats%s\n", row.method.c_str(),
                    row.meanMiNats,
                    table.normalized
                        ? ("  (xIG " + std::to_string(row.normalizedToIg) + ")")
                              .c_str()
                        : "");
    }
    return 0;
}

int runSweep(ConfigFile& cfg, const GlobalArgs& args, const Overrides& ovr) {
    const Checkpoint ckpt = loadCheckpoint(cfg.require("sweep", "checkpoint"));
    const Dataset data = loadDataset(cfg, "images", "labels");
    const std::vector<double> grid = cfg.getDoubleList(
        "sweep", "grid",
        {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0});
    size_t samples = cfg.getSize("sweep", "samples", 50);
    if (ovr.samples) samples = *ovr.samples;
    const size_t imageCount = cfg.getSize("sweep", "imageCount", 30);
    const ScoreMode mode = scoreModeFromString(
        cfg.getString("sweep", "scoreMode", "log-probability"));
    const HistogramConfig hist = histogramFromConfig(cfg, "sweep", ovr);
    cfg.ensureConsumed();

    fs::create_directories(args.outDir);
    const SweepResult sweep = pSweep(ckpt, data, grid, samples, imageCount,
                                     args.seed, hist, mode, args.threads);

    const fs::path out(args.outDir);
    writeSweepCsv(sweep, out / "sweep.csv");
    writePng(renderLineChart(sweep.grid, sweep.meanMI), out / "sweep_mi.png");
    writePng(renderLineChart(sweep.grid, sweep.meanGradNorm),
             out / "sweep_gradnorm.png");
    writeManifest(out, "sweep",
                  effectiveSettings(cfg, {{"samples", std::to_string(samples)}}),
                  args.seed,
                  {out / "sweep.csv", out / "sweep_mi.png",
                   out / "sweep_gradnorm.png"});
    std::printf("argmax MI at p=%.2f, argmax gradient norm at p=%.2f\n",
                sweep.argmaxMI, sweep.argmaxGradNorm);
    return 0;
}

int runProject(ConfigFile& cfg, const GlobalArgs& args) {
    const Checkpoint ckpt =
        loadCheckpoint(cfg.require("project", "checkpoint"));
    const Dataset data = loadDataset(cfg, "images", "labels");
    const std::string samplerList = cfg.getString(
        "project", "samplers", "bernoulli:0.7,gaussian:0.5,gaussian:0.9");
    const size_t perGroup = cfg.getSize("project", "perGroup", 1000);
    cfg.ensureConsumed();

    std::vector<SamplerSpec> grid;
    for (const auto& method : parseBenchmarkMethods(samplerList)) {
        grid.push_back(method.sampler);
    }

    fs::create_directories(args.outDir);
    const ProjectionResult projection =
        alignmentStudy(ckpt, data, grid, perGroup, args.seed, args.threads);

    const fs::path out(args.outDir);
    writeProjectionCsv(projection, out / "projection.csv");
    writeCentroidCsv(projection, out / "centroids.csv");
    writePng(renderScatter(projection.points, projection.groupLabels),
             out / "projection.png");
    writeManifest(out, "project", effectiveSettings(cfg, {}), args.seed,
                  {out / "projection.csv", out / "centroids.csv",
                   out / "projection.png"});
    for (const auto& [label, dist] : projection.centroidDistanceToNatural) {
        std::printf("%-28s centroid distance to natural %.6f\n", label.c_str(),
                    dist);
    }
    return 0;
}

int runFragility(ConfigFile& cfg, const GlobalArgs& args, const Overrides& ovr) {
    const Checkpoint base =
        loadCheckpoint(cfg.require("fragility", "checkpoint"));
    const Dataset trainData = loadDataset(cfg, "trainImages", "trainLabels");
    const Dataset evalData = loadDataset(cfg, "images", "labels");
    const auto methods = parseBenchmarkMethods(cfg.getString(
        "fragility", "methods", "bernoulli:0.7,gaussian:0.15,identity"));
    size_t samples = cfg.getSize("fragility", "samples", 50);
    if (ovr.samples) samples = *ovr.samples;
    const size_t imageCount = cfg.getSize("fragility", "imageCount", 50);
    const HistogramConfig hist = histogramFromConfig(cfg, "fragility", ovr);

    AugmentSpec aug;
    aug.gaussianSigmaRange = {cfg.getDouble("fragility", "sigmaLow", 0.1),
                              cfg.getDouble("fragility", "sigmaHigh", 0.3)};
    aug.luminanceRange = {cfg.getDouble("fragility", "lumLow", 0.1),
                          cfg.getDouble("fragility", "lumHigh", 0.9)};
    TrainSpec fineTune;
    fineTune.learningRate = cfg.getDouble("fragility", "learningRate", 1e-3);
    fineTune.batchSize = cfg.getSize("fragility", "batchSize", 8);
    fineTune.batchCount = cfg.getSize("fragility", "batches", 1000);
    fineTune.seed = args.seed;
    cfg.ensureConsumed();

    fs::create_directories(args.outDir);
    const FragilityReport report =
        augmentationFragility(base, trainData, evalData, aug, fineTune, methods,
                              samples, imageCount, args.seed, hist,
                              args.threads);

    const fs::path out(args.outDir);
    writeBenchmarkCsv(report.before, out / "fragility_before.csv");
    writeBenchmarkCsv(report.after, out / "fragility_after.csv");
    writeFragilityCsv(report, out / "fragility.csv");
    writeManifest(out, "fragility", effectiveSettings(cfg, {}), args.seed,
                  {out / "fragility_before.csv", out / "fragility_after.csv",
                   out / "fragility.csv"});
    for (const auto& change : report.changes) {
        std::printf("%-28s MI %.6f -> %.6f (%+.2f%%)\n", change.method.c_str(),
                    change.beforeMi, change.afterMi,
                    100.0 * change.relativeChange);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"aclab: gradient-integration attribution laboratory"};
    app.require_subcommand(1);

    GlobalArgs args;
    Overrides ovr;

    auto addCommon = [&](CLI::App* sub) {
        sub->add_option("--config", args.configPath, "experiment config file");
        sub->add_option("--seed", args.seed, "global random seed")
            ->default_val(kDefaultSeed);
        sub->add_option("--out", args.outDir, "output directory")
            ->default_val("out");
        sub->add_option("--threads", args.threads, "worker count")
            ->default_val(1);
    };
    auto addOverrides = [&](CLI::App* sub) {
        sub->add_option("--p", [&ovr](const CLI::results_t& r) {
            ovr.p = std::stod(r[0]);
            return true;
        }, "override drop probability");
        sub->add_option("--sigma", [&ovr](const CLI::results_t& r) {
            ovr.sigma = std::stod(r[0]);
            return true;
        }, "override noise level");
        sub->add_option("--samples", [&ovr](const CLI::results_t& r) {
            ovr.samples = std::stoul(r[0]);
            return true;
        }, "override integration sample count");
        sub->add_option("--bins", [&ovr](const CLI::results_t& r) {
            ovr.bins = std::stoul(r[0]);
            return true;
        }, "override histogram bins");
        sub->add_flag("--multiply-by-input", [&ovr](size_t) {
            ovr.multiplyByInput = true;
        }, "gate averaged gradients by the input");
    };

    CLI::App* mkdata =
        app.add_subcommand("mkdata", "synthesize the digit corpus as IDX");
    CLI::App* trainCmd = app.add_subcommand("train", "train the reference CNN");
    CLI::App* explainCmd =
        app.add_subcommand("explain", "one image -> heatmap + CSV map");
    CLI::App* benchCmd =
        app.add_subcommand("bench", "cross-method certainty benchmark");
    CLI::App* sweepCmd =
        app.add_subcommand("sweep", "dropping-probability sweep");
    CLI::App* projectCmd =
        app.add_subcommand("project", "cosine-kernel-PCA alignment study");
    CLI::App* fragilityCmd = app.add_subcommand(
        "fragility", "before/after augmentation fine-tune benchmark");
    for (CLI::App* sub : {mkdata, trainCmd, explainCmd, benchCmd, sweepCmd,
                          projectCmd, fragilityCmd}) {
        addCommon(sub);
    }
    for (CLI::App* sub : {explainCmd, benchCmd, sweepCmd, fragilityCmd}) {
        addOverrides(sub);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        std::cerr << "error: usage: " << e.what() << '\n';
        return 2;
    }

    try {
        ConfigFile cfg = args.configPath.empty()
                             ? ConfigFile::parseText("", "<none>")
                             : ConfigFile::parse(args.configPath);
        if (mkdata->parsed()) return runMkdata(cfg, args);
        if (trainCmd->parsed()) return runTrain(cfg, args);
        if (explainCmd->parsed()) return runExplain(cfg, args, ovr);
        if (benchCmd->parsed()) return runBench(cfg, args, ovr);
        if (sweepCmd->parsed()) return runSweep(cfg, args, ovr);
        if (projectCmd->parsed()) return runProject(cfg, args);
        if (fragilityCmd->parsed()) return runFragility(cfg, args, ovr);
        std::cerr << "error: usage: no subcommand\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "error: config: " << e.what() << '\n';
        return 1;
    } catch (const IoError& e) {
        std::cerr << "error: io: " << e.what() << '\n';
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: invalid-argument: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: runtime: " << e.what() << '\n';
        return 1;
    }
}
