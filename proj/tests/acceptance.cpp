// Acceptance suite: runs every criterion end to end against the desk-scale
// reference model and prints one PASS/FAIL line per criterion. Exits nonzero
// if any criterion fails. Invoke with --cli <path-to-aclab-binary>.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "aclab/attribution.hpp"
#include "aclab/certainty.hpp"
#include "aclab/dataset.hpp"
#include "aclab/diagnostics.hpp"
#include "aclab/digits.hpp"
#include "aclab/image_io.hpp"
#include "aclab/model.hpp"
#include "aclab/rng.hpp"
#include "aclab/tape.hpp"
#include "support/jacobi.hpp"
#include "support/test_util.hpp"

using namespace aclab;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

constexpr uint64_t kSeed = 1860867;

int failures = 0;

struct Timer {
    Clock::time_point start = Clock::now();
    double seconds() const {
        return std::chrono::duration<double>(Clock::now() - start).count();
    }
};

std::string fmt(const char* format, ...) {
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof(buf), format, args);
    va_end(args);
    return buf;
}

void report(int criterion, const std::string& name, bool pass,
            const std::string& detail) {
    std::printf("%s  criterion %2d  %-38s %s\n", pass ? "PASS" : "FAIL",
                criterion, name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

struct Context {
    std::string cli;
    fs::path work;
    Dataset trainData;
    Dataset testData;
    Checkpoint reference;
    BenchmarkTable benchTable;              // criterion 7 output
    std::vector<MIEstimate> benchEstimates; // full estimates for criterion 3
};

// ---------------------------------------------------------------- criterion 1

// One tape touching every primitive: conv2d, scale, add, relu, maxPool2,
// dense, and both scalar heads (logit selection / softmax-cross-entropy).
double allPrimitivesForward(const Checkpoint& net, const Tensor& x,
                            bool logitHead, Tensor* gradOut = nullptr) {
    Tape tape;
    const auto xid = tape.leaf(x, gradOut != nullptr);
    const auto conv = tape.conv2d(xid, tape.leaf(net.param("conv1.weight")),
                                  tape.leaf(net.param("conv1.bias")));
    const auto bumped = tape.add(conv, tape.scale(conv, 0.25));
    const auto pooled = tape.maxPool2(tape.relu(bumped));
    const auto logits = tape.dense(pooled, tape.leaf(net.param("dense1.weight")),
                                   tape.leaf(net.param("dense1.bias")));
    const auto head =
        logitHead ? tape.selectLogit(logits, 1)
                  : tape.scale(tape.softmaxCrossEntropy(logits, 1), -1.0);
    if (gradOut) {
        *gradOut = std::move(tape.backward(head).byLeaf.at(0).second);
    }
    return tape.value(head)[0];
}

Checkpoint primitivesNet(uint64_t seed) {
    ModelConfig cfg;
    cfg.inputShape = {1, 6, 6};
    cfg.classCount = 3;
    cfg.seed = seed;
    using K = LayerSpec::Kind;
    cfg.layers = {{K::Conv, 4, 3},
                  {K::Relu, 0, 0},
                  {K::MaxPool, 0, 0},
                  {K::Dense, 3, 0}};
    return initModel(cfg);
}

void criterion1() {
    Timer timer;
    bool pass = true;
    std::string why;

    for (uint64_t trial = 0; trial < 4 && pass; ++trial) {
        const Checkpoint net = primitivesNet(1000 + trial);
        const Tensor x0 = testutil::randomTensor({1, 6, 6}, 2000 + trial);
        for (const bool logitHead : {true, false}) {
            Tensor analytic;
            allPrimitivesForward(net, x0, logitHead, &analytic);
            const Tensor numeric = testutil::finiteDifferenceGradient(
                [&](const Tensor& x) {
                    return allPrimitivesForward(net, x, logitHead);
                },
                x0);
            if (!testutil::gradientsClose(analytic, numeric)) {
                pass = false;
                why = "composite-primitive tape mismatch";
            }
        }
    }

    for (uint64_t trial = 0; trial < 20 && pass; ++trial) {
        const bool conv = trial % 2 == 0;
        const Checkpoint net = conv
                                   ? testutil::tinyConvNet(6, 3, 3000 + trial)
                                   : testutil::tinyDenseNet(8, 6, 4, 3000 + trial);
        const Tensor x0 =
            conv ? testutil::randomTensor({1, 6, 6}, 41 + trial, 0.0, 1.0)
                 : testutil::randomTensor({1, 1, 8}, 41 + trial);
        const int cls = static_cast<int>(trial % 3);
        const Tensor analytic = inputGradient(net, x0, cls, ScoreMode::Logit);
        const Tensor numeric = testutil::finiteDifferenceGradient(
            [&](const Tensor& x) {
                Tape tape;
                const auto nodes = buildForward(tape, net, x, false, false);
                return tape.value(nodes.logits)[cls];
            },
            x0);
        if (!testutil::gradientsClose(analytic, numeric)) {
            pass = false;
            why = fmt("network %llu gradient mismatch",
                      (unsigned long long)trial);
        }
    }

    const double elapsed = timer.seconds();
    if (pass && elapsed >= 60.0) {
        pass = false;
        why = "runtime limit exceeded";
    }
    report(1, "autodiff vs central finite differences", pass,
           pass ? fmt("20 nets + all-primitive tape, %.1fs", elapsed) : why);
}

// ---------------------------------------------------------------- criterion 2

double bruteForceMi(const std::vector<std::vector<uint64_t>>& joint) {
    const size_t rows = joint.size(), cols = joint[0].size();
    double total = 0.0;
    std::vector<double> px(rows, 0.0), pz(cols, 0.0);
    for (size_t a = 0; a < rows; ++a)
        for (size_t b = 0; b < cols; ++b) total += double(joint[a][b]);
    for (size_t a = 0; a < rows; ++a)
        for (size_t b = 0; b < cols; ++b) {
            px[a] += joint[a][b] / total;
            pz[b] += joint[a][b] / total;
        }
    double mi = 0.0;
    for (size_t a = 0; a < rows; ++a)
        for (size_t b = 0; b < cols; ++b) {
            if (joint[a][b] == 0) continue;
            const double pab = joint[a][b] / total;
            mi += pab * std::log(pab / (px[a] * pz[b]));
        }
    return mi;
}

void criterion2() {
    Timer timer;
    bool pass = true;
    std::string why;

    for (uint64_t trial = 0; trial < 50 && pass; ++trial) {
        const size_t bins = 2 + rng::below(7, trial, 11);
        std::vector<std::vector<uint64_t>> joint(bins,
                                                 std::vector<uint64_t>(bins));
        for (size_t a = 0; a < bins; ++a)
            for (size_t b = 0; b < bins; ++b)
                joint[a][b] = rng::below(25, trial, 12, a, b);
        joint[bins / 2][bins / 2] += 1;
        std::vector<double> xs, zs;
        for (size_t a = 0; a < bins; ++a)
            for (size_t b = 0; b < bins; ++b)
                for (uint64_t k = 0; k < joint[a][b]; ++k) {
                    xs.push_back((a + 0.5) / double(bins));
                    zs.push_back((b + 0.5) / double(bins));
                }
        HistogramConfig cfg;
        cfg.bins = bins;
        const double got =
            estimateMI(Tensor::fromVector(xs), Tensor::fromVector(zs), cfg)
                .miNats;
        if (std::fabs(got - bruteForceMi(joint)) > 1e-12) {
            pass = false;
            why = fmt("table %llu off by %.3g", (unsigned long long)trial,
                      std::fabs(got - bruteForceMi(joint)));
        }
    }

    if (pass) {
        std::vector<double> values;
        for (int rep = 0; rep < 64; ++rep)
            for (const double v : {0.1, 0.35, 0.6, 0.85}) values.push_back(v);
        HistogramConfig cfg;  // B = 32 >= 4
        const Tensor x = Tensor::fromVector(values);
        if (std::fabs(estimateMI(x, x, cfg).miNats - std::log(4.0)) > 1e-12) {
            pass = false;
            why = "ln4 identity case failed";
        }
    }

    if (pass) {
        const size_t n = 100000;
        std::vector<double> xs(n), zs(n);
        for (size_t i = 0; i < n; ++i) {
            xs[i] = rng::uniform01(14, 1, i);
            zs[i] = rng::uniform01(14, 2, i);
        }
        HistogramConfig cfg;
        cfg.bins = 16;
        const double mi =
            estimateMI(Tensor::fromVector(xs), Tensor::fromVector(zs), cfg)
                .miNats;
        if (!(mi < 0.05)) {
            pass = false;
            why = fmt("independence MI %.4f >= 0.05", mi);
        }
    }

    const double elapsed = timer.seconds();
    if (pass && elapsed >= 60.0) {
        pass = false;
        why = "runtime limit exceeded";
    }
    report(2, "MI estimator vs brute-force oracle", pass,
           pass ? fmt("50 tables, ln4, independence, %.1fs", elapsed) : why);
}

// ---------------------------------------------------------------- criterion 3

void criterion3(const Context& ctx) {
    bool pass = !ctx.benchEstimates.empty();
    std::string why = pass ? "" : "no benchmark outputs to check";
    size_t checked = 0;
    for (const MIEstimate& est : ctx.benchEstimates) {
        const double direct = std::min(1.0, std::exp(est.miNats - est.entropyXNats));
        if (std::fabs(est.certaintyLowerBound - direct) > 1e-12 ||
            std::fabs(std::exp(-est.conditionalEntropyNats) -
                      est.certaintyLowerBound) > 1e-12) {
            pass = false;
            why = fmt("identity broken at estimate %zu", checked);
            break;
        }
        ++checked;
    }
    report(3, "certainty bound exp(I - H) identity", pass,
           pass ? fmt("%zu benchmark estimates within 1e-12", checked) : why);
}

// ---------------------------------------------------------------- criterion 4

void criterion4() {
    Timer timer;
    bool pass = true;
    std::string why;

    const size_t side = 1000;  // one draw = 1e6 site trials
    const Tensor base({1, side, side}, std::vector<double>(side * side, 0.5));
    for (const double p : {0.3, 0.5, 0.7}) {
        SamplerSpec spec;
        spec.kind = SamplerKind::BernoulliDrop;
        spec.p = p;
        const Tensor sample = SampleStream{spec, base, kSeed, 1}.draw(0);
        const double kept = keptFraction(sample, base);
        if (std::fabs(kept - (1.0 - p)) > 0.01) {
            pass = false;
            why = fmt("kept rate at p=%.1f is %.4f", p, kept);
            break;
        }
        for (size_t k = 0; k < sample.size(); ++k) {
            if (sample[k] != base[k] && sample[k] != 0.0) {
                pass = false;
                why = "support invariant violated";
                break;
            }
        }
        if (!pass) break;
    }

    const double elapsed = timer.seconds();
    if (pass && elapsed >= 60.0) {
        pass = false;
        why = "runtime limit exceeded";
    }
    report(4, "Bernoulli kept-rate and support invariant", pass,
           pass ? fmt("p=0.3/0.5/0.7 within 0.01 over 1e6 trials, %.1fs",
                      elapsed)
                : why);
}

// ---------------------------------------------------------------- criterion 5

void criterion5(const Context& ctx) {
    bool pass = true;
    std::string why;

    const Tensor probe = ctx.testData.image(0);
    const int label = ctx.testData.labels[0];
    const AttributionMap vanilla =
        integrate(ctx.reference, probe, label, SamplerSpec{}, 1, kSeed, false);
    if (!(vanilla.raw ==
          channelReduce(inputGradient(ctx.reference, probe, label,
                                      ScoreMode::Logit)))) {
        pass = false;
        why = "vanilla map != |inputGradient|";
    }
    for (const size_t n : {5, 16, 50}) {
        const AttributionMap repeated = integrate(
            ctx.reference, probe, label, SamplerSpec{}, n, kSeed, false);
        if (pass &&
            !(repeated.raw == vanilla.raw && repeated.values == vanilla.values)) {
            pass = false;
            why = fmt("identity N=%zu differs from vanilla", n);
        }
    }

    if (pass) {
        const Tensor w({2, 9}, {0.4, -1.2, 2.5, 0.0, 1.1, -0.6, 3.2, -2.1, 0.9,
                                1, 1, 1, 1, 1, 1, 1, 1, 1});
        const Checkpoint linear =
            testutil::linearModel(w, Tensor({2}), {1, 3, 3});
        const Tensor x = testutil::randomTensor({1, 3, 3}, 5, 0.1, 1.0);
        Tensor expected({3, 3});
        for (size_t k = 0; k < 9; ++k) expected[k] = std::fabs(w[k]);
        for (const char* token :
             {"bernoulli:0.7", "gaussian:0.3", "linear", "identity"}) {
            for (const size_t n : {1, 3, 10, 37}) {
                const AttributionMap map = integrate(
                    linear, x, 0, parseSamplerSpec(token), n, 7, false);
                if (!(map.raw == expected)) {
                    pass = false;
                    why = fmt("linear model under %s N=%zu", token, n);
                }
            }
        }
    }
    report(5, "degenerate integration equivalences", pass,
           pass ? "identity==vanilla and linear==|w|, bit-exact" : why);
}

// ---------------------------------------------------------------- criterion 6

int runCli(const Context& ctx, const std::string& args) {
    const std::string cmd = ctx.cli + " " + args + " >> " +
                            (ctx.work / "cli.log").string() + " 2>&1";
    return std::system(cmd.c_str());
}

bool sameArtifacts(const fs::path& a, const fs::path& b, std::string& why) {
    size_t compared = 0;
    for (const auto& item : fs::directory_iterator(a)) {
        const auto name = item.path().filename();
        if (!fs::exists(b / name)) {
            why = "missing artifact " + name.string();
            return false;
        }
        if (testutil::readFileBytes(item.path()) !=
            testutil::readFileBytes(b / name)) {
            why = "artifact differs: " + name.string();
            return false;
        }
        ++compared;
    }
    if (compared == 0) {
        why = "no artifacts produced";
        return false;
    }
    return true;
}

void criterion6(Context& ctx) {
    Timer timer;
    bool pass = true;
    std::string why;

    const fs::path dir = ctx.work / "determinism";
    fs::create_directories(dir);
    const fs::path fixtures = testutil::fixturesDir();
    const fs::path images = ctx.work / "test-images.idx";
    const fs::path labels = ctx.work / "test-labels.idx";
    const std::string ckpt = (fixtures / "reference.aclb").string();

    const auto writeCfg = [&](const std::string& name,
                              const std::string& body) {
        std::ofstream out(dir / name);
        out << "[data]\nimages = " << images.string()
            << "\nlabels = " << labels.string() << "\n" << body;
        return (dir / name).string();
    };
    const std::string explainCfg =
        writeCfg("explain.cfg", "[explain]\ncheckpoint = " + ckpt +
                                    "\nsampler = bernoulli:0.7\nsamples = 50\n");
    const std::string benchCfg =
        writeCfg("bench.cfg", "[bench]\ncheckpoint = " + ckpt +
                                  "\nimageCount = 6\nsamples = 10\n");
    const std::string sweepCfg = writeCfg(
        "sweep.cfg", "[sweep]\ncheckpoint = " + ckpt +
                         "\ngrid = 0,0.5,1\nsamples = 8\nimageCount = 5\n");
    const std::string projectCfg =
        writeCfg("project.cfg",
                 "[project]\ncheckpoint = " + ckpt +
                     "\nsamplers = bernoulli:0.7,gaussian:0.5\nperGroup = 40\n");

    const struct {
        const char* command;
        const std::string* config;
    } cases[] = {{"explain", &explainCfg},
                 {"bench", &benchCfg},
                 {"sweep", &sweepCfg},
                 {"project", &projectCfg}};

    for (const auto& c : cases) {
        if (!pass) break;
        const fs::path outA = dir / (std::string(c.command) + "-a");
        const fs::path outB = dir / (std::string(c.command) + "-b");
        const fs::path outT = dir / (std::string(c.command) + "-t4");
        for (const auto& [out, threads] :
             {std::pair<fs::path, const char*>{outA, "1"},
              {outB, "1"},
              {outT, "4"}}) {
            if (runCli(ctx, std::string(c.command) + " --config " + *c.config +
                                " --out " + out.string() + " --threads " +
                                threads) != 0) {
                pass = false;
                why = std::string(c.command) + " exited nonzero";
                break;
            }
        }
        if (pass && !sameArtifacts(outA, outB, why)) pass = false;
        if (pass && !sameArtifacts(outA, outT, why)) {
            why = std::string(c.command) + " across workers: " + why;
            pass = false;
        }
    }

    report(6, "CLI byte determinism (reruns, workers)", pass,
           pass ? fmt("explain/bench/sweep/project x threads {1,4}, %.0fs",
                      timer.seconds())
                : why);
}

// ---------------------------------------------------------------- criterion 7

void criterion7(Context& ctx) {
    Timer timer;
    bool pass = true;
    std::string why;

    HistogramConfig cfg;  // B = 32, per-image pooling
    const auto methods =
        parseBenchmarkMethods("bernoulli:0.7,gaussian:0.15,identity,linear");
    ctx.benchTable = benchmark(ctx.reference, ctx.testData, methods, 100, 100,
                               kSeed, cfg, true, ScoreMode::Logit, 2);

    // Recompute the feature-suppression row's full estimates for criterion 3.
    const Dataset sample = subsample(ctx.testData, 100, kSeed);
    for (size_t i = 0; i < sample.count(); ++i) {
        const AttributionMap map =
            integrate(ctx.reference, sample.image(i), sample.labels[i],
                      methods[0].sampler, 100,
                      rng::word(kSeed, rng::streams::kBenchStream, i), false,
                      ScoreMode::Logit, 2);
        ctx.benchEstimates.push_back(
            estimateMI(sample.image(i), map.values, cfg));
    }

    const auto& rows = ctx.benchTable.rows;
    const double ours = rows[0].meanMiNats;
    std::string winsDetail;
    for (size_t m = 1; m < rows.size() && pass; ++m) {
        if (!(ours > rows[m].meanMiNats)) {
            pass = false;
            why = fmt("mean MI %.4f not above %s (%.4f)", ours,
                      rows[m].method.c_str(), rows[m].meanMiNats);
            break;
        }
        size_t wins = 0;
        for (size_t i = 0; i < rows[m].perImageMi.size(); ++i) {
            if (rows[0].perImageMi[i] > rows[m].perImageMi[i]) ++wins;
        }
        winsDetail += fmt("%zu%% ", wins);
        if (wins < 70) {
            pass = false;
            why = fmt("paired wins vs %s only %zu/100", rows[m].method.c_str(),
                      wins);
        }
    }

    const double elapsed = timer.seconds();
    if (pass && elapsed >= 900.0) {
        pass = false;
        why = "runtime limit exceeded";
    }
    report(7, "feature suppression tops the benchmark", pass,
           pass ? fmt("MI %.4f > %.4f/%.4f/%.4f, wins %s, %.0fs", ours,
                      rows[1].meanMiNats, rows[2].meanMiNats,
                      rows[3].meanMiNats, winsDetail.c_str(), elapsed)
                : why);
}

// ---------------------------------------------------------------- criterion 8

size_t argmaxIndex(const std::vector<double>& v) {
    size_t best = 0;
    for (size_t i = 1; i < v.size(); ++i) {
        if (v[i] > v[best]) best = i;
    }
    return best;
}

size_t unimodalViolations(const std::vector<double>& v) {
    const size_t peak = argmaxIndex(v);
    size_t violations = 0;
    for (size_t i = 0; i + 1 < v.size(); ++i) {
        if (i < peak ? v[i + 1] < v[i] : v[i + 1] > v[i]) ++violations;
    }
    return violations;
}

void criterion8(Context& ctx) {
    Timer timer;
    bool pass = true;
    std::string why;

    HistogramConfig cfg;
    const std::vector<double> grid = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5,
                                      0.6, 0.7, 0.8, 0.9, 1.0};
    const SweepResult sweep =
        pSweep(ctx.reference, ctx.testData, grid, 50, 30, kSeed, cfg,
               ScoreMode::LogProbability, 2);

    if (!(sweep.argmaxMI >= 0.4 && sweep.argmaxMI <= 0.9)) {
        pass = false;
        why = fmt("MI argmax %.1f outside [0.4,0.9]", sweep.argmaxMI);
    }
    if (pass && !(sweep.argmaxGradNorm >= 0.4 && sweep.argmaxGradNorm <= 0.9)) {
        pass = false;
        why = fmt("grad argmax %.1f outside [0.4,0.9]", sweep.argmaxGradNorm);
    }
    const size_t miViolations = unimodalViolations(sweep.meanMI);
    const size_t gradViolations = unimodalViolations(sweep.meanGradNorm);
    if (pass && (miViolations > 1 || gradViolations > 1)) {
        pass = false;
        why = fmt("unimodality violations: mi %zu, grad %zu", miViolations,
                  gradViolations);
    }

    const double elapsed = timer.seconds();
    if (pass && elapsed >= 900.0) {
        pass = false;
        why = "runtime limit exceeded";
    }
    report(8, "interior optimal dropping probability", pass,
           pass ? fmt("argmax MI %.1f / grad %.1f, violations %zu/%zu, %.0fs",
                      sweep.argmaxMI, sweep.argmaxGradNorm, miViolations,
                      gradViolations, elapsed)
                : why);
}

// ---------------------------------------------------------------- criterion 9

void criterion9(Context& ctx) {
    Timer timer;
    bool pass = true;
    std::string why;

    // Kernel PCA against the dense Jacobi oracle on small fixtures.
    for (uint64_t trial = 0; trial < 5 && pass; ++trial) {
        const size_t n = 5 + trial;
        std::vector<std::vector<double>> rows(n, std::vector<double>(6));
        for (size_t i = 0; i < n; ++i)
            for (size_t j = 0; j < 6; ++j)
                rows[i][j] =
                    rng::uniformRange(-1.0, 1.0, 600 + trial, i, j) + 0.02;
        Tensor matrix({n, 6});
        for (size_t i = 0; i < n; ++i)
            for (size_t j = 0; j < 6; ++j) matrix[i * 6 + j] = rows[i][j];
        const Tensor points = cosineKernelPca(matrix, 2);

        const auto eig =
            testutil::jacobiEigenSymmetric(testutil::centeredCosineKernel(rows));
        for (size_t k = 0; k < 2 && pass; ++k) {
            std::vector<double> v = eig.vectors[k];
            size_t big = 0;
            for (size_t i = 1; i < n; ++i)
                if (std::fabs(v[i]) > std::fabs(v[big])) big = i;
            if (v[big] < 0.0)
                for (double& x : v) x = -x;
            const double scale = std::sqrt(std::max(0.0, eig.values[k]));
            for (size_t i = 0; i < n; ++i) {
                if (std::fabs(points[i * 2 + k] - v[i] * scale) > 1e-8) {
                    pass = false;
                    why = fmt("kpca off oracle at fixture %llu",
                              (unsigned long long)trial);
                }
            }
        }
    }

    double bern = 0, g05 = 0, g09 = 0;
    if (pass) {
        const std::vector<SamplerSpec> grid = {
            parseSamplerSpec("bernoulli:0.7"), parseSamplerSpec("gaussian:0.5"),
            parseSamplerSpec("gaussian:0.9")};
        const ProjectionResult proj =
            alignmentStudy(ctx.reference, ctx.testData, grid, 1000, kSeed, 2);
        bern = proj.centroidDistanceToNatural[1].second;
        g05 = proj.centroidDistanceToNatural[2].second;
        g09 = proj.centroidDistanceToNatural[3].second;
        if (!(bern < g05 && bern < g09)) {
            pass = false;
            why = fmt("distances: bern %.4f, g0.5 %.4f, g0.9 %.4f", bern, g05,
                      g09);
        }
    }

    report(9, "suppression samples align with natural", pass,
           pass ? fmt("dist %.4f < %.4f / %.4f, oracle 1e-8, %.0fs", bern, g05,
                      g09, timer.seconds())
                : why);
}

// --------------------------------------------------------------- criterion 10

void criterion10(Context& ctx) {
    Timer timer;
    bool pass = true;
    std::string why;

    HistogramConfig cfg;
    const auto methods = parseBenchmarkMethods("bernoulli:0.7,gaussian:0.15");
    const AugmentSpec aug{{0.1, 0.3}, {0.1, 0.9}};
    TrainSpec fineTune;
    fineTune.learningRate = 1e-3;
    fineTune.batchSize = 8;
    fineTune.batchCount = 5000;
    fineTune.seed = kSeed;

    const FragilityReport rpt =
        augmentationFragility(ctx.reference, ctx.trainData, ctx.testData, aug,
                              fineTune, methods, 50, 50, kSeed, cfg, 2);

    const double bernDrop = -rpt.changes[0].relativeChange;
    const double gaussDrop = -rpt.changes[1].relativeChange;
    if (!(gaussDrop > bernDrop)) {
        pass = false;
        why = fmt("relative drops: gaussian %.4f !> bernoulli %.4f", gaussDrop,
                  bernDrop);
    }

    const double elapsed = timer.seconds();
    if (pass && elapsed >= 1200.0) {
        pass = false;
        why = "runtime limit exceeded";
    }
    report(10, "noise sampling degrades under augmentation", pass,
           pass ? fmt("rel drop gaussian %+.4f > bernoulli %+.4f, %.0fs",
                      gaussDrop, bernDrop, elapsed)
                : why);
}

// --------------------------------------------------------------- criterion 11

void criterion11(Context& ctx) {
    bool pass = true;
    std::string why;

    if (bwrColor(0.0) != std::array<uint8_t, 3>{0, 0, 255} ||
        bwrColor(0.5) != std::array<uint8_t, 3>{255, 255, 255} ||
        bwrColor(1.0) != std::array<uint8_t, 3>{255, 0, 0}) {
        pass = false;
        why = "colormap endpoints wrong";
    }

    if (pass) {
        const fs::path dir = ctx.work / "render";
        fs::create_directories(dir);
        const fs::path fixtures = testutil::fixturesDir();
        {
            std::ofstream cfg(dir / "explain.cfg");
            cfg << "[data]\nimages = "
                << (fixtures / "fixture-images.idx").string()
                << "\nlabels = " << (fixtures / "fixture-labels.idx").string()
                << "\n[explain]\ncheckpoint = "
                << (fixtures / "reference.aclb").string()
                << "\nsampler = bernoulli:0.7\nsamples = 50\n";
        }
        if (runCli(ctx, "explain --config " + (dir / "explain.cfg").string() +
                            " --out " + (dir / "out").string()) != 0) {
            pass = false;
            why = "explain run failed";
        } else if (testutil::readFileBytes(dir / "out" / "heatmap.png") !=
                   testutil::readFileBytes(fixtures / "golden_heatmap.png")) {
            pass = false;
            why = "heatmap.png differs from golden";
        } else if (testutil::readFileBytes(dir / "out" / "map.csv") !=
                   testutil::readFileBytes(fixtures / "golden_map.csv")) {
            pass = false;
            why = "map.csv differs from golden";
        }
    }
    report(11, "bwr endpoints and golden rendering", pass,
           pass ? "blue/white/red exact, golden byte-stable" : why);
}

}  // namespace

int main(int argc, char** argv) {
    Context ctx;
    for (int i = 1; i + 1 < argc; i += 2) {
        if (std::string(argv[i]) == "--cli") ctx.cli = argv[i + 1];
    }
    if (ctx.cli.empty()) {
        std::fprintf(stderr, "usage: acceptance --cli <path-to-aclab>\n");
        return 2;
    }
    ctx.work = fs::temp_directory_path() / "aclab-acceptance";
    fs::remove_all(ctx.work);
    fs::create_directories(ctx.work);

    Timer total;
    std::printf("building reference corpora and model (seed %llu)...\n",
                (unsigned long long)kSeed);
    ctx.trainData = synthesizeDigits(6000, kSeed);
    ctx.testData = synthesizeDigits(2000, rng::word(kSeed, 0x7e57));
    saveIdx(ctx.testData, ctx.work / "test-images.idx",
            ctx.work / "test-labels.idx");
    TrainSpec spec;
    spec.learningRate = 0.05;
    spec.batchSize = 8;
    spec.epochs = 3;
    spec.seed = kSeed;
    ctx.reference =
        train(initModel(ModelConfig::reference({1, 28, 28}, 10, kSeed)),
              ctx.trainData, spec, &ctx.testData);
    std::printf("reference model trained: train acc %.4f, test acc %.4f "
                "(%.0fs)\n",
                ctx.reference.meta.trainAccuracy,
                ctx.reference.meta.testAccuracy, total.seconds());

    criterion1();
    criterion2();
    criterion4();
    criterion5(ctx);
    criterion6(ctx);
    criterion7(ctx);
    criterion3(ctx);  // checks criterion 7's estimates
    criterion8(ctx);
    criterion9(ctx);
    criterion10(ctx);
    criterion11(ctx);

    std::printf("%s: %d criterion(s) failed, total %.0fs\n",
                failures == 0 ? "ACCEPTANCE PASSED" : "ACCEPTANCE FAILED",
                failures, total.seconds());
    return failures == 0 ? 0 : 1;
}
