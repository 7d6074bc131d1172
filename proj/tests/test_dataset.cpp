#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <vector>

#include "aclab/dataset.hpp"
#include "aclab/digits.hpp"
#include "aclab/error.hpp"
#include "support/test_util.hpp"

using namespace aclab;
namespace fs = std::filesystem;

namespace {

fs::path tempDir() {
    const fs::path dir = fs::temp_directory_path() / "aclab-dataset-test";
    fs::create_directories(dir);
    return dir;
}

void writeBytes(const fs::path& path, const std::vector<uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<long>(bytes.size()));
}

void pushBig(std::vector<uint8_t>& v, uint32_t x) {
    v.push_back(x >> 24);
    v.push_back((x >> 16) & 0xFF);
    v.push_back((x >> 8) & 0xFF);
    v.push_back(x & 0xFF);
}

// Hand-built 2-image 2x3 IDX pair; pixel bytes chosen to hit both endpoints.
struct Fixture {
    fs::path images, labels;
    std::vector<uint8_t> pixelBytes;
};

Fixture makeIdxFixture() {
    Fixture fx;
    fx.images = tempDir() / "imgs.idx";
    fx.labels = tempDir() / "labs.idx";
    fx.pixelBytes = {0, 255, 17, 128, 42, 200, 255, 0, 99, 1, 254, 60};
    std::vector<uint8_t> img;
    pushBig(img, 0x00000803);
    pushBig(img, 2);
    pushBig(img, 2);
    pushBig(img, 3);
    img.insert(img.end(), fx.pixelBytes.begin(), fx.pixelBytes.end());
    writeBytes(fx.images, img);
    std::vector<uint8_t> lab;
    pushBig(lab, 0x00000801);
    pushBig(lab, 2);
    lab.push_back(7);
    lab.push_back(3);
    writeBytes(fx.labels, lab);
    return fx;
}

}  // namespace

TEST_CASE("hand-built IDX fixture loads byte-exactly") {
    const Fixture fx = makeIdxFixture();
    const Dataset data = loadIdx(fx.images, fx.labels);
    REQUIRE(data.count() == 2);
    CHECK(data.images.shape() == std::vector<size_t>{2, 1, 2, 3});
    for (size_t i = 0; i < fx.pixelBytes.size(); ++i) {
        CHECK(data.images[i] == static_cast<double>(fx.pixelBytes[i]) / 255.0);
    }
    CHECK(data.labels == std::vector<int>{7, 3});
    CHECK(data.images[0] == 0.0);  // byte 0
    CHECK(data.images[1] == 1.0);  // byte 255
    data.validate(10);
}

TEST_CASE("loading is idempotent") {
    const Fixture fx = makeIdxFixture();
    const Dataset a = loadIdx(fx.images, fx.labels);
    const Dataset b = loadIdx(fx.images, fx.labels);
    CHECK(a.images == b.images);
    CHECK(a.labels == b.labels);
}

TEST_CASE("bad magic, truncation and count mismatch have distinct errors") {
    const Fixture fx = makeIdxFixture();

    SUBCASE("image magic") {
        std::vector<uint8_t> img;
        pushBig(img, 0x00000804);
        pushBig(img, 1);
        pushBig(img, 1);
        pushBig(img, 1);
        img.push_back(0);
        const fs::path bad = tempDir() / "badmagic.idx";
        writeBytes(bad, img);
        CHECK_THROWS_WITH_AS(loadIdx(bad, fx.labels),
                             doctest::Contains("magic"), IoError);
    }
    SUBCASE("label magic") {
        std::vector<uint8_t> lab;
        pushBig(lab, 0x00000803);
        pushBig(lab, 2);
        lab.push_back(0);
        lab.push_back(1);
        const fs::path bad = tempDir() / "badlabmagic.idx";
        writeBytes(bad, lab);
        CHECK_THROWS_WITH_AS(loadIdx(fx.images, bad),
                             doctest::Contains("label magic"), IoError);
    }
    SUBCASE("truncated") {
        std::vector<uint8_t> img;
        pushBig(img, 0x00000803);
        pushBig(img, 2);
        pushBig(img, 2);
        pushBig(img, 3);
        img.push_back(0);  // 1 of 12 pixels
        const fs::path bad = tempDir() / "short.idx";
        writeBytes(bad, img);
        CHECK_THROWS_WITH_AS(loadIdx(bad, fx.labels),
                             doctest::Contains("truncated"), IoError);
    }
    SUBCASE("count mismatch") {
        std::vector<uint8_t> lab;
        pushBig(lab, 0x00000801);
        pushBig(lab, 3);
        lab.push_back(1);
        lab.push_back(2);
        lab.push_back(3);
        const fs::path bad = tempDir() / "mismatch.idx";
        writeBytes(bad, lab);
        CHECK_THROWS_WITH_AS(loadIdx(fx.images, bad),
                             doctest::Contains("count mismatch"), IoError);
    }
}

TEST_CASE("subsample of full size is a permutation") {
    const Dataset digits = synthesizeDigits(64, 5);
    const Dataset shuffled = subsample(digits, 64, 99);
    std::multiset<int> before(digits.labels.begin(), digits.labels.end());
    std::multiset<int> after(shuffled.labels.begin(), shuffled.labels.end());
    CHECK(before == after);
    const auto indices = subsampleIndices(64, 64, 99);
    std::set<size_t> unique(indices.begin(), indices.end());
    CHECK(unique.size() == 64);
}

TEST_CASE("subsample is deterministic and rejects oversize requests") {
    CHECK(subsampleIndices(1000, 10, 42) == subsampleIndices(1000, 10, 42));
    CHECK(subsampleIndices(1000, 10, 42) != subsampleIndices(1000, 10, 43));
    CHECK_THROWS_AS(subsampleIndices(10, 11, 1), std::invalid_argument);
}

TEST_CASE("pinned subsample fixture: seed 1860867, n=100 of the test corpus") {
    std::ifstream in(testutil::fixturesDir() /
                     "subsample_seed1860867_n100.txt");
    REQUIRE(in.good());
    std::vector<size_t> pinned;
    size_t v;
    while (in >> v) pinned.push_back(v);
    REQUIRE(pinned.size() == 100);
    CHECK(subsampleIndices(2000, 100, 1860867) == pinned);
}

TEST_CASE("raw RGB directory loader interleaves into planar channels") {
    const fs::path dir = tempDir() / "rgbdir";
    fs::remove_all(dir);
    fs::create_directories(dir);
    // 2x1 images: pixel0 = (255,0,10), pixel1 = (0,128,255)
    writeBytes(dir / "0_4.rgb", {255, 0, 10, 0, 128, 255});
    writeBytes(dir / "1_9.rgb", {1, 2, 3, 4, 5, 6});
    const Dataset data = loadRawRgbDir(dir, 2, 1);
    REQUIRE(data.count() == 2);
    CHECK(data.labels == std::vector<int>{4, 9});
    CHECK(data.images.shape() == std::vector<size_t>{2, 3, 1, 2});
    // planar: R plane, then G, then B
    CHECK(data.images[0] == 1.0);  // R of pixel0
    CHECK(data.images[1] == 0.0);  // R of pixel1
    CHECK(data.images[2] == 0.0);  // G of pixel0
    CHECK(data.images[3] == 128.0 / 255.0);
    CHECK(data.images[4] == 10.0 / 255.0);
    CHECK(data.images[5] == 1.0);
    data.validate(10);

    writeBytes(dir / "2_1.rgb", {1, 2, 3});  // short file
    CHECK_THROWS_AS(loadRawRgbDir(dir, 2, 1), IoError);
}

TEST_CASE("synthetic digit corpus round-trips through IDX bit-exactly") {
    const Dataset digits = synthesizeDigits(32, 7);
    digits.validate(10);
    const fs::path imgs = tempDir() / "digits-img.idx";
    const fs::path labs = tempDir() / "digits-lab.idx";
    saveIdx(digits, imgs, labs);
    const Dataset loaded = loadIdx(imgs, labs);
    CHECK(loaded.images == digits.images);
    CHECK(loaded.labels == digits.labels);
}

TEST_CASE("synthetic digit corpus is deterministic and covers all classes") {
    const Dataset a = synthesizeDigits(200, 11);
    const Dataset b = synthesizeDigits(200, 11);
    CHECK(a.images == b.images);
    std::set<int> classes(a.labels.begin(), a.labels.end());
    CHECK(classes.size() == 10);
}
