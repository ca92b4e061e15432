#include <cmath>
#include <filesystem>
#include <vector>

#include "doctest.h"

#include "biohybrid/errors.hpp"
#include "biohybrid/preprocess/adpp.hpp"
#include "biohybrid/preprocess/dataset.hpp"
#include "biohybrid/preprocess/idx.hpp"
#include "biohybrid/preprocess/pooling.hpp"

using namespace biohybrid;
using namespace biohybrid::preprocess;

namespace {

const std::filesystem::path kMnist = BIOHYBRID_TEST_MNIST_DIR;

bool have_mnist() { return std::filesystem::exists(kMnist / "train-images-idx3-ubyte"); }

PooledDataset toy_pooled() {
    PooledDataset p;
    p.side = 2;
    p.images = {{0, 50, 120, 200}, {10, 90, 100, 101}, {255, 255, 0, 30}};
    p.labels = {0, 1, 2};
    return p;
}

ParseError::Kind parse_kind(std::span<const std::uint8_t> bytes, std::uint32_t magic, std::size_t* offset) {
    try {
        parse_idx(bytes, magic);
    } catch (const ParseError& e) {
        *offset = e.offset();
        return e.kind();
    }
    FAIL("expected a parse error");
    return ParseError::Kind::Io;
}

}  // namespace

TEST_CASE("pool geometry") {
    PoolSpec spec;
    CHECK(spec.output_size() == 14);
    spec.validate();
    PoolSpec bad{3, 2, 0, 100};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    PoolSpec padded{4, 2, 1, 100};
    CHECK(padded.output_size() == 14);

    std::vector<std::uint8_t> constant(28 * 28, 77);
    const auto pooled = avg_pool(constant, spec);
    REQUIRE(pooled.size() == 196);
    for (double v : pooled) CHECK(v == 77.0);

    const std::vector<std::uint8_t> quad{0, 100, 100, 200};
    CHECK(avg_pool(quad, spec, 2) == std::vector<double>{100.0});
}

TEST_CASE("binarize tie rule and extremes") {
    const std::vector<double> img{0, 99, 100, 101, 255};
    CHECK(binarize(img, 100) == std::vector<std::uint8_t>{0, 0, 0, 1, 1});
    CHECK(binarize(img, 255) == std::vector<std::uint8_t>{0, 0, 0, 0, 0});
    CHECK(binarize(img, -1) == std::vector<std::uint8_t>{1, 1, 1, 1, 1});
}

TEST_CASE("threshold for target nin_b") {
    const auto p = toy_pooled();
    CHECK(mean_ninb_at(p, 100) == doctest::Approx(5.0 / 3.0));
    CHECK(threshold_for_target_ninb(p, mean_ninb_at(p, 100)) == 100);
    // Exhaustive scan oracle.
    for (double target : {0.0, 0.5, 1.0, 2.0, 2.7, 4.0}) {
        int best = 0;
        double best_d = 1e9;
        for (int t = 0; t <= 255; ++t) {
            const double d = std::abs(mean_ninb_at(p, t) - target);
            if (d <= best_d) {
                best_d = d;
                best = t;
            }
        }
        CHECK(threshold_for_target_ninb(p, target) == best);
    }
}

TEST_CASE("idx parse errors and round trip") {
    IdxArray a;
    a.magic = kIdxImagesMagic;
    a.dims = {2, 2, 3};
    a.data = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
    const auto bytes = serialize_idx(a);
    const auto back = parse_idx(bytes, kIdxImagesMagic);
    CHECK(back.dims == a.dims);
    CHECK(back.data == a.data);

    std::size_t off = 99;
    CHECK(parse_kind(bytes, kIdxLabelsMagic, &off) == ParseError::Kind::MagicMismatch);
    CHECK(off == 0);
    const std::vector<std::uint8_t> cut(bytes.begin(), bytes.end() - 5);
    CHECK(parse_kind(cut, kIdxImagesMagic, &off) == ParseError::Kind::Truncated);
    CHECK(off == cut.size());
    const std::vector<std::uint8_t> header_only(bytes.begin(), bytes.begin() + 6);
    CHECK(parse_kind(header_only, kIdxImagesMagic, &off) == ParseError::Kind::Truncated);
}

TEST_CASE("binary cache round trip") {
    const auto dir = std::filesystem::temp_directory_path() / "biohybrid_test_cache";
    std::filesystem::create_directories(dir);
    PooledDataset p = toy_pooled();
    const auto ds = binarize_dataset(p, 60);
    save_binary_cache(ds, dir / "cache.bin");
    const auto back = load_binary_cache(dir / "cache.bin");
    CHECK(back.vectors == ds.vectors);
    CHECK(back.labels == ds.labels);
    CHECK(back.width == ds.width);
    CHECK(back.spec == ds.spec);
    std::filesystem::remove_all(dir);
}

TEST_CASE("adpp selection rule") {
    const std::vector<AdppCandidate> one{{20, 100, 20.1, 0.3, 0.9}};
    CHECK(select_candidate(one) == 0);
    const std::vector<AdppCandidate> tie{{10, 140, 10, 0.9, 0.2}, {20, 100, 20, 0.9, 0.55}, {30, 60, 30, 0.8, 0.5}};
    CHECK(select_candidate(tie) == 1);
    const std::vector<AdppCandidate> best{{10, 140, 10, 0.95, 0.2}, {20, 100, 20, 0.9, 0.5}};
    CHECK(select_candidate(best) == 0);
}

TEST_CASE("official MNIST files") {
    if (!have_mnist()) {
        MESSAGE("MNIST not found at " << kMnist.string() << "; skipping");
        return;
    }
    const auto train = load_mnist(kMnist, "train");
    CHECK(train.size() == 60000);
    CHECK(train.labels.size() == 60000);
    CHECK(train.rows == 28);
    const auto test = load_mnist(kMnist, "t10k");
    CHECK(test.size() == 10000);

    std::size_t off = 0;
    const auto labels = read_file_bytes(kMnist / "train-labels-idx1-ubyte");
    CHECK(parse_kind(labels, kIdxImagesMagic, &off) == ParseError::Kind::MagicMismatch);
    const auto images = read_file_bytes(kMnist / "train-images-idx3-ubyte");
    const std::vector<std::uint8_t> mid(images.begin(), images.begin() + 16 + 784 * 3 + 100);
    CHECK(parse_kind(mid, kIdxImagesMagic, &off) == ParseError::Kind::Truncated);
    CHECK(off == mid.size());
    CHECK(serialize_idx(parse_idx(images, kIdxImagesMagic)) == images);

    const auto pooled = pool_dataset(train.head(1000), PoolSpec{});
    CHECK(pooled.side == 14);
    const int t = threshold_for_target_ninb(pooled, 20.0);
    CHECK(std::abs(mean_ninb_at(pooled, t) - 20.0) < 1.0);
}
