#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "biohybrid/preprocess/idx.hpp"
#include "biohybrid/preprocess/pooling.hpp"

namespace biohybrid::preprocess {

// Pooled grayscale images, kept so the binarization threshold can be re-tuned
// without pooling again.
struct PooledDataset {
    int side = 0;
    std::vector<std::vector<double>> images;
    std::vector<std::uint8_t> labels;
    PoolSpec spec;

    std::size_t size() const noexcept { return images.size(); }
};

struct BinaryDataset {
    int width = 0;
    std::vector<std::vector<std::uint8_t>> vectors;
    std::vector<std::uint8_t> labels;
    double mean_nin_b = 0.0;
    PoolSpec spec;  // binarize_threshold holds the threshold actually used

    std::size_t size() const noexcept { return vectors.size(); }
};

PooledDataset pool_dataset(const RawDataset& raw, const PoolSpec& spec);
BinaryDataset binarize_dataset(const PooledDataset& pooled, double threshold);
// Pool with spec, then binarize at spec.binarize_threshold.
BinaryDataset preprocess_dataset(const RawDataset& raw, const PoolSpec& spec);

// Mean number of 1-bits per image when binarizing at `threshold`.
double mean_ninb_at(const PooledDataset& pooled, double threshold);

// The integer threshold in 0..255 whose mean Nin_b is closest to `target`;
// ties go to the higher threshold.
int threshold_for_target_ninb(const PooledDataset& pooled, double target);

// Compact cache: header "BHBD", format version, PoolSpec, count and width,
// then per example one label byte and the bits packed LSB-first.
void save_binary_cache(const BinaryDataset& ds, const std::filesystem::path& path);
BinaryDataset load_binary_cache(const std::filesystem::path& path);

}  // namespace biohybrid::preprocess
