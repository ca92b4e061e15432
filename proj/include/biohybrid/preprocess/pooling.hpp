#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace biohybrid::preprocess {

// Filter-and-pool compression followed by binarization. Padding pixels are 0.
struct PoolSpec {
    int filter = 2;
    int stride = 2;
    int padding = 0;
    double binarize_threshold = 100.0;

    // Throws ConfigError unless (in - filter + 2*padding) is a non-negative
    // multiple of stride.
    void validate(int in_size = 28) const;
    int output_size(int in_size = 28) const;

    friend bool operator==(const PoolSpec&, const PoolSpec&) = default;
};

// Mean of each filter window over a square row-major image of side `in_size`.
std::vector<double> avg_pool(std::span<const std::uint8_t> image, const PoolSpec& spec, int in_size = 28);

// bit = 1 iff pixel > threshold (stroke pixels are high intensity).
std::vector<std::uint8_t> binarize(std::span<const double> image, double threshold);

}  // namespace biohybrid::preprocess
