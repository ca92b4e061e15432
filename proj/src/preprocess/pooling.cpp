#include "biohybrid/preprocess/pooling.hpp"

#include <string>

#include "biohybrid/errors.hpp"

namespace biohybrid::preprocess {

void PoolSpec::validate(int in_size) const {
    if (filter <= 0 || stride <= 0 || padding < 0) {
        throw ConfigError("pooling: filter and stride must be positive and padding non-negative");
    }
    const int span = in_size - filter + 2 * padding;
    if (span < 0 || span % stride != 0) {
        throw ConfigError("pooling: (" + std::to_string(in_size) + " - " + std::to_string(filter) + " + 2*" +
                          std::to_string(padding) + ") is not a multiple of stride " + std::to_string(stride));
    }
}

int PoolSpec::output_size(int in_size) const {
    validate(in_size);
    return (in_size - filter + 2 * padding) / stride + 1;
}

std::vector<double> avg_pool(std::span<const std::uint8_t> image, const PoolSpec& spec, int in_size) {
    if (image.size() != static_cast<std::size_t>(in_size * in_size)) {
        throw PreconditionError("avg_pool: image is not " + std::to_string(in_size) + "x" + std::to_string(in_size));
    }
    const int out = spec.output_size(in_size);
    const double inv_area = 1.0 / static_cast<double>(spec.filter * spec.filter);
    std::vector<double> pooled(static_cast<std::size_t>(out * out));
    for (int oy = 0; oy < out; ++oy) {
        for (int ox = 0; ox < out; ++ox) {
            double sum = 0.0;
            for (int fy = 0; fy < spec.filter; ++fy) {
                const int y = oy * spec.stride + fy - spec.padding;
                if (y < 0 || y >= in_size) continue;
                for (int fx = 0; fx < spec.filter; ++fx) {
                    const int x = ox * spec.stride + fx - spec.padding;
                    if (x < 0 || x >= in_size) continue;
                    sum += image[static_cast<std::size_t>(y * in_size + x)];
                }
            }
            pooled[static_cast<std::size_t>(oy * out + ox)] = sum * inv_area;
        }
    }
    return pooled;
}

std::vector<std::uint8_t> binarize(std::span<const double> image, double threshold) {
    std::vector<std::uint8_t> bits(image.size());
    for (std::size_t i = 0; i < image.size(); ++i) bits[i] = image[i] > threshold ? 1 : 0;
    return bits;
}

}  // namespace biohybrid::preprocess
