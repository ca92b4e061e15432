#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace biohybrid::preprocess {

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

// Contents of an unsigned-byte IDX file.
struct IdxArray {
    std::uint32_t magic = 0;
    std::vector<std::uint32_t> dims;
    std::vector<std::uint8_t> data;
};

// Parses raw IDX bytes and checks the magic against `expected_magic`.
IdxArray parse_idx(std::span<const std::uint8_t> bytes, std::uint32_t expected_magic);
std::vector<std::uint8_t> serialize_idx(const IdxArray& a);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

struct RawDataset {
    int rows = 28;
    int cols = 28;
    std::vector<std::vector<std::uint8_t>> images;  // row-major, rows*cols bytes each
    std::vector<std::uint8_t> labels;

    std::size_t size() const noexcept { return images.size(); }
    // The first n examples in file order.
    RawDataset head(std::size_t n) const;
    void validate() const;
};

RawDataset load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path);

// Loads "<split>-images-idx3-ubyte" and "<split>-labels-idx1-ubyte" from dir,
// where split is "train" or "t10k".
RawDataset load_mnist(const std::filesystem::path& dir, const std::string& split);

}  // namespace biohybrid::preprocess
