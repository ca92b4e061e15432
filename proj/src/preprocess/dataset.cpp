#include "biohybrid/preprocess/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "biohybrid/errors.hpp"

namespace biohybrid::preprocess {

namespace {

constexpr char kCacheMagic[4] = {'B', 'H', 'B', 'D'};
constexpr std::uint32_t kCacheVersion = 1;

template <typename T>
void put(std::vector<std::uint8_t>& out, const T& v) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
    out.insert(out.end(), p, p + sizeof(T));
}

template <typename T>
T get(const std::vector<std::uint8_t>& in, std::size_t& off) {
    if (off + sizeof(T) > in.size()) {
        throw ParseError(ParseError::Kind::Truncated, "binary cache truncated at byte " + std::to_string(in.size()),
                         in.size());
    }
    T v;
    std::memcpy(&v, in.data() + off, sizeof(T));
    off += sizeof(T);
    return v;
}

}  // namespace

PooledDataset pool_dataset(const RawDataset& raw, const PoolSpec& spec) {
    raw.validate();
    if (raw.rows != raw.cols) throw PreconditionError("pool_dataset: images must be square");
    PooledDataset out;
    out.side = spec.output_size(raw.rows);
    out.spec = spec;
    out.labels = raw.labels;
    out.images.reserve(raw.size());
    for (const auto& im : raw.images) out.images.push_back(avg_pool(im, spec, raw.rows));
    return out;
}

BinaryDataset binarize_dataset(const PooledDataset& pooled, double threshold) {
    BinaryDataset out;
    out.width = pooled.side * pooled.side;
    out.labels = pooled.labels;
    out.spec = pooled.spec;
    out.spec.binarize_threshold = threshold;
    out.vectors.reserve(pooled.size());
    std::size_t ones = 0;
    for (const auto& im : pooled.images) {
        out.vectors.push_back(binarize(im, threshold));
        ones += static_cast<std::size_t>(std::count(out.vectors.back().begin(), out.vectors.back().end(), 1));
    }
    out.mean_nin_b = out.vectors.empty() ? 0.0 : static_cast<double>(ones) / static_cast<double>(out.size());
    return out;
}

BinaryDataset preprocess_dataset(const RawDataset& raw, const PoolSpec& spec) {
    return binarize_dataset(pool_dataset(raw, spec), spec.binarize_threshold);
}

double mean_ninb_at(const PooledDataset& pooled, double threshold) {
    if (pooled.images.empty()) return 0.0;
    std::size_t ones = 0;
    for (const auto& im : pooled.images) {
        for (double v : im) ones += v > threshold ? 1 : 0;
    }
    return static_cast<double>(ones) / static_cast<double>(pooled.size());
}

int threshold_for_target_ninb(const PooledDataset& pooled, double target) {
    if (pooled.images.empty()) throw PreconditionError("threshold_for_target_ninb: empty dataset");
    std::vector<double> values;
    for (const auto& im : pooled.images) values.insert(values.end(), im.begin(), im.end());
    std::sort(values.begin(), values.end());
    const auto n = static_cast<double>(pooled.size());
    int best = 0;
    double best_gap = 0.0;
    for (int t = 0; t <= 255; ++t) {
        const auto above = static_cast<std::size_t>(
            values.end() - std::upper_bound(values.begin(), values.end(), static_cast<double>(t)));
        const double gap = std::abs(static_cast<double>(above) / n - target);
        if (t == 0 || gap <= best_gap) {
            best = t;
            best_gap = gap;
        }
    }
    return best;
}

void save_binary_cache(const BinaryDataset& ds, const std::filesystem::path& path) {
    std::vector<std::uint8_t> out(kCacheMagic, kCacheMagic + 4);
    put(out, kCacheVersion);
    put(out, static_cast<std::int32_t>(ds.spec.filter));
    put(out, static_cast<std::int32_t>(ds.spec.stride));
    put(out, static_cast<std::int32_t>(ds.spec.padding));
    put(out, ds.spec.binarize_threshold);
    put(out, static_cast<std::uint32_t>(ds.size()));
    put(out, static_cast<std::uint32_t>(ds.width));
    const std::size_t packed = (static_cast<std::size_t>(ds.width) + 7) / 8;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        out.push_back(ds.labels[i]);
        std::vector<std::uint8_t> bytes(packed, 0);
        for (std::size_t b = 0; b < ds.vectors[i].size(); ++b) {
            if (ds.vectors[i][b]) bytes[b / 8] |= static_cast<std::uint8_t>(1u << (b % 8));
        }
        out.insert(out.end(), bytes.begin(), bytes.end());
    }
    write_file_bytes(path, out);
}

BinaryDataset load_binary_cache(const std::filesystem::path& path) {
    const auto in = read_file_bytes(path);
    if (in.size() < 4 || !std::equal(kCacheMagic, kCacheMagic + 4, in.begin())) {
        throw ParseError(ParseError::Kind::MagicMismatch, "not a binary dataset cache: " + path.string(), 0);
    }
    std::size_t off = 4;
    if (get<std::uint32_t>(in, off) != kCacheVersion) {
        throw ParseError(ParseError::Kind::Format, "unsupported cache version", 4);
    }
    BinaryDataset ds;
    ds.spec.filter = get<std::int32_t>(in, off);
    ds.spec.stride = get<std::int32_t>(in, off);
    ds.spec.padding = get<std::int32_t>(in, off);
    ds.spec.binarize_threshold = get<double>(in, off);
    const auto count = get<std::uint32_t>(in, off);
    ds.width = static_cast<int>(get<std::uint32_t>(in, off));
    const std::size_t packed = (static_cast<std::size_t>(ds.width) + 7) / 8;
    if (in.size() != off + count * (1 + packed)) {
        throw ParseError(ParseError::Kind::CountMismatch, "cache size does not match its header count", off);
    }
    std::size_t ones = 0;
    for (std::uint32_t i = 0; i < count; ++i) {
        ds.labels.push_back(in[off++]);
        std::vector<std::uint8_t> bits(static_cast<std::size_t>(ds.width));
        for (std::size_t b = 0; b < bits.size(); ++b) {
            bits[b] = (in[off + b / 8] >> (b % 8)) & 1u;
            ones += bits[b];
        }
        off += packed;
        ds.vectors.push_back(std::move(bits));
    }
    ds.mean_nin_b = count == 0 ? 0.0 : static_cast<double>(ones) / count;
    return ds;
}

}  // namespace biohybrid::preprocess
