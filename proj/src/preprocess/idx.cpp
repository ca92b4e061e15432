#include "biohybrid/preprocess/idx.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include "biohybrid/errors.hpp"

namespace biohybrid::preprocess {

namespace {

std::string hex32(std::uint32_t v) {
    std::ostringstream os;
    os << "0x" << std::hex;
    os.width(8);
    os.fill('0');
    os << v;
    return os.str();
}

std::uint32_t read_be32(std::span<const std::uint8_t> b, std::size_t off) {
    if (off + 4 > b.size()) {
        throw ParseError(ParseError::Kind::Truncated,
                         "IDX header truncated at byte " + std::to_string(b.size()), b.size());
    }
    return (std::uint32_t{b[off]} << 24) | (std::uint32_t{b[off + 1]} << 16) |
           (std::uint32_t{b[off + 2]} << 8) | std::uint32_t{b[off + 3]};
}

void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

}  // namespace

IdxArray parse_idx(std::span<const std::uint8_t> bytes, std::uint32_t expected_magic) {
    IdxArray a;
    a.magic = read_be32(bytes, 0);
    if (a.magic != expected_magic) {
        throw ParseError(ParseError::Kind::MagicMismatch,
                         "IDX magic " + hex32(a.magic) + " at byte 0, expected " + hex32(expected_magic), 0);
    }
    const std::size_t ndim = a.magic & 0xff;
    std::size_t total = 1;
    for (std::size_t d = 0; d < ndim; ++d) {
        a.dims.push_back(read_be32(bytes, 4 + 4 * d));
        total *= a.dims.back();
    }
    const std::size_t header = 4 + 4 * ndim;
    if (bytes.size() < header + total) {
        throw ParseError(ParseError::Kind::Truncated,
                         "IDX payload truncated at byte " + std::to_string(bytes.size()) + ", expected " +
                             std::to_string(header + total) + " bytes",
                         bytes.size());
    }
    if (bytes.size() > header + total) {
        throw ParseError(ParseError::Kind::Format,
                         "IDX file has trailing bytes after offset " + std::to_string(header + total),
                         header + total);
    }
    a.data.assign(bytes.begin() + static_cast<std::ptrdiff_t>(header), bytes.end());
    return a;
}

std::vector<std::uint8_t> serialize_idx(const IdxArray& a) {
    std::vector<std::uint8_t> out;
    out.reserve(4 + 4 * a.dims.size() + a.data.size());
    put_be32(out, a.magic);
    for (auto d : a.dims) put_be32(out, d);
    out.insert(out.end(), a.data.begin(), a.data.end());
    return out;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(ParseError::Kind::Io, "cannot open " + path.string(), 0);
    return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError(ParseError::Kind::Io, "cannot write " + path.string(), 0);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

RawDataset RawDataset::head(std::size_t n) const {
    RawDataset out;
    out.rows = rows;
    out.cols = cols;
    n = std::min(n, size());
    out.images.assign(images.begin(), images.begin() + static_cast<std::ptrdiff_t>(n));
    out.labels.assign(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(n));
    return out;
}

void RawDataset::validate() const {
    if (images.size() != labels.size()) throw InvalidStateError("dataset: image/label count mismatch");
    for (const auto& im : images) {
        if (im.size() != static_cast<std::size_t>(rows * cols)) throw InvalidStateError("dataset: bad image size");
    }
    for (auto l : labels) {
        if (l > 9) throw InvalidStateError("dataset: label out of range");
    }
}

RawDataset load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path) {
    const auto img = parse_idx(read_file_bytes(images_path), kIdxImagesMagic);
    const auto lab = parse_idx(read_file_bytes(labels_path), kIdxLabelsMagic);
    if (img.dims.size() != 3 || lab.dims.size() != 1) {
        throw ParseError(ParseError::Kind::Format, "unexpected IDX dimensionality", 4);
    }
    if (img.dims[0] != lab.dims[0]) {
        throw ParseError(ParseError::Kind::CountMismatch,
                         std::to_string(img.dims[0]) + " images but " + std::to_string(lab.dims[0]) +
                             " labels (count field at byte 4)",
                         4);
    }
    RawDataset ds;
    ds.rows = static_cast<int>(img.dims[1]);
    ds.cols = static_cast<int>(img.dims[2]);
    const std::size_t px = img.dims[1] * img.dims[2];
    ds.images.resize(img.dims[0]);
    for (std::size_t i = 0; i < ds.images.size(); ++i) {
        auto first = img.data.begin() + static_cast<std::ptrdiff_t>(i * px);
        ds.images[i].assign(first, first + static_cast<std::ptrdiff_t>(px));
    }
    ds.labels = lab.data;
    for (std::size_t i = 0; i < ds.labels.size(); ++i) {
        if (ds.labels[i] > 9) {
            throw ParseError(ParseError::Kind::Format, "label " + std::to_string(ds.labels[i]) + " out of range",
                             8 + i);
        }
    }
    return ds;
}

RawDataset load_mnist(const std::filesystem::path& dir, const std::string& split) {
    return load_idx(dir / (split + "-images-idx3-ubyte"), dir / (split + "-labels-idx1-ubyte"));
}

}  // namespace biohybrid::preprocess
