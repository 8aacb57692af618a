#include "ptai/data/formats.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>

#include "ptai/core/checksum.hpp"
#include "ptai/core/error.hpp"

namespace ptai::data {

namespace {

class Writer {
public:
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) bytes_.push_back(std::uint8_t(v >> (8 * i)));
    }
    void f32(double v) { u32(std::bit_cast<std::uint32_t>(static_cast<float>(v))); }
    void raw(const void* p, std::size_t n) {
        const auto* b = static_cast<const std::uint8_t*>(p);
        bytes_.insert(bytes_.end(), b, b + n);
    }
    std::vector<std::uint8_t>& bytes() { return bytes_; }

private:
    std::vector<std::uint8_t> bytes_;
};

class Reader {
public:
    Reader(std::span<const std::uint8_t> bytes, std::string what) : bytes_(bytes), what_(std::move(what)) {}

    std::uint32_t u32() {
        need(4, "u32");
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= std::uint32_t(bytes_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }
    std::uint32_t u32_be() {
        need(4, "u32");
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v = (v << 8) | bytes_[pos_ + i];
        pos_ += 4;
        return v;
    }
    double f32() { return std::bit_cast<float>(u32()); }
    std::span<const std::uint8_t> take(std::size_t n, const char* field) {
        need(n, field);
        auto s = bytes_.subspan(pos_, n);
        pos_ += n;
        return s;
    }
    std::size_t pos() const noexcept { return pos_; }

private:
    void need(std::size_t n, const char* field) const {
        require(bytes_.size() - pos_ >= n, ErrorKind::corrupt_file,
                what_ + ": truncated at offset " + std::to_string(pos_) + " reading " + field + " (" +
                    std::to_string(n) + " bytes needed, " + std::to_string(bytes_.size() - pos_) + " left)");
    }

    std::span<const std::uint8_t> bytes_;
    std::string what_;
    std::size_t pos_ = 0;
};

constexpr char kAiftMagic[4] = {'A', 'I', 'F', '1'};

}  // namespace

std::vector<std::uint8_t> encode_aift(const FeatureDataset& ds) {
    ds.validate();
    Writer w;
    w.raw(kAiftMagic, 4);
    w.u32(kAiftVersion);
    w.u32(static_cast<std::uint32_t>(ds.size()));
    w.u32(static_cast<std::uint32_t>(ds.dim()));
    w.u32(static_cast<std::uint32_t>(ds.s_file));
    w.u32(ds.classes);
    w.u32(static_cast<std::uint32_t>(ds.metadata.size()));
    w.raw(ds.metadata.data(), ds.metadata.size());
    for (double v : ds.clean.values()) w.f32(v);
    for (std::uint32_t y : ds.labels) w.u32(y);
    for (double v : ds.aug.values()) w.f32(v);
    const std::uint32_t crc = crc32(w.bytes());
    w.u32(crc);
    return std::move(w.bytes());
}

FeatureDataset decode_aift(std::span<const std::uint8_t> bytes) {
    Reader r(bytes, "AIFT");
    const auto magic = r.take(4, "magic");
    require(std::memcmp(magic.data(), kAiftMagic, 4) == 0, ErrorKind::corrupt_file, "AIFT: bad magic at offset 0");
    const std::uint32_t version = r.u32();
    require(version == kAiftVersion, ErrorKind::corrupt_file,
            "AIFT: unsupported version " + std::to_string(version) + " at offset 4");
    const std::size_t n = r.u32(), d = r.u32(), s_file = r.u32();
    FeatureDataset ds;
    ds.classes = r.u32();
    ds.s_file = s_file;
    const std::size_t meta_len = r.u32();
    // Size check before allocating: the payload must fit in what is left.
    // Computed in floating point so hostile header values cannot overflow.
    const double payload = 4.0 * (double(n) * double(d) + double(n) + double(n) * double(s_file) * double(d)) +
                           double(meta_len) + 4.0;
    require(payload <= double(bytes.size() - r.pos()), ErrorKind::corrupt_file,
            "AIFT: header at offset 8 declares " + std::to_string(std::uint64_t(payload)) + " payload bytes, file has " +
                std::to_string(bytes.size() - r.pos()));
    const auto meta = r.take(meta_len, "metadata");
    ds.metadata.assign(meta.begin(), meta.end());
    ds.clean = Matrix(n, d);
    for (double& v : ds.clean.values()) v = r.f32();
    ds.labels.resize(n);
    for (auto& y : ds.labels) y = r.u32();
    ds.aug = Matrix(n * s_file, d);
    for (double& v : ds.aug.values()) v = r.f32();
    const std::size_t crc_offset = r.pos();
    const std::uint32_t stored = r.u32();
    const std::uint32_t actual = crc32(bytes.first(crc_offset));
    require(stored == actual, ErrorKind::corrupt_file,
            "AIFT: CRC mismatch at offset " + std::to_string(crc_offset) + " (stored " + std::to_string(stored) +
                ", computed " + std::to_string(actual) + ")");
    require(r.pos() == bytes.size(), ErrorKind::corrupt_file,
            "AIFT: " + std::to_string(bytes.size() - r.pos()) + " trailing bytes after CRC");
    for (std::size_t i = 0; i < n; ++i)
        require(ds.labels[i] < ds.classes, ErrorKind::corrupt_file,
                "AIFT: label " + std::to_string(ds.labels[i]) + " of row " + std::to_string(i) + " >= k");
    require(ds.clean.all_finite() && ds.aug.all_finite(), ErrorKind::corrupt_file, "AIFT: non-finite feature");
    return ds;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    require(bool(in), ErrorKind::io, "cannot open '" + path.string() + "' for reading");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return bytes;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    require(bool(out), ErrorKind::io, "cannot open '" + path.string() + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    require(bool(out), ErrorKind::io, "write to '" + path.string() + "' failed");
}

void save_aift(const FeatureDataset& ds, const std::filesystem::path& path) { write_file(path, encode_aift(ds)); }

FeatureDataset load_aift(const std::filesystem::path& path) { return decode_aift(read_file(path)); }

ImageDataset load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path) {
    const auto img_bytes = read_file(images_path);
    const auto lbl_bytes = read_file(labels_path);
    Reader ri(img_bytes, "IDX images"), rl(lbl_bytes, "IDX labels");
    const std::uint32_t img_magic = ri.u32_be(), lbl_magic = rl.u32_be();
    require(img_magic == 0x00000803, ErrorKind::format, "IDX images: bad magic " + std::to_string(img_magic));
    require(lbl_magic == 0x00000801, ErrorKind::format, "IDX labels: bad magic " + std::to_string(lbl_magic));
    const std::size_t n = ri.u32_be(), h = ri.u32_be(), w = ri.u32_be();
    const std::size_t n_labels = rl.u32_be();
    require(n == n_labels, ErrorKind::format,
            "IDX: " + std::to_string(n) + " images but " + std::to_string(n_labels) + " labels");
    require(h > 0 && w > 0, ErrorKind::format, "IDX images: zero dimension");
    require(img_bytes.size() - ri.pos() == n * h * w, ErrorKind::format, "IDX images: pixel payload size mismatch");
    require(lbl_bytes.size() - rl.pos() == n, ErrorKind::format, "IDX labels: payload size mismatch");
    const auto pixels = ri.take(n * h * w, "pixels");
    const auto labels = rl.take(n, "labels");
    ImageDataset ds;
    ds.images.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        augment::RasterImage img(h, w, 1);
        for (std::size_t p = 0; p < h * w; ++p) img.pixels[p] = double(pixels[i * h * w + p]) / 255.0;
        ds.images.push_back(std::move(img));
        ds.labels.push_back(labels[i]);
        ds.classes = std::max<std::uint32_t>(ds.classes, labels[i] + 1u);
    }
    return ds;
}

void save_idx(const ImageDataset& ds, const std::filesystem::path& images_path,
              const std::filesystem::path& labels_path) {
    ds.validate();
    require(!ds.images.empty() && ds.images.front().channels == 1, ErrorKind::unsupported,
            "IDX: needs a non-empty single-channel dataset");
    auto be = [](std::vector<std::uint8_t>& out, std::uint32_t v) {
        for (int i = 3; i >= 0; --i) out.push_back(std::uint8_t(v >> (8 * i)));
    };
    std::vector<std::uint8_t> img{}, lbl{};
    be(img, 0x00000803);
    be(img, static_cast<std::uint32_t>(ds.size()));
    be(img, static_cast<std::uint32_t>(ds.images.front().height));
    be(img, static_cast<std::uint32_t>(ds.images.front().width));
    for (const auto& im : ds.images)
        for (double p : im.pixels) img.push_back(static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(p, 0.0, 1.0))));
    be(lbl, 0x00000801);
    be(lbl, static_cast<std::uint32_t>(ds.size()));
    for (std::uint32_t y : ds.labels) {
        require(y < 256, ErrorKind::unsupported, "IDX: label does not fit in a byte");
        lbl.push_back(static_cast<std::uint8_t>(y));
    }
    write_file(images_path, img);
    write_file(labels_path, lbl);
}

}  // namespace ptai::data
