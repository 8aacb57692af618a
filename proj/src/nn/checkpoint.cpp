#include "ptai/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <string>

#include "ptai/core/checksum.hpp"
#include "ptai/core/error.hpp"
#include "ptai/data/formats.hpp"

namespace ptai::nn {

namespace {

constexpr char kMagic[4] = {'A', 'I', 'M', 'K'};
constexpr std::uint32_t kMaxWidth = 1u << 20;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(std::uint8_t(v >> (8 * i)));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) out.push_back(std::uint8_t(bits >> (8 * i)));
}

struct Cursor {
    std::span<const std::uint8_t> bytes;
    std::size_t pos = 0;

    void need(std::size_t n, const char* field) const {
        require(bytes.size() - pos >= n, ErrorKind::corrupt_file,
                "AIMK: truncated at offset " + std::to_string(pos) + " reading " + field);
    }
    std::uint32_t u32(const char* field) {
        need(4, field);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= std::uint32_t(bytes[pos + i]) << (8 * i);
        pos += 4;
        return v;
    }
    double f64(const char* field) {
        need(8, field);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= std::uint64_t(bytes[pos + i]) << (8 * i);
        pos += 8;
        return std::bit_cast<double>(v);
    }
};

}  // namespace

const CheckpointEntry* Checkpoint::find(NetRole role) const {
    for (const auto& e : nets)
        if (e.role == role) return &e;
    return nullptr;
}

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt) {
    std::vector<std::uint8_t> out(kMagic, kMagic + 4);
    put_u32(out, kCheckpointVersion);
    put_u32(out, static_cast<std::uint32_t>(ckpt.metadata.size()));
    out.insert(out.end(), ckpt.metadata.begin(), ckpt.metadata.end());
    put_u32(out, static_cast<std::uint32_t>(ckpt.nets.size()));
    for (const auto& e : ckpt.nets) {
        put_u32(out, static_cast<std::uint32_t>(e.role));
        put_u32(out, static_cast<std::uint32_t>(e.probe_kind));
        put_u32(out, e.classes);
        put_u32(out, static_cast<std::uint32_t>(e.net.depth()));
        for (const auto& l : e.net.layers()) {
            put_u32(out, static_cast<std::uint32_t>(l.weight.rows()));
            put_u32(out, static_cast<std::uint32_t>(l.weight.cols()));
        }
    }
    for (const auto& e : ckpt.nets)
        for (const auto& l : e.net.layers()) {
            for (double v : l.weight.values()) put_f64(out, v);
            for (double v : l.bias.values()) put_f64(out, v);
        }
    put_u32(out, crc32(out));
    return out;
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
    Cursor c{bytes};
    c.need(4, "magic");
    require(std::memcmp(bytes.data(), kMagic, 4) == 0, ErrorKind::corrupt_file, "AIMK: bad magic at offset 0");
    c.pos = 4;
    const std::uint32_t version = c.u32("version");
    require(version == kCheckpointVersion, ErrorKind::corrupt_file,
            "AIMK: unsupported version " + std::to_string(version) + " at offset 4");
    // The CRC covers everything, so verify it before trusting any size field.
    require(bytes.size() >= 12, ErrorKind::corrupt_file, "AIMK: truncated before CRC");
    const std::size_t crc_offset = bytes.size() - 4;
    Cursor tail{bytes, crc_offset};
    const std::uint32_t stored = tail.u32("crc"), actual = crc32(bytes.first(crc_offset));
    require(stored == actual, ErrorKind::corrupt_file,
            "AIMK: CRC mismatch at offset " + std::to_string(crc_offset) + " (stored " + std::to_string(stored) +
                ", computed " + std::to_string(actual) + ")");
    const auto body = bytes.first(crc_offset);
    c.bytes = body;

    Checkpoint ckpt;
    const std::uint32_t meta_len = c.u32("metadata length");
    c.need(meta_len, "metadata");
    ckpt.metadata.assign(body.begin() + c.pos, body.begin() + c.pos + meta_len);
    c.pos += meta_len;
    const std::uint32_t count = c.u32("net count");
    require(count <= 16, ErrorKind::corrupt_file, "AIMK: implausible net count " + std::to_string(count));
    std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> shapes(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        CheckpointEntry e;
        const std::uint32_t role = c.u32("role"), kind = c.u32("probe kind");
        require(role <= 2 && kind <= 2, ErrorKind::corrupt_file, "AIMK: bad role or probe kind in net " + std::to_string(i));
        e.role = static_cast<NetRole>(role);
        e.probe_kind = static_cast<ProbeKind>(kind);
        e.classes = c.u32("classes");
        const std::uint32_t layers = c.u32("layer count");
        require(layers >= 1 && layers <= 64, ErrorKind::corrupt_file, "AIMK: bad layer count in net " + std::to_string(i));
        for (std::uint32_t l = 0; l < layers; ++l) {
            const std::uint32_t rows = c.u32("layer rows"), cols = c.u32("layer cols");
            require(rows >= 1 && cols >= 1 && rows <= kMaxWidth && cols <= kMaxWidth, ErrorKind::corrupt_file,
                    "AIMK: bad layer shape in net " + std::to_string(i));
            shapes[i].emplace_back(rows, cols);
        }
        ckpt.nets.push_back(std::move(e));
    }
    for (std::uint32_t i = 0; i < count; ++i) {
        std::vector<DenseLayer> layers;
        for (const auto& [rows, cols] : shapes[i]) {
            c.need(8ull * (std::uint64_t(rows) * cols + rows), "parameters");
            DenseLayer l{Matrix(rows, cols), Matrix(1, rows)};
            for (double& v : l.weight.values()) v = c.f64("weight");
            for (double& v : l.bias.values()) v = c.f64("bias");
            require(l.weight.all_finite() && l.bias.all_finite(), ErrorKind::corrupt_file,
                    "AIMK: non-finite parameter in net " + std::to_string(i));
            layers.push_back(std::move(l));
        }
        try {
            ckpt.nets[i].net = Mlp(std::move(layers));
        } catch (const Error& err) {
            fail(ErrorKind::corrupt_file, std::string("AIMK: inconsistent architecture: ") + err.what());
        }
    }
    require(c.pos == body.size(), ErrorKind::corrupt_file,
            "AIMK: " + std::to_string(body.size() - c.pos) + " unexpected bytes before CRC");
    return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
    data::write_file(path, encode_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) { return decode_checkpoint(data::read_file(path)); }

}  // namespace ptai::nn
