#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ptai/nn/mlp.hpp"

namespace ptai::nn {

inline constexpr std::uint32_t kCheckpointVersion = 1;

enum class NetRole : std::uint32_t { adapter = 0, decoder = 1, probe = 2 };

struct CheckpointEntry {
    NetRole role = NetRole::adapter;
    ProbeKind probe_kind = ProbeKind::linear;  // meaningful for probes only
    std::uint32_t classes = 0;                 // meaningful for probes only
    Mlp net;

    bool operator==(const CheckpointEntry&) const = default;
};

struct Checkpoint {
    std::string metadata;  // JSON text
    std::vector<CheckpointEntry> nets;

    const CheckpointEntry* find(NetRole role) const;
    bool operator==(const Checkpoint&) const = default;
};

/// AIMK v1: "AIMK", u32 version, u32 metadata_len, metadata, u32 net_count,
/// per net {u32 role, u32 probe_kind, u32 classes, u32 layers, per layer
/// {u32 out, u32 in}}, then per net and layer the f64 weight block (row-major)
/// and f64 bias block, then u32 CRC32 of all preceding bytes. Little-endian.
std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace ptai::nn
