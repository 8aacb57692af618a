#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>

#include "ptai/data/dataset.hpp"

namespace ptai::data {

inline constexpr std::uint32_t kAiftVersion = 1;

/// AIFT v1: "AIF1", u32 version, n, d, s_file, k, metadata_len, metadata,
/// f32 clean block, u32 labels, f32 augmented block, u32 CRC32 of all
/// preceding bytes. All integers and floats little-endian.
std::vector<std::uint8_t> encode_aift(const FeatureDataset& ds);
FeatureDataset decode_aift(std::span<const std::uint8_t> bytes);
void save_aift(const FeatureDataset& ds, const std::filesystem::path& path);
FeatureDataset load_aift(const std::filesystem::path& path);

/// IDX pair (u8 images 0x00000803, u8 labels 0x00000801, big-endian dims).
/// Pixels are scaled to [0, 1].
ImageDataset load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path);
/// Writes a single-channel dataset, quantizing pixels to round(255 * clamp(p)).
void save_idx(const ImageDataset& ds, const std::filesystem::path& images_path,
              const std::filesystem::path& labels_path);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace ptai::data
