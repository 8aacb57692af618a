#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>

#include "json.hpp"

#include "ptai/eval/metrics.hpp"
#include "ptai/nn/train.hpp"

namespace ptai::eval {

inline constexpr int kReportSchemaVersion = 1;

/// Finite numbers as-is, NaN and infinities as null.
nlohmann::json number_or_null(double v);

nlohmann::json to_json(const StructureReport& r);
nlohmann::json to_json(const CollisionReport& r);
nlohmann::json to_json(const PairAccuracy& r);
nlohmann::json to_json(const nn::TrainingHistory& h);

/// Evaluation report with the stable field names l1 .. cvrmsd, cr_raw,
/// cr_aligned, clean_acc, aug_acc (absent sections are omitted).
nlohmann::json evaluation_report(const PairAccuracy& acc, const std::optional<StructureReport>& structure,
                                 const std::optional<CollisionReport>& collisions);

/// One CSV row per point: split tag, label, coordinates.
void write_embedding_csv(const std::filesystem::path& path, const Matrix& points, std::span<const std::size_t> labels,
                         const std::string& split_tag, bool append = false);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace ptai::eval
