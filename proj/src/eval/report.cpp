#include "ptai/eval/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "ptai/core/error.hpp"

namespace ptai::eval {

nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

nlohmann::json to_json(const StructureReport& r) {
    return {{"l1", number_or_null(r.l1)},       {"l2", number_or_null(r.l2)},
            {"slope", number_or_null(r.slope)}, {"intercept", number_or_null(r.intercept)},
            {"r2", number_or_null(r.r2)},       {"rmsd", number_or_null(r.rmsd)},
            {"nrmsd", number_or_null(r.nrmsd)}, {"cvrmsd", number_or_null(r.cvrmsd)},
            {"pair_count", r.pair_count}};
}

nlohmann::json to_json(const CollisionReport& r) {
    return {{"cr_raw", r.cr_raw}, {"cr_aligned", r.cr_aligned}, {"alignment_residual", number_or_null(r.residual)},
            {"samples", r.samples}};
}

nlohmann::json to_json(const PairAccuracy& r) {
    char pair[64];
    std::snprintf(pair, sizeof pair, "%.2f/%.2f", r.clean_acc, r.aug_acc);
    return {{"clean_acc", r.clean_acc}, {"aug_acc", r.aug_acc}, {"pair", pair},
            {"probe", nn::to_string(r.probe)}, {"loss", r.loss}};
}

nlohmann::json to_json(const nn::TrainingHistory& h) {
    nlohmann::json epochs = nlohmann::json::array();
    for (const auto& e : h.epochs)
        epochs.push_back({{"epoch", e.epoch},
                          {"loss", number_or_null(e.loss)},
                          {"correlation", number_or_null(e.correlation)},
                          {"steps", e.steps},
                          {"collapsed_steps", e.collapsed_steps},
                          {"lr", e.lr_last}});
    return {{"schema_version", kReportSchemaVersion},
            {"total_steps", h.total_steps},
            {"final_loss", number_or_null(h.final_loss())},
            {"warnings", h.warnings},
            {"epochs", epochs}};
}

nlohmann::json evaluation_report(const PairAccuracy& acc, const std::optional<StructureReport>& structure,
                                 const std::optional<CollisionReport>& collisions) {
    nlohmann::json j = {{"schema_version", kReportSchemaVersion}};
    j.update(to_json(acc));
    if (structure) j["structure"] = to_json(*structure);
    if (collisions) j["collisions"] = to_json(*collisions);
    // Flat copies under the stable names for table-style consumers.
    if (structure)
        for (const char* k : {"l1", "l2", "slope", "intercept", "r2", "rmsd", "nrmsd", "cvrmsd"})
            j[k] = j["structure"][k];
    if (collisions) {
        j["cr_raw"] = collisions->cr_raw;
        j["cr_aligned"] = collisions->cr_aligned;
    }
    return j;
}

void write_embedding_csv(const std::filesystem::path& path, const Matrix& points, std::span<const std::size_t> labels,
                         const std::string& split_tag, bool append) {
    require(labels.size() == points.rows(), ErrorKind::invalid_input, "embedding csv: label count mismatch");
    std::ofstream out(path, append ? std::ios::app : std::ios::trunc);
    require(bool(out), ErrorKind::io, "cannot open '" + path.string() + "' for writing");
    out.precision(17);
    for (std::size_t r = 0; r < points.rows(); ++r) {
        out << split_tag << ',' << labels[r];
        for (double v : points.row(r)) out << ',' << v;
        out << '\n';
    }
    require(bool(out), ErrorKind::io, "write to '" + path.string() + "' failed");
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
    std::ofstream out(path, std::ios::trunc);
    require(bool(out), ErrorKind::io, "cannot open '" + path.string() + "' for writing");
    out << j.dump(2) << '\n';
    require(bool(out), ErrorKind::io, "write to '" + path.string() + "' failed");
}

}  // namespace ptai::eval
