#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>

#include "json.hpp"

#include "ptai/augment/augment.hpp"
#include "ptai/nn/train.hpp"

namespace ptai::cli {

/// Procedural dataset used when no dataset path is configured.
struct SynthConfig {
    std::size_t classes = 4;
    std::size_t n_per_class = 500;
    std::size_t test_n_per_class = 125;
    std::size_t image_size = 28;
    double jitter = 0.05;
    std::uint64_t seed = 1;
};

struct DatasetConfig {
    std::string path;       // .aift file or directory with IDX files; empty = synthetic
    std::string test_path;  // optional held-out split
    SynthConfig synth;
};

struct AugmentConfig {
    std::string name = "rotation";       // identity|rotation|affine|noise|crop|composite:<list>
    augment::AugmentationSpec ranges;    // parameter ranges applied to every element of the chain

    augment::Composite chain() const;
};

struct RunConfig {
    nn::TrainConfig train;
    AugmentConfig augment;
    DatasetConfig dataset;
    std::string output_dir = "run";

    /// Every field optional; unknown keys are rejected with the offending path.
    static RunConfig from_json(const nlohmann::json& j);
    static RunConfig load(const std::filesystem::path& path);
    nlohmann::json to_json() const;
};

}  // namespace ptai::cli
