#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ptai/autodiff/tape.hpp"
#include "ptai/core/matrix.hpp"
#include "ptai/core/rng.hpp"
#include "ptai/nn/mlp.hpp"
#include "ptai/ot/sliced.hpp"

namespace ptai::losses {

enum class LossKind { mawa, waco, waco_recon, simclr, hsic };

const char* to_string(LossKind kind) noexcept;
/// Accepts the CLI spellings, e.g. "waco-recon" and "waco_recon".
LossKind parse_loss_kind(std::string_view name);
/// Whether the estimator needs N >= 2 (and full batches in training).
bool needs_full_batches(LossKind kind) noexcept;

struct HsicBandwidth {
    bool median_heuristic = true;
    double fixed = 1.0;  // used when !median_heuristic, and as the fallback
};

struct LossConfig {
    LossKind kind = LossKind::mawa;
    std::size_t s = 3;
    double alpha = 1.0;        // reconstruction weight
    double beta = 1.0;         // correlation weight
    double temperature = 0.5;  // SimCLR tau
    HsicBandwidth hsic_bandwidth;
    ot::OtConfig ot;

    void validate() const;
};

/// N clean rows plus N*s augmented rows; rows [i*s, (i+1)*s) of `augmented`
/// are views of clean row i.
struct AugmentedBatch {
    Matrix clean;
    Matrix augmented;
    std::size_t s = 0;
    std::optional<Matrix> raw;          // encoder inputs for reconstruction
    std::vector<std::size_t> labels;    // carried for evaluation only
    std::vector<std::size_t> source;    // dataset index of each clean row

    std::size_t size() const noexcept { return clean.rows(); }
    void validate() const;
    /// Row index of the clean anchor of every augmented row.
    std::vector<std::size_t> augmented_sources() const;
};

struct LossResult {
    double loss = 0.0;
    std::vector<Matrix> adapter_grads;   // W1, b1, W2, b2, ...
    std::vector<Matrix> decoder_grads;   // waco_recon only
    bool collapsed = false;              // degenerate marginal in the correlation
    double correlation = std::numeric_limits<double>::quiet_NaN();  // raw SC (waco variants)
    std::vector<std::string> warnings;
};

LossResult mawa_loss(const nn::AdapterMlp& adapter, const AugmentedBatch& batch);

LossResult waco_loss(const nn::AdapterMlp& adapter, const AugmentedBatch& batch, const LossConfig& cfg,
                     const RngStream& rng, ad::OrderTrace* trace = nullptr);

LossResult waco_recon_loss(const nn::AdapterMlp& adapter, const nn::DecoderMlp& decoder,
                           const AugmentedBatch& batch, const LossConfig& cfg, const RngStream& rng,
                           ad::OrderTrace* trace = nullptr);

LossResult simclr_loss(const nn::AdapterMlp& adapter, const AugmentedBatch& batch, const LossConfig& cfg);

LossResult hsic_loss(const nn::AdapterMlp& adapter, const AugmentedBatch& batch, const LossConfig& cfg,
                     ad::OrderTrace* trace = nullptr);

/// Dispatch on cfg.kind. `decoder` is required for waco_recon only.
LossResult evaluate_loss(const nn::AdapterMlp& adapter, const nn::DecoderMlp* decoder,
                         const AugmentedBatch& batch, const LossConfig& cfg, const RngStream& rng,
                         ad::OrderTrace* trace = nullptr);

/// Median of pairwise Euclidean distances between rows (0 for fewer than 2 rows).
double median_pairwise_distance(const Matrix& x);

/// Biased HSIC with Gaussian kernels of the given bandwidths.
double hsic_value(const Matrix& a, const Matrix& b, double bandwidth_a, double bandwidth_b);

}  // namespace ptai::losses
