#pragma once

#include <cstddef>
#include <cstdint>

#include "ptai/losses/losses.hpp"

namespace ptai::losses {

struct GradCheckOptions {
    std::size_t d_in = 6;
    std::size_t hidden = 12;
    std::size_t d_out = 4;     // mawa forces d_out = d_in
    std::size_t batch = 10;
    std::size_t s = 2;
    double step = 1e-5;
    double tolerance = 1e-4;
    std::uint64_t seed = 0;
    bool flip_sign = false;    // negative control: corrupts the analytic gradient
};

struct GradCheckResult {
    LossKind kind = LossKind::mawa;
    double loss = 0.0;
    double max_rel_error = 0.0;
    std::size_t parameters_checked = 0;
    bool passed = false;
};

/// Relative error used by the checker: |a - n| / max(|a|, |n|, 1e-6).
double relative_error(double analytic, double numeric) noexcept;

/// Central finite differences over every adapter (and decoder) parameter of a
/// seeded small problem, with sort orders, shuffles and bandwidths frozen.
GradCheckResult check_gradients(LossKind kind, const GradCheckOptions& options);

}  // namespace ptai::losses
