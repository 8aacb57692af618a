#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ptai/core/matrix.hpp"

namespace ptai::nn {

struct AdamWState {
    std::vector<Matrix> first_moment;
    std::vector<Matrix> second_moment;
    std::size_t step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Moments zero-initialized with the shapes of `params`.
AdamWState make_adamw_state(std::span<Matrix* const> params);

/// One AdamW update with decoupled weight decay (p -= lr * wd * p before the
/// bias-corrected Adam step). Rejects non-finite gradients without touching
/// parameters or state.
void adamw_step(std::span<Matrix* const> params, std::span<const Matrix> grads, AdamWState& state,
                double lr, double weight_decay);

/// Cosine annealing from `lr_max` at step 0 to `lr_min` at step total_steps - 1.
class CosineSchedule {
public:
    CosineSchedule(double lr_max, double lr_min, std::size_t total_steps);

    double at(std::size_t step) const;
    std::size_t total_steps() const noexcept { return total_; }

private:
    double lr_max_;
    double lr_min_;
    std::size_t total_;
};

}  // namespace ptai::nn
