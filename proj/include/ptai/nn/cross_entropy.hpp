#pragma once

#include <cstddef>
#include <span>

#include "ptai/core/matrix.hpp"

namespace ptai::nn {

struct CrossEntropy {
    double loss = 0.0;
    Matrix grad;  // d loss / d logits, same shape as logits
};

/// Mean negative log-softmax of the true class, max-subtracted for stability.
CrossEntropy cross_entropy(const Matrix& logits, std::span<const std::size_t> labels);

}  // namespace ptai::nn
