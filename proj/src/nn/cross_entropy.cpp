#include "ptai/nn/cross_entropy.hpp"

#include <algorithm>
#include <cmath>

#include "ptai/core/error.hpp"

namespace ptai::nn {

CrossEntropy cross_entropy(const Matrix& logits, std::span<const std::size_t> labels) {
    const std::size_t n = logits.rows(), k = logits.cols();
    require(labels.size() == n, ErrorKind::invalid_input, "cross_entropy: label count mismatch");
    require(n > 0 && k > 0, ErrorKind::invalid_dimension, "cross_entropy: empty logits");
    CrossEntropy out{0.0, Matrix(n, k)};
    for (std::size_t r = 0; r < n; ++r) {
        require(labels[r] < k, ErrorKind::invalid_input, "cross_entropy: label out of range");
        const auto row = logits.row(r);
        const double m = *std::max_element(row.begin(), row.end());
        double z = 0.0;
        for (double v : row) z += std::exp(v - m);
        const double log_z = m + std::log(z);
        out.loss += log_z - row[labels[r]];
        for (std::size_t c = 0; c < k; ++c) out.grad(r, c) = std::exp(row[c] - log_z) / double(n);
        out.grad(r, labels[r]) -= 1.0 / double(n);
    }
    out.loss /= double(n);
    return out;
}

}  // namespace ptai::nn
