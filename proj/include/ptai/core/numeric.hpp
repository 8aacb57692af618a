#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ptai/core/matrix.hpp"
#include "ptai/core/rng.hpp"

namespace ptai {

/// Stable ascending argsort; ties keep original index order. Throws
/// invalid_input on NaN.
std::vector<std::size_t> argsort(std::span<const double> values);

/// `count` directions drawn uniformly from the unit sphere in R^dim, as rows.
Matrix sample_unit_directions(RngStream& rng, std::size_t count, std::size_t dim);

struct Svd {
    Matrix u;               // n x k, orthonormal columns
    std::vector<double> s;  // k = min(n, m), non-increasing, non-negative
    Matrix vt;              // k x m, orthonormal rows
};

/// Thin SVD by one-sided (Hestenes) Jacobi rotations.
Svd svd_full(const Matrix& a);

}  // namespace ptai
