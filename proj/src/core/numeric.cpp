#include "ptai/core/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ptai/core/error.hpp"

namespace ptai {

std::vector<std::size_t> argsort(std::span<const double> values) {
    for (double v : values)
        require(!std::isnan(v), ErrorKind::invalid_input, "argsort: NaN in input");
    std::vector<std::size_t> idx(values.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    return idx;
}

Matrix sample_unit_directions(RngStream& rng, std::size_t count, std::size_t dim) {
    require(dim >= 1, ErrorKind::invalid_dimension, "sample_unit_directions: dim = 0");
    require(count >= 1, ErrorKind::invalid_input, "sample_unit_directions: count = 0");
    Matrix out(count, dim);
    for (std::size_t r = 0; r < count; ++r) {
        auto row = out.row(r);
        double norm2 = 0.0;
        while (norm2 < 1e-300) {
            norm2 = 0.0;
            for (double& v : row) {
                v = rng.normal();
                norm2 += v * v;
            }
        }
        const double inv = 1.0 / std::sqrt(norm2);
        for (double& v : row) v *= inv;
    }
    return out;
}

namespace {

// Orthonormalizes column j of `u` (n x k) against columns [0, j), seeding from
// standard basis vectors. Used for columns whose singular value is zero.
void complete_column(Matrix& u, std::size_t j) {
    const std::size_t n = u.rows();
    for (std::size_t e = 0; e < n; ++e) {
        std::vector<double> v(n, 0.0);
        v[e] = 1.0;
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t q = 0; q < u.cols(); ++q) {
                if (q == j) continue;
                double dot = 0.0;
                for (std::size_t i = 0; i < n; ++i) dot += u(i, q) * v[i];
                for (std::size_t i = 0; i < n; ++i) v[i] -= dot * u(i, q);
            }
        }
        double norm = 0.0;
        for (double x : v) norm += x * x;
        norm = std::sqrt(norm);
        if (norm > 1e-6) {
            for (std::size_t i = 0; i < n; ++i) u(i, j) = v[i] / norm;
            return;
        }
    }
}

Svd jacobi_tall(const Matrix& a) {
    const std::size_t n = a.rows();
    const std::size_t m = a.cols();
    Matrix u = a;
    Matrix v = Matrix::identity(m);
    constexpr double tol = 1e-15;
    for (int sweep = 0; sweep < 80; ++sweep) {
        bool rotated = false;
        for (std::size_t p = 0; p + 1 < m; ++p) {
            for (std::size_t q = p + 1; q < m; ++q) {
                double alpha = 0.0, beta = 0.0, gamma = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double up = u(i, p), uq = u(i, q);
                    alpha += up * up;
                    beta += uq * uq;
                    gamma += up * uq;
                }
                if (gamma == 0.0 || std::abs(gamma) <= tol * std::sqrt(alpha * beta)) continue;
                rotated = true;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (std::size_t i = 0; i < n; ++i) {
                    const double up = u(i, p), uq = u(i, q);
                    u(i, p) = c * up - s * uq;
                    u(i, q) = s * up + c * uq;
                }
                for (std::size_t i = 0; i < m; ++i) {
                    const double vp = v(i, p), vq = v(i, q);
                    v(i, p) = c * vp - s * vq;
                    v(i, q) = s * vp + c * vq;
                }
            }
        }
        if (!rotated) break;
    }

    std::vector<double> sigma(m);
    for (std::size_t j = 0; j < m; ++j) {
        double norm = 0.0;
        for (std::size_t i = 0; i < n; ++i) norm += u(i, j) * u(i, j);
        sigma[j] = std::sqrt(norm);
    }
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });

    Svd out{Matrix(n, m), std::vector<double>(m), Matrix(m, m)};
    const double cutoff = (sigma.empty() ? 0.0 : sigma[order[0]]) * 1e-14;
    std::vector<std::size_t> degenerate;
    for (std::size_t k = 0; k < m; ++k) {
        const std::size_t j = order[k];
        out.s[k] = sigma[j];
        for (std::size_t i = 0; i < m; ++i) out.vt(k, i) = v(i, j);
        if (sigma[j] > cutoff && sigma[j] > 0.0) {
            for (std::size_t i = 0; i < n; ++i) out.u(i, k) = u(i, j) / sigma[j];
        } else {
            degenerate.push_back(k);
        }
    }
    for (std::size_t k : degenerate) complete_column(out.u, k);
    return out;
}

}  // namespace

Svd svd_full(const Matrix& a) {
    require(a.rows() >= 1 && a.cols() >= 1, ErrorKind::invalid_dimension, "svd_full: empty matrix");
    require(a.all_finite(), ErrorKind::invalid_input, "svd_full: non-finite entries");
    if (a.rows() >= a.cols()) return jacobi_tall(a);
    Svd t = jacobi_tall(transpose(a));
    return Svd{transpose(t.vt), std::move(t.s), transpose(t.u)};
}

}  // namespace ptai
