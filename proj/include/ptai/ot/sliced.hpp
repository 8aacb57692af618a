#pragma once

#include <cstddef>
#include <span>

#include "ptai/autodiff/tape.hpp"
#include "ptai/core/matrix.hpp"
#include "ptai/core/rng.hpp"

namespace ptai::ot {

inline constexpr std::size_t kTrainingProjections = 128;
inline constexpr std::size_t kEvaluationProjections = 1024;

struct OtConfig {
    int order = 2;                                  // p, 1 or 2
    std::size_t num_projections = kTrainingProjections;
    bool shuffle_both = true;
    double epsilon_guard = 1e-8;
    std::size_t num_shuffles = 1;                   // shuffles averaged per estimate

    void validate() const;
};

/// Uniformly weighted point cloud, one point per row.
class EmpiricalDistribution {
public:
    explicit EmpiricalDistribution(Matrix points);

    const Matrix& points() const noexcept { return points_; }
    std::size_t size() const noexcept { return points_.rows(); }
    std::size_t dim() const noexcept { return points_.cols(); }

private:
    Matrix points_;
};

/// Closed-form 1D Wasserstein distance between equal-size empirical measures.
double wasserstein_1d(std::span<const double> a, std::span<const double> b, int p);

/// Exact W_p by enumerating all n! permutation couplings (n <= 10). Test oracle.
double exact_wasserstein_small(const EmpiricalDistribution& a, const EmpiricalDistribution& b, int p);

double sliced_wasserstein(const EmpiricalDistribution& a, const EmpiricalDistribution& b,
                          const OtConfig& cfg, const RngStream& rng);

/// Sliced dependence of a joint sample whose first `split` columns are x and
/// the rest are z.
double sliced_dependence(const EmpiricalDistribution& joint, std::size_t split, const OtConfig& cfg,
                         const RngStream& rng);

struct Correlation {
    double value = 0.0;        // raw estimate, may exceed 1 by estimator noise
    bool degenerate = false;   // a marginal self-dependence fell below the guard
    double joint = 0.0;        // SD(x, z)
    double self_x = 0.0;       // SD(x, x)
    double self_z = 0.0;       // SD(z, z)

    double clamped() const noexcept { return value < 0.0 ? 0.0 : (value > 1.0 ? 1.0 : value); }
};

Correlation sliced_correlation(const Matrix& x, const Matrix& z, const OtConfig& cfg,
                               const RngStream& rng);

// Differentiable forms. Sort orders, canonical row orders and shuffles are
// constants of the graph and go through the tape's OrderTrace when present.
namespace graph {

ad::Var sliced_wasserstein(ad::Var a, ad::Var b, const Matrix& directions, int p);
ad::Var sliced_dependence(ad::Var x, ad::Var z, const OtConfig& cfg, const RngStream& rng);

struct CorrelationNode {
    ad::Var value;            // 1x1; a constant 0 when degenerate
    bool degenerate = false;
    double joint = 0.0;
    double self_x = 0.0;
    double self_z = 0.0;
};

CorrelationNode sliced_correlation(ad::Var x, ad::Var z, const OtConfig& cfg, const RngStream& rng);

}  // namespace graph

}  // namespace ptai::ot
