#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ptai/core/matrix.hpp"
#include "ptai/core/rng.hpp"
#include "ptai/nn/mlp.hpp"

namespace ptai::eval {

inline constexpr std::size_t kDefaultPairBudget = 2'000'000;

struct PairAccuracy {
    double clean_acc = 0.0;  // percent
    double aug_acc = 0.0;    // percent
    nn::ProbeKind probe = nn::ProbeKind::linear;
    std::string loss;        // loss the adapter was trained with, "none" without adapter
};

struct StructureReport {
    double l1 = 0.0;         // min encoded/input distance ratio
    double l2 = 0.0;         // max encoded/input distance ratio
    double slope = 0.0;      // OLS of encoded on input distance
    double intercept = 0.0;
    double r2 = 0.0;
    double rmsd = 0.0;       // rms of (encoded - input) distance
    double nrmsd = 0.0;      // rmsd / (d_max - d_min)
    double cvrmsd = 0.0;     // rmsd / mean(d)
    std::size_t pair_count = 0;
};

struct RigidAlignment {
    Matrix q;                  // d x d orthogonal
    std::vector<double> b;     // translation
    double residual = 0.0;     // sqrt of the summed squared row residuals

    Matrix apply(const Matrix& x) const;  // rows mapped to q x + b
};

struct CollisionReport {
    double cr_raw = 0.0;
    double cr_aligned = 0.0;
    double residual = 0.0;
    std::size_t samples = 0;
};

/// Accuracy of `probe` on clean rows and on augmented rows (each labelled by
/// its source). With an adapter, both sets are encoded first.
PairAccuracy probe_pair_accuracy(const nn::ProbeHead& probe, const nn::AdapterMlp* adapter, const Matrix& clean,
                                 const Matrix& aug, std::span<const std::size_t> labels,
                                 std::span<const std::size_t> aug_source);

/// Statistics of (|x - y|, |E(x) - E(y)|) over all pairs, or a seeded sample
/// of `pair_budget` pairs when there are more.
StructureReport structure_report(const Matrix& inputs, const Matrix& encoded, std::size_t pair_budget,
                                 const RngStream& rng);
StructureReport structure_report(const nn::AdapterMlp& adapter, const Matrix& clean, std::size_t pair_budget,
                                 const RngStream& rng);

/// Fraction of augmented rows whose nearest clean row of another class is
/// strictly closer than the nearest clean row of their own class.
double collision_rate(const Matrix& clean, std::span<const std::size_t> labels, const Matrix& aug,
                      std::span<const std::size_t> aug_source);

/// Least-squares orthogonal Q (reflections allowed) and translation b with
/// q * source_i + b ~ target_i.
RigidAlignment rigid_align(const Matrix& source, const Matrix& target, bool with_translation = true);

CollisionReport aligned_collision_rate(const Matrix& clean, std::span<const std::size_t> labels, const Matrix& aug,
                                       std::span<const std::size_t> aug_source);

}  // namespace ptai::eval
