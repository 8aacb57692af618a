#include "ptai/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

#include "ptai/core/error.hpp"
#include "ptai/core/numeric.hpp"
#include "ptai/nn/train.hpp"

namespace ptai::eval {

namespace {

double sq_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t c = 0; c < a.size(); ++c) {
        const double d = a[c] - b[c];
        s += d * d;
    }
    return s;
}

double accuracy(const std::vector<std::size_t>& predicted, std::span<const std::size_t> truth) {
    if (predicted.empty()) return 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) hits += predicted[i] == truth[i] ? 1 : 0;
    return 100.0 * double(hits) / double(predicted.size());
}

}  // namespace

Matrix RigidAlignment::apply(const Matrix& x) const {
    Matrix out = matmul_nt(x, q);
    for (std::size_t r = 0; r < out.rows(); ++r)
        for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) += b[c];
    return out;
}

PairAccuracy probe_pair_accuracy(const nn::ProbeHead& probe, const nn::AdapterMlp* adapter, const Matrix& clean,
                                 const Matrix& aug, std::span<const std::size_t> labels,
                                 std::span<const std::size_t> aug_source) {
    require(labels.size() == clean.rows(), ErrorKind::invalid_input, "pair accuracy: label count mismatch");
    require(aug_source.size() == aug.rows(), ErrorKind::invalid_input, "pair accuracy: source index count mismatch");
    std::vector<std::size_t> aug_labels(aug.rows());
    for (std::size_t i = 0; i < aug.rows(); ++i) {
        require(aug_source[i] < clean.rows(), ErrorKind::invalid_input, "pair accuracy: source index out of range");
        aug_labels[i] = labels[aug_source[i]];
    }
    const Matrix c = adapter ? nn::mlp_forward(*adapter, clean) : clean;
    const Matrix a = adapter && aug.rows() ? nn::mlp_forward(*adapter, aug) : aug;
    PairAccuracy out;
    out.probe = probe.kind;
    out.loss = "none";
    out.clean_acc = accuracy(nn::predict(probe, c), labels);
    out.aug_acc = aug.rows() ? accuracy(nn::predict(probe, a), aug_labels) : out.clean_acc;
    return out;
}

StructureReport structure_report(const Matrix& inputs, const Matrix& encoded, std::size_t pair_budget,
                                 const RngStream& rng) {
    const std::size_t n = inputs.rows();
    require(encoded.rows() == n, ErrorKind::invalid_input, "structure report: row count mismatch");
    require(n >= 3, ErrorKind::invalid_input, "structure report: needs at least 3 points");
    require(pair_budget >= 100, ErrorKind::invalid_input, "structure report: pair budget must be >= 100");

    std::vector<double> d, e;
    const std::size_t all_pairs = n * (n - 1) / 2;
    auto add_pair = [&](std::size_t i, std::size_t j) {
        d.push_back(std::sqrt(sq_distance(inputs.row(i), inputs.row(j))));
        e.push_back(std::sqrt(sq_distance(encoded.row(i), encoded.row(j))));
    };
    if (all_pairs <= pair_budget) {
        d.reserve(all_pairs);
        e.reserve(all_pairs);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) add_pair(i, j);
    } else {
        RngStream pick = rng.split("pairs");
        d.reserve(pair_budget);
        e.reserve(pair_budget);
        for (std::size_t k = 0; k < pair_budget; ++k) {
            const std::size_t i = pick.below(n);
            std::size_t j = pick.below(n - 1);
            if (j >= i) ++j;
            add_pair(std::min(i, j), std::max(i, j));
        }
    }
    const double d_max = *std::max_element(d.begin(), d.end());
    require(d_max > 0.0, ErrorKind::degenerate, "structure report: all input points are identical");

    StructureReport r;
    r.pair_count = d.size();
    const double m = double(d.size());
    double mean_d = 0.0, mean_e = 0.0;
    for (std::size_t k = 0; k < d.size(); ++k) {
        mean_d += d[k];
        mean_e += e[k];
    }
    mean_d /= m;
    mean_e /= m;
    double sxx = 0.0, sxy = 0.0, syy = 0.0, sq_dev = 0.0;
    double d_min = std::numeric_limits<double>::infinity();
    r.l1 = std::numeric_limits<double>::infinity();
    r.l2 = 0.0;
    for (std::size_t k = 0; k < d.size(); ++k) {
        const double dx = d[k] - mean_d, dy = e[k] - mean_e;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
        sq_dev += (e[k] - d[k]) * (e[k] - d[k]);
        d_min = std::min(d_min, d[k]);
        if (d[k] > 0.0) {
            const double ratio = e[k] / d[k];
            r.l1 = std::min(r.l1, ratio);
            r.l2 = std::max(r.l2, ratio);
        }
    }
    r.slope = sxx > 0.0 ? sxy / sxx : 0.0;
    r.intercept = mean_e - r.slope * mean_d;
    double ss_res = 0.0;
    for (std::size_t k = 0; k < d.size(); ++k) {
        const double res = e[k] - (r.slope * d[k] + r.intercept);
        ss_res += res * res;
    }
    r.r2 = syy > 0.0 ? 1.0 - ss_res / syy : (ss_res == 0.0 ? 1.0 : 0.0);
    r.rmsd = std::sqrt(sq_dev / m);
    const double range = d_max - d_min;
    r.nrmsd = range > 0.0 ? r.rmsd / range : (r.rmsd == 0.0 ? 0.0 : std::numeric_limits<double>::quiet_NaN());
    r.cvrmsd = r.rmsd / mean_d;
    return r;
}

StructureReport structure_report(const nn::AdapterMlp& adapter, const Matrix& clean, std::size_t pair_budget,
                                 const RngStream& rng) {
    return structure_report(clean, nn::mlp_forward(adapter, clean), pair_budget, rng);
}

double collision_rate(const Matrix& clean, std::span<const std::size_t> labels, const Matrix& aug,
                      std::span<const std::size_t> aug_source) {
    require(labels.size() == clean.rows(), ErrorKind::invalid_input, "collision rate: label count mismatch");
    require(aug_source.size() == aug.rows(), ErrorKind::invalid_input, "collision rate: source index count mismatch");
    require(aug.rows() >= 1, ErrorKind::invalid_input, "collision rate: no augmented rows");
    require(aug.cols() == clean.cols(), ErrorKind::invalid_dimension, "collision rate: width mismatch");
    const std::set<std::size_t> classes(labels.begin(), labels.end());
    require(classes.size() >= 2, ErrorKind::invalid_input, "collision rate: needs at least 2 classes among clean rows");

    std::size_t collisions = 0;
    for (std::size_t a = 0; a < aug.rows(); ++a) {
        require(aug_source[a] < clean.rows(), ErrorKind::invalid_input, "collision rate: source index out of range");
        const std::size_t cls = labels[aug_source[a]];
        double same = std::numeric_limits<double>::infinity(), other = same;
        for (std::size_t c = 0; c < clean.rows(); ++c) {
            const double dist = sq_distance(aug.row(a), clean.row(c));
            if (labels[c] == cls) same = std::min(same, dist);
            else other = std::min(other, dist);
        }
        collisions += other < same ? 1 : 0;
    }
    return double(collisions) / double(aug.rows());
}

RigidAlignment rigid_align(const Matrix& source, const Matrix& target, bool with_translation) {
    const std::size_t n = source.rows(), d = source.cols();
    require(target.rows() == n && target.cols() == d, ErrorKind::invalid_input, "rigid_align: shape mismatch");
    require(n >= 2, ErrorKind::degenerate, "rigid_align: needs at least 2 paired rows");
    std::vector<double> mu_s(d, 0.0), mu_t(d, 0.0);
    if (with_translation) {
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < d; ++c) {
                mu_s[c] += source(r, c) / double(n);
                mu_t[c] += target(r, c) / double(n);
            }
    }
    Matrix sc = source, tc = target;
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < d; ++c) {
            sc(r, c) -= mu_s[c];
            tc(r, c) -= mu_t[c];
        }
    // Maximize tr(Q^T T^T S): with T^T S = U S V^T the optimum is Q = U V^T.
    const Svd svd = svd_full(matmul_tn(tc, sc));
    RigidAlignment out;
    out.q = matmul(svd.u, svd.vt);
    const double orth_err = max_abs_diff(matmul_tn(out.q, out.q), Matrix::identity(d));
    require(orth_err < 1e-8, ErrorKind::numerical,
            "rigid_align: SVD produced a non-orthogonal map (error " + std::to_string(orth_err) +
                ", smallest singular value " + std::to_string(svd.s.empty() ? 0.0 : svd.s.back()) + ")");
    out.b.assign(d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
        double qs = 0.0;
        for (std::size_t j = 0; j < d; ++j) qs += out.q(i, j) * mu_s[j];
        out.b[i] = mu_t[i] - qs;
    }
    const Matrix mapped = out.apply(source);
    double ss = 0.0;
    for (std::size_t k = 0; k < mapped.size(); ++k) ss += (mapped[k] - target[k]) * (mapped[k] - target[k]);
    out.residual = std::sqrt(ss);
    return out;
}

CollisionReport aligned_collision_rate(const Matrix& clean, std::span<const std::size_t> labels, const Matrix& aug,
                                       std::span<const std::size_t> aug_source) {
    require(aug.rows() >= 2, ErrorKind::degenerate, "aligned collision rate: needs at least 2 augmented samples");
    CollisionReport r;
    r.samples = aug.rows();
    r.cr_raw = collision_rate(clean, labels, aug, aug_source);
    const std::vector<std::size_t> src(aug_source.begin(), aug_source.end());
    const RigidAlignment align = rigid_align(aug, gather_rows(clean, src));
    r.residual = align.residual;
    r.cr_aligned = collision_rate(clean, labels, align.apply(aug), aug_source);
    return r;
}

}  // namespace ptai::eval
