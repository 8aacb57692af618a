#include "ptai/ot/sliced.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "ptai/core/error.hpp"
#include "ptai/core/numeric.hpp"

namespace ptai::ot {

void OtConfig::validate() const {
    require(order == 1 || order == 2, ErrorKind::unsupported,
            "ot: order p=" + std::to_string(order) + " unsupported (1 or 2)");
    require(num_projections >= 1, ErrorKind::invalid_config, "ot: num_projections must be >= 1");
    require(num_shuffles >= 1, ErrorKind::invalid_config, "ot: num_shuffles must be >= 1");
    require(epsilon_guard > 0.0 && std::isfinite(epsilon_guard), ErrorKind::invalid_config,
            "ot: epsilon_guard must be positive");
}

EmpiricalDistribution::EmpiricalDistribution(Matrix points) : points_(std::move(points)) {
    require(points_.rows() >= 1, ErrorKind::invalid_input, "empirical distribution needs >= 1 point");
    require(points_.all_finite(), ErrorKind::invalid_input, "empirical distribution has non-finite points");
}

namespace {

void check_order(int p) {
    require(p == 1 || p == 2, ErrorKind::unsupported, "ot: order p=" + std::to_string(p) + " unsupported");
}

double pow_p(double x, int p) { return p == 1 ? std::abs(x) : x * x; }
double root_p(double x, int p) { return p == 1 ? x : std::sqrt(x); }

void check_pair(const EmpiricalDistribution& a, const EmpiricalDistribution& b) {
    require(a.dim() == b.dim(), ErrorKind::invalid_input,
            "ot: dimension mismatch " + std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
    require(a.size() == b.size(), ErrorKind::unsupported, "ot: unequal point counts are not supported");
}

// Lexicographic row order over (x | z); ties keep the original index.
std::vector<std::size_t> canonical_order(const Matrix& x, const Matrix& z) {
    std::vector<std::size_t> idx(x.rows());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) {
        const auto xi = x.row(i), xj = x.row(j);
        for (std::size_t c = 0; c < xi.size(); ++c)
            if (xi[c] != xj[c]) return xi[c] < xj[c];
        const auto zi = z.row(i), zj = z.row(j);
        for (std::size_t c = 0; c < zi.size(); ++c)
            if (zi[c] != zj[c]) return zi[c] < zj[c];
        return false;
    });
    return idx;
}

std::vector<std::size_t> identity_order(std::size_t n) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    return idx;
}

}  // namespace

double wasserstein_1d(std::span<const double> a, std::span<const double> b, int p) {
    check_order(p);
    require(!a.empty() && !b.empty(), ErrorKind::invalid_input, "wasserstein_1d: empty input");
    require(a.size() == b.size(), ErrorKind::unsupported, "wasserstein_1d: unequal lengths are not supported");
    std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
    for (double v : sa) require(std::isfinite(v), ErrorKind::invalid_input, "wasserstein_1d: non-finite value");
    for (double v : sb) require(std::isfinite(v), ErrorKind::invalid_input, "wasserstein_1d: non-finite value");
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    double acc = 0.0;
    for (std::size_t i = 0; i < sa.size(); ++i) acc += pow_p(sa[i] - sb[i], p);
    return root_p(acc / double(sa.size()), p);
}

double exact_wasserstein_small(const EmpiricalDistribution& a, const EmpiricalDistribution& b, int p) {
    check_order(p);
    check_pair(a, b);
    const std::size_t n = a.size();
    require(n <= 10, ErrorKind::size_limit, "exact_wasserstein_small: n=" + std::to_string(n) + " exceeds 10");
    Matrix cost(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double sq = 0.0;
            for (std::size_t c = 0; c < a.dim(); ++c) {
                const double diff = a.points()(i, c) - b.points()(j, c);
                sq += diff * diff;
            }
            cost(i, j) = p == 1 ? std::sqrt(sq) : sq;
        }
    auto perm = identity_order(n);
    double best = std::numeric_limits<double>::infinity();
    do {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) total += cost(i, perm[i]);
        best = std::min(best, total);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return root_p(best / double(n), p);
}

namespace graph {

ad::Var sliced_wasserstein(ad::Var a, ad::Var b, const Matrix& directions, int p) {
    check_order(p);
    ad::Tape& tape = *a.tape;
    const ad::Var theta = tape.constant(directions);
    const ad::Var pa = ad::sort_columns(ad::matmul_nt(a, theta));
    const ad::Var pb = ad::sort_columns(ad::matmul_nt(b, theta));
    const ad::Var mean_cost = ad::mean(ad::abs_pow(ad::sub(pa, pb), double(p)));
    return p == 1 ? mean_cost : ad::power(mean_cost, 0.5);
}

ad::Var sliced_dependence(ad::Var x, ad::Var z, const OtConfig& cfg, const RngStream& rng) {
    cfg.validate();
    const std::size_t n = x.rows();
    require(z.rows() == n, ErrorKind::invalid_input, "sliced_dependence: row count mismatch");
    require(n >= 2, ErrorKind::degenerate, "sliced_dependence: needs at least 2 rows");
    require(x.value().all_finite() && z.value().all_finite(), ErrorKind::invalid_input,
            "sliced_dependence: non-finite input");
    ad::Tape& tape = *x.tape;

    // Empirical measures do not depend on row order; canonicalizing first
    // makes the shuffle (and so the estimate) invariant to it too.
    auto compute = [&] { return canonical_order(x.value(), z.value()); };
    auto order = tape.trace() ? tape.trace()->next(n, compute) : compute();
    const ad::Var xc = ad::gather_rows(x, order);
    const ad::Var zc = ad::gather_rows(z, std::move(order));

    const std::size_t dx = x.cols(), dz = z.cols();
    RngStream dir_rng = rng.split("projections");
    const Matrix theta = sample_unit_directions(dir_rng, cfg.num_projections, dx + dz);
    // Projection of a concatenated row splits into the two block projections,
    // so shuffled joints reuse them.
    const ad::Var px = ad::matmul_nt(xc, tape.constant(slice_cols(theta, 0, dx)));
    const ad::Var pz = ad::matmul_nt(zc, tape.constant(slice_cols(theta, dx, dx + dz)));
    const ad::Var joint = ad::sort_columns(ad::add(px, pz));

    ad::Var total{};
    for (std::size_t k = 0; k < cfg.num_shuffles; ++k) {
        const RngStream shuffle_rng = rng.split("shuffle", k);
        auto sigma_x = cfg.shuffle_both ? shuffle_rng.split("x").permutation(n) : identity_order(n);
        auto sigma_z = shuffle_rng.split("z").permutation(n);
        const ad::Var product =
            ad::sort_columns(ad::add(ad::gather_rows(px, std::move(sigma_x)), ad::gather_rows(pz, std::move(sigma_z))));
        const ad::Var mean_cost = ad::mean(ad::abs_pow(ad::sub(joint, product), double(cfg.order)));
        const ad::Var sw = cfg.order == 1 ? mean_cost : ad::power(mean_cost, 0.5);
        total = k == 0 ? sw : ad::add(total, sw);
    }
    return cfg.num_shuffles == 1 ? total : ad::scale(total, 1.0 / double(cfg.num_shuffles));
}

CorrelationNode sliced_correlation(ad::Var x, ad::Var z, const OtConfig& cfg, const RngStream& rng) {
    cfg.validate();
    require(x.rows() == z.rows(), ErrorKind::invalid_input, "sliced_correlation: row count mismatch");
    require(x.rows() >= 2, ErrorKind::degenerate, "sliced_correlation: needs at least 2 rows");
    const ad::Var joint = sliced_dependence(x, z, cfg, rng.split("joint"));
    const ad::Var self_x = sliced_dependence(x, x, cfg, rng.split("self-x"));
    const ad::Var self_z = sliced_dependence(z, z, cfg, rng.split("self-z"));

    CorrelationNode out;
    out.joint = joint.scalar();
    out.self_x = self_x.scalar();
    out.self_z = self_z.scalar();
    if (out.self_x < cfg.epsilon_guard || out.self_z < cfg.epsilon_guard) {
        out.degenerate = true;
        out.value = x.tape->constant(Matrix(1, 1));
        return out;
    }
    const ad::Var denom = ad::add_scalar(ad::mul(self_x, self_z), cfg.epsilon_guard);
    out.value = ad::div(joint, cfg.order == 1 ? denom : ad::power(denom, 0.5));
    return out;
}

}  // namespace graph

double sliced_wasserstein(const EmpiricalDistribution& a, const EmpiricalDistribution& b,
                          const OtConfig& cfg, const RngStream& rng) {
    cfg.validate();
    check_pair(a, b);
    RngStream dir_rng = rng.split("projections");
    const Matrix theta = sample_unit_directions(dir_rng, cfg.num_projections, a.dim());
    ad::Tape tape;
    return graph::sliced_wasserstein(tape.constant(a.points()), tape.constant(b.points()), theta, cfg.order)
        .scalar();
}

double sliced_dependence(const EmpiricalDistribution& joint, std::size_t split, const OtConfig& cfg,
                         const RngStream& rng) {
    require(split >= 1 && split < joint.dim(), ErrorKind::invalid_input,
            "sliced_dependence: split must leave both blocks non-empty");
    ad::Tape tape;
    const ad::Var x = tape.constant(slice_cols(joint.points(), 0, split));
    const ad::Var z = tape.constant(slice_cols(joint.points(), split, joint.dim()));
    return graph::sliced_dependence(x, z, cfg, rng).scalar();
}

Correlation sliced_correlation(const Matrix& x, const Matrix& z, const OtConfig& cfg, const RngStream& rng) {
    ad::Tape tape;
    const auto node = graph::sliced_correlation(tape.constant(x), tape.constant(z), cfg, rng);
    return Correlation{node.value.scalar(), node.degenerate, node.joint, node.self_x, node.self_z};
}

}  // namespace ptai::ot
