#include "ptai/losses/losses.hpp"

#include <algorithm>
#include <cmath>

#include "ptai/core/error.hpp"

namespace ptai::losses {

const char* to_string(LossKind kind) noexcept {
    switch (kind) {
        case LossKind::mawa: return "mawa";
        case LossKind::waco: return "waco";
        case LossKind::waco_recon: return "waco-recon";
        case LossKind::simclr: return "simclr";
        case LossKind::hsic: return "hsic";
    }
    return "?";
}

LossKind parse_loss_kind(std::string_view name) {
    if (name == "mawa") return LossKind::mawa;
    if (name == "waco") return LossKind::waco;
    if (name == "waco-recon" || name == "waco_recon") return LossKind::waco_recon;
    if (name == "simclr") return LossKind::simclr;
    if (name == "hsic") return LossKind::hsic;
    fail(ErrorKind::invalid_config, "unknown loss '" + std::string(name) + "'");
}

bool needs_full_batches(LossKind kind) noexcept { return kind != LossKind::mawa; }

void LossConfig::validate() const {
    ot.validate();
    require(temperature > 0.0, ErrorKind::invalid_config, "loss: temperature must be > 0");
    require(alpha >= 0.0 && beta >= 0.0, ErrorKind::invalid_config, "loss: alpha and beta must be >= 0");
    require(hsic_bandwidth.fixed > 0.0, ErrorKind::invalid_config, "loss: fixed HSIC bandwidth must be > 0");
    if (kind == LossKind::simclr || kind == LossKind::hsic || kind == LossKind::waco_recon)
        require(s >= 1, ErrorKind::invalid_config,
                std::string("loss: s = 0 is only valid for mawa and waco, not ") + to_string(kind));
}

void AugmentedBatch::validate() const {
    require(clean.rows() >= 1, ErrorKind::invalid_input, "batch: no clean rows");
    require(augmented.rows() == clean.rows() * s, ErrorKind::invalid_input,
            "batch: expected " + std::to_string(clean.rows() * s) + " augmented rows, got " +
                std::to_string(augmented.rows()));
    require(s == 0 || augmented.cols() == clean.cols(), ErrorKind::invalid_dimension,
            "batch: augmented and clean widths differ");
    if (raw)
        require(raw->rows() == clean.rows(), ErrorKind::invalid_input, "batch: raw row count mismatch");
}

std::vector<std::size_t> AugmentedBatch::augmented_sources() const {
    std::vector<std::size_t> src(clean.rows() * s);
    for (std::size_t r = 0; r < src.size(); ++r) src[r] = r / s;
    return src;
}

namespace {

// Clean rows followed by augmented rows, and the anchor of each of them.
struct JointRows {
    Matrix views;
    Matrix anchors;
};

JointRows joint_rows(const AugmentedBatch& batch) {
    JointRows j;
    if (batch.s == 0) {
        j.views = batch.clean;
        j.anchors = batch.clean;
        return j;
    }
    j.views = vstack(batch.clean, batch.augmented);
    j.anchors = vstack(batch.clean, gather_rows(batch.clean, batch.augmented_sources()));
    return j;
}

std::vector<Matrix> grads_of(const ad::Tape& tape, const std::vector<ad::Var>& params) {
    std::vector<Matrix> g;
    g.reserve(params.size());
    for (const ad::Var& p : params) g.push_back(tape.grad(p));
    return g;
}

std::vector<Matrix> zero_grads(const nn::Mlp& net) {
    std::vector<Matrix> g;
    for (const Matrix* p : net.parameters()) g.emplace_back(p->rows(), p->cols());
    return g;
}

void require_pairs(const AugmentedBatch& batch, LossKind kind) {
    require(batch.size() >= 2, ErrorKind::invalid_input,
            std::string(to_string(kind)) + " needs a batch of at least 2 inputs");
}

// Negated sliced correlation of (anchor, E(view)) built on `tape`.
struct CorrelationTerm {
    ad::Var neg_sc;
    bool degenerate = false;
    double sc = 0.0;
};

CorrelationTerm correlation_term(ad::Tape& tape, ad::Var encoded, const Matrix& anchors, const LossConfig& cfg,
                                 const RngStream& rng) {
    const ad::Var x = tape.constant(anchors);
    const auto node = ot::graph::sliced_correlation(x, encoded, cfg.ot, rng);
    return {ad::scale(node.value, -1.0), node.degenerate, node.value.scalar()};
}

}  // namespace

LossResult mawa_loss(const nn::AdapterMlp& adapter, const AugmentedBatch& batch) {
    batch.validate();
    require(adapter.output_dim() == batch.clean.cols(), ErrorKind::invalid_config,
            "mawa requires an adapter with d_out = d_in (" + std::to_string(adapter.output_dim()) +
                " vs " + std::to_string(batch.clean.cols()) + ")");
    const JointRows rows = joint_rows(batch);
    ad::Tape tape;
    const auto params = adapter.bind(tape);
    const ad::Var out = adapter.forward(tape.constant(rows.views), params);
    const ad::Var sq = ad::abs_pow(ad::sub(out, tape.constant(rows.anchors)), 2.0);
    const ad::Var loss = ad::scale(ad::sum(sq), 1.0 / double(rows.views.rows()));
    tape.backward(loss);
    LossResult r;
    r.loss = loss.scalar();
    r.adapter_grads = grads_of(tape, params);
    return r;
}

LossResult waco_loss(const nn::AdapterMlp& adapter, const AugmentedBatch& batch, const LossConfig& cfg,
                     const RngStream& rng, ad::OrderTrace* trace) {
    cfg.validate();
    batch.validate();
    require_pairs(batch, LossKind::waco);
    const JointRows rows = joint_rows(batch);
    ad::Tape tape(trace);
    const auto params = adapter.bind(tape);
    const ad::Var encoded = adapter.forward(tape.constant(rows.views), params);
    const auto term = correlation_term(tape, encoded, rows.anchors, cfg, rng);
    LossResult r;
    r.correlation = term.sc;
    if (term.degenerate) {
        r.collapsed = true;
        r.loss = 0.0;
        r.adapter_grads = zero_grads(adapter);
        r.warnings.push_back("waco: collapsed encoder marginal, loss set to 0");
        return r;
    }
    tape.backward(term.neg_sc);
    r.loss = term.neg_sc.scalar();
    r.adapter_grads = grads_of(tape, params);
    return r;
}

LossResult waco_recon_loss(const nn::AdapterMlp& adapter, const nn::DecoderMlp& decoder,
                           const AugmentedBatch& batch, const LossConfig& cfg, const RngStream& rng,
                           ad::OrderTrace* trace) {
    cfg.validate();
    batch.validate();
    require_pairs(batch, LossKind::waco_recon);
    require(batch.raw.has_value(), ErrorKind::invalid_config, "waco-recon needs raw inputs in the batch");
    const Matrix& raw = *batch.raw;
    require(decoder.input_dim() == adapter.output_dim(), ErrorKind::invalid_config,
            "waco-recon: decoder input must match adapter output");
    require(decoder.output_dim() == raw.cols(), ErrorKind::invalid_config,
            "waco-recon: decoder output dim " + std::to_string(decoder.output_dim()) +
                " differs from raw input dim " + std::to_string(raw.cols()));

    ad::Tape tape(trace);
    const auto enc_params = adapter.bind(tape);
    const auto dec_params = decoder.bind(tape);
    const ad::Var x = tape.constant(raw);
    const ad::Var recon = decoder.forward(adapter.forward(x, enc_params), dec_params);
    const ad::Var recon_mse = ad::scale(ad::sum(ad::abs_pow(ad::sub(x, recon), 2.0)), 1.0 / double(raw.rows()));
    ad::Var loss = ad::scale(recon_mse, cfg.alpha);

    LossResult r;
    if (cfg.beta > 0.0) {
        const JointRows rows = joint_rows(batch);
        const ad::Var encoded = adapter.forward(tape.constant(rows.views), enc_params);
        const auto term = correlation_term(tape, encoded, rows.anchors, cfg, rng);
        r.correlation = term.sc;
        if (term.degenerate) {
            r.collapsed = true;
            r.warnings.push_back("waco-recon: collapsed encoder marginal, correlation term set to 0");
        } else {
            loss = ad::add(loss, ad::scale(term.neg_sc, cfg.beta));
        }
    }
    tape.backward(loss);
    r.loss = loss.scalar();
    r.adapter_grads = grads_of(tape, enc_params);
    r.decoder_grads = grads_of(tape, dec_params);
    return r;
}

LossResult simclr_loss(const nn::AdapterMlp& adapter, const AugmentedBatch& batch, const LossConfig& cfg) {
    cfg.validate();
    batch.validate();
    require_pairs(batch, LossKind::simclr);
    require(batch.s >= 1, ErrorKind::invalid_config, "simclr needs s >= 1 (no positives otherwise)");
    const JointRows rows = joint_rows(batch);
    const std::size_t n = batch.size(), m = rows.views.rows();
    auto group = [&](std::size_t r) { return r < n ? r : (r - n) / batch.s; };
    Matrix positive(m, m), negative(m, m);
    std::size_t pairs = 0;
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b) {
            if (group(a) != group(b)) {
                negative(a, b) = 1.0;
            } else if (a != b) {
                positive(a, b) = 1.0;
                ++pairs;
            }
        }

    ad::Tape tape;
    const auto params = adapter.bind(tape);
    const ad::Var z = ad::row_normalize(adapter.forward(tape.constant(rows.views), params));
    // Shifted by the maximum attainable logit 1/tau; the shift cancels between
    // the positive logit and the log-denominator.
    const ad::Var logits =
        ad::add_scalar(ad::scale(ad::matmul_nt(z, z), 1.0 / cfg.temperature), -1.0 / cfg.temperature);
    const ad::Var e = ad::exp(logits);
    const ad::Var neg_sum = ad::row_sum(ad::hadamard(e, tape.constant(negative)));
    const ad::Var log_denom = ad::log(ad::add_col(e, neg_sum));
    const ad::Var pos = tape.constant(positive);
    const ad::Var total = ad::sub(ad::sum(ad::hadamard(log_denom, pos)), ad::sum(ad::hadamard(logits, pos)));
    const ad::Var loss = ad::scale(total, 1.0 / double(pairs));
    tape.backward(loss);
    LossResult r;
    r.loss = loss.scalar();
    r.adapter_grads = grads_of(tape, params);
    return r;
}

double median_pairwise_distance(const Matrix& x) {
    const std::size_t n = x.rows();
    if (n < 2) return 0.0;
    std::vector<double> d;
    d.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            double sq = 0.0;
            for (std::size_t c = 0; c < x.cols(); ++c) {
                const double diff = x(i, c) - x(j, c);
                sq += diff * diff;
            }
            d.push_back(std::sqrt(sq));
        }
    const std::size_t mid = d.size() / 2;
    std::nth_element(d.begin(), d.begin() + mid, d.end());
    const double upper = d[mid];
    if (d.size() % 2 == 1) return upper;
    const double lower = *std::max_element(d.begin(), d.begin() + mid);
    return 0.5 * (lower + upper);
}

namespace {

double pick_bandwidth(const Matrix& x, const HsicBandwidth& bw, const char* side, std::vector<std::string>& warnings) {
    if (!bw.median_heuristic) return bw.fixed;
    const double med = median_pairwise_distance(x);
    if (med > 0.0) return med;
    warnings.push_back(std::string("hsic: zero median distance on ") + side + ", bandwidth falls back to " +
                       std::to_string(bw.fixed));
    return bw.fixed;
}

Matrix gaussian_kernel(const Matrix& x, double bandwidth) {
    const std::size_t n = x.rows();
    Matrix k(n, n);
    const double scale = -1.0 / (2.0 * bandwidth * bandwidth);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double sq = 0.0;
            for (std::size_t c = 0; c < x.cols(); ++c) {
                const double diff = x(i, c) - x(j, c);
                sq += diff * diff;
            }
            k(i, j) = std::exp(scale * sq);
        }
    return k;
}

}  // namespace

double hsic_value(const Matrix& a, const Matrix& b, double bandwidth_a, double bandwidth_b) {
    require(a.rows() == b.rows() && a.rows() >= 2, ErrorKind::invalid_input, "hsic: need matching rows >= 2");
    ad::Tape tape;
    const ad::Var k = ad::double_center(tape.constant(gaussian_kernel(a, bandwidth_a)));
    const ad::Var l = ad::double_center(tape.constant(gaussian_kernel(b, bandwidth_b)));
    const double m1 = double(a.rows() - 1);
    return ad::sum(ad::hadamard(k, l)).scalar() / (m1 * m1);
}

LossResult hsic_loss(const nn::AdapterMlp& adapter, const AugmentedBatch& batch, const LossConfig& cfg,
                     ad::OrderTrace* trace) {
    cfg.validate();
    batch.validate();
    require_pairs(batch, LossKind::hsic);
    const JointRows rows = joint_rows(batch);
    LossResult r;
    ad::Tape tape(trace);
    const auto params = adapter.bind(tape);
    const ad::Var z = adapter.forward(tape.constant(rows.views), params);

    const double bw_a = pick_bandwidth(rows.anchors, cfg.hsic_bandwidth, "anchors", r.warnings);
    // The view bandwidth is a per-batch constant; the trace pins it so that
    // perturbed re-evaluations see the same kernel.
    auto view_bw = [&] { return pick_bandwidth(z.value(), cfg.hsic_bandwidth, "views", r.warnings); };
    const double bw_z = trace ? trace->next_scalar(view_bw) : view_bw();

    const ad::Var k = ad::double_center(tape.constant(gaussian_kernel(rows.anchors, bw_a)));
    const ad::Var l =
        ad::double_center(ad::exp(ad::scale(ad::pairwise_sqdist(z), -1.0 / (2.0 * bw_z * bw_z))));
    const double m1 = double(rows.views.rows() - 1);
    const ad::Var loss = ad::scale(ad::sum(ad::hadamard(k, l)), -1.0 / (m1 * m1));
    tape.backward(loss);
    r.loss = loss.scalar();
    r.adapter_grads = grads_of(tape, params);
    return r;
}

LossResult evaluate_loss(const nn::AdapterMlp& adapter, const nn::DecoderMlp* decoder,
                         const AugmentedBatch& batch, const LossConfig& cfg, const RngStream& rng,
                         ad::OrderTrace* trace) {
    switch (cfg.kind) {
        case LossKind::mawa: return mawa_loss(adapter, batch);
        case LossKind::waco: return waco_loss(adapter, batch, cfg, rng, trace);
        case LossKind::waco_recon:
            require(decoder != nullptr, ErrorKind::invalid_config, "waco-recon needs a decoder");
            return waco_recon_loss(adapter, *decoder, batch, cfg, rng, trace);
        case LossKind::simclr: return simclr_loss(adapter, batch, cfg);
        case LossKind::hsic: return hsic_loss(adapter, batch, cfg, trace);
    }
    fail(ErrorKind::invalid_config, "unknown loss kind");
}

}  // namespace ptai::losses
