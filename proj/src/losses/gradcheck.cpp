#include "ptai/losses/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace ptai::losses {

double relative_error(double analytic, double numeric) noexcept {
    const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
    return std::abs(analytic - numeric) / scale;
}

GradCheckResult check_gradients(LossKind kind, const GradCheckOptions& options) {
    RngStream root(options.seed);
    const std::size_t d_out = kind == LossKind::mawa ? options.d_in : options.d_out;
    nn::AdapterMlp adapter = nn::make_adapter(options.d_in, options.hidden, d_out, root.split("adapter"));
    nn::DecoderMlp decoder = nn::make_decoder(adapter, options.d_in, root.split("decoder"));

    AugmentedBatch batch;
    batch.s = options.s;
    batch.clean = Matrix(options.batch, options.d_in);
    batch.augmented = Matrix(options.batch * options.s, options.d_in);
    RngStream data = root.split("data");
    for (double& v : batch.clean.values()) v = data.normal();
    for (std::size_t r = 0; r < batch.augmented.rows(); ++r)
        for (std::size_t c = 0; c < options.d_in; ++c)
            batch.augmented(r, c) = batch.clean(r / options.s, c) + 0.3 * data.normal();
    batch.raw = batch.clean;

    LossConfig cfg;
    cfg.kind = kind;
    cfg.s = options.s;
    cfg.ot.num_projections = 16;
    const RngStream loss_rng = root.split("loss");

    ad::OrderTrace trace;
    const LossResult base = evaluate_loss(adapter, &decoder, batch, cfg, loss_rng, &trace);
    trace.start_replay();
    auto loss_at = [&] {
        trace.start_replay();
        return evaluate_loss(adapter, &decoder, batch, cfg, loss_rng, &trace).loss;
    };

    GradCheckResult result;
    result.kind = kind;
    result.loss = base.loss;
    const double sign = options.flip_sign ? -1.0 : 1.0;
    auto sweep = [&](nn::Mlp& net, const std::vector<Matrix>& grads) {
        const auto params = net.parameters();
        for (std::size_t b = 0; b < params.size(); ++b) {
            Matrix& p = *params[b];
            for (std::size_t j = 0; j < p.size(); ++j) {
                const double saved = p[j];
                p[j] = saved + options.step;
                const double up = loss_at();
                p[j] = saved - options.step;
                const double down = loss_at();
                p[j] = saved;
                const double numeric = (up - down) / (2.0 * options.step);
                result.max_rel_error = std::max(result.max_rel_error, relative_error(sign * grads[b][j], numeric));
                ++result.parameters_checked;
            }
        }
    };
    sweep(adapter, base.adapter_grads);
    if (kind == LossKind::waco_recon) sweep(decoder, base.decoder_grads);
    result.passed = result.max_rel_error < options.tolerance;
    return result;
}

}  // namespace ptai::losses
