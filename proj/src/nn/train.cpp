#include "ptai/nn/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "ptai/core/error.hpp"
#include "ptai/nn/optim.hpp"

namespace ptai::nn {

void TrainConfig::validate() const {
    require(batch_size >= 1 && epochs >= 1, ErrorKind::invalid_config, "train: batch_size and epochs must be >= 1");
    require(learning_rate > 0.0 && lr_min > 0.0 && lr_min <= learning_rate, ErrorKind::invalid_config,
            "train: need 0 < lr_min <= learning_rate");
    require(weight_decay >= 0.0 && probe_weight_decay >= 0.0, ErrorKind::invalid_config,
            "train: weight decay must be >= 0");
    require(hidden >= 1 && probe_hidden >= 1 && probe_epochs >= 1, ErrorKind::invalid_config,
            "train: hidden widths and probe_epochs must be >= 1");
    require(!out_dim || *out_dim >= 1, ErrorKind::invalid_config, "train: out_dim must be >= 1");
    loss.validate();
}

double TrainingHistory::final_loss() const {
    return epochs.empty() ? std::numeric_limits<double>::quiet_NaN() : epochs.back().loss;
}

std::size_t steps_per_epoch(std::size_t n, std::size_t batch_size, losses::LossKind kind) {
    if (!losses::needs_full_batches(kind)) return (n + batch_size - 1) / batch_size;
    const std::size_t full = n / batch_size;
    return full == 0 && n >= 2 ? 1 : full;
}

namespace {

std::vector<Matrix*> all_parameters(AdapterMlp& adapter, std::optional<DecoderMlp>& decoder) {
    auto p = adapter.parameters();
    if (decoder)
        for (Matrix* m : decoder->parameters()) p.push_back(m);
    return p;
}

}  // namespace

TrainedAdapter train_adapter(const data::BatchSource& source, const TrainConfig& cfg, const TrainHooks& hooks) {
    cfg.validate();
    const std::size_t n = source.size(), d_in = source.input_dim();
    const auto kind = cfg.loss.kind;
    require(n >= 1, ErrorKind::invalid_input, "train: empty dataset");
    require(!losses::needs_full_batches(kind) || n >= 2, ErrorKind::invalid_input,
            std::string("train: ") + losses::to_string(kind) + " needs at least 2 inputs");
    const std::size_t d_out = kind == losses::LossKind::mawa ? d_in : cfg.out_dim.value_or(d_in);
    require(kind != losses::LossKind::mawa || !cfg.out_dim || *cfg.out_dim == d_in, ErrorKind::invalid_config,
            "train: mawa requires out_dim = input dim");

    const RngStream root(cfg.seed);
    TrainedAdapter out;
    out.adapter = hooks.initial_adapter ? *hooks.initial_adapter
                                        : make_adapter(d_in, cfg.hidden, d_out, root.split("init").split("adapter"));
    require(out.adapter.input_dim() == d_in, ErrorKind::invalid_config, "train: initial adapter input width mismatch");
    if (kind == losses::LossKind::waco_recon)
        out.decoder = make_decoder(out.adapter, d_in, root.split("init").split("decoder"));

    const std::size_t per_epoch = steps_per_epoch(n, cfg.batch_size, kind);
    const std::size_t batch_size = std::min(cfg.batch_size, n);
    out.history.total_steps = cfg.epochs * per_epoch;
    const CosineSchedule schedule(cfg.learning_rate, cfg.lr_min, out.history.total_steps);
    const auto params = all_parameters(out.adapter, out.decoder);
    AdamWState state = make_adamw_state(params);
    std::set<std::string> seen_warnings;

    std::size_t step = 0, collapsed_run = 0;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const RngStream epoch_rng = root.split("epoch", epoch);
        const auto order = epoch_rng.split("order").permutation(n);
        EpochRecord rec;
        rec.epoch = epoch;
        double loss_sum = 0.0, sc_sum = 0.0;
        for (std::size_t b = 0; b < per_epoch; ++b, ++step) {
            const std::size_t begin = b * batch_size, end = std::min(n, begin + batch_size);
            const std::span<const std::size_t> idx(order.data() + begin, end - begin);
            const RngStream step_rng = epoch_rng.split("batch", b);
            const auto batch = source.batch(idx, cfg.loss.s, step_rng.split("augment"));
            auto res = losses::evaluate_loss(out.adapter, out.decoder ? &*out.decoder : nullptr, batch, cfg.loss,
                                             step_rng.split("loss"));
            for (const auto& w : res.warnings)
                if (seen_warnings.insert(w).second) out.history.warnings.push_back(w);
            std::vector<Matrix> grads = std::move(res.adapter_grads);
            for (auto& g : res.decoder_grads) grads.push_back(std::move(g));
            rec.lr_last = schedule.at(step);
            adamw_step(params, grads, state, rec.lr_last, cfg.weight_decay);
            loss_sum += res.loss;
            sc_sum += res.correlation;
            rec.collapsed_steps += res.collapsed ? 1 : 0;
            ++rec.steps;
        }
        rec.loss = loss_sum / double(rec.steps);
        rec.correlation = sc_sum / double(rec.steps);
        out.history.epochs.push_back(rec);
        if (hooks.on_epoch) hooks.on_epoch(rec);

        collapsed_run = rec.collapsed_steps == rec.steps ? collapsed_run + 1 : 0;
        require(collapsed_run <= cfg.collapse_patience, ErrorKind::collapse,
                "encoder output collapsed for " + std::to_string(collapsed_run) +
                    " consecutive epochs (last epoch " + std::to_string(epoch) + ")");
    }
    return out;
}

ProbeHead train_probe(const Matrix& features, std::span<const std::size_t> labels, ProbeKind kind,
                      const TrainConfig& cfg) {
    cfg.validate();
    const std::size_t n = features.rows();
    require(labels.size() == n && n >= 1, ErrorKind::invalid_input, "train_probe: label count mismatch");
    require(features.all_finite(), ErrorKind::invalid_input, "train_probe: non-finite features");
    const std::set<std::size_t> distinct(labels.begin(), labels.end());
    require(distinct.size() >= 2, ErrorKind::degenerate, "train_probe: labels contain a single class");
    const std::size_t classes = *distinct.rbegin() + 1;

    const RngStream root = RngStream(cfg.seed).split("probe").split(to_string(kind));
    ProbeHead probe = make_probe(kind, features.cols(), cfg.probe_hidden, classes, root.split("init"));
    const std::size_t batch_size = std::min(cfg.batch_size, n);
    const std::size_t per_epoch = (n + batch_size - 1) / batch_size;
    const CosineSchedule schedule(cfg.learning_rate, cfg.lr_min, cfg.probe_epochs * per_epoch);
    const auto params = probe.net.parameters();
    AdamWState state = make_adamw_state(params);

    std::size_t step = 0;
    for (std::size_t epoch = 0; epoch < cfg.probe_epochs; ++epoch) {
        const auto order = root.split("epoch", epoch).permutation(n);
        for (std::size_t begin = 0; begin < n; begin += batch_size, ++step) {
            const std::size_t end = std::min(n, begin + batch_size);
            const std::span<const std::size_t> idx(order.data() + begin, end - begin);
            std::vector<std::size_t> y(idx.size());
            for (std::size_t i = 0; i < idx.size(); ++i) y[i] = labels[idx[i]];
            ad::Tape tape;
            const auto vars = probe.net.bind(tape);
            const ad::Var logits = probe.net.forward(tape.constant(gather_rows(features, idx)), vars);
            const ad::Var loss = ad::softmax_cross_entropy(logits, y);
            tape.backward(loss);
            std::vector<Matrix> grads;
            for (const auto& v : vars) grads.push_back(tape.grad(v));
            adamw_step(params, grads, state, schedule.at(step), cfg.probe_weight_decay);
        }
    }
    return probe;
}

std::vector<std::size_t> predict(const ProbeHead& probe, const Matrix& features) {
    const Matrix logits = mlp_forward(probe.net, features);
    std::vector<std::size_t> out(logits.rows());
    for (std::size_t r = 0; r < logits.rows(); ++r) {
        const auto row = logits.row(r);
        out[r] = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
    }
    return out;
}

}  // namespace ptai::nn
