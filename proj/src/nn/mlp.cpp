#include "ptai/nn/mlp.hpp"

#include <cmath>

#include "ptai/core/error.hpp"

namespace ptai::nn {

Mlp::Mlp(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
    require(!layers_.empty(), ErrorKind::invalid_config, "Mlp: no layers");
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        const auto& l = layers_[i];
        require(l.bias.rows() == 1 && l.bias.cols() == l.weight.rows(), ErrorKind::invalid_dimension,
                "Mlp: bias shape does not match layer " + std::to_string(i));
        if (i > 0)
            require(l.weight.cols() == layers_[i - 1].weight.rows(), ErrorKind::invalid_dimension,
                    "Mlp: layer " + std::to_string(i) + " input width mismatch");
    }
}

Mlp Mlp::fan_in_uniform(std::span<const std::size_t> widths, RngStream rng) {
    require(widths.size() >= 2, ErrorKind::invalid_config, "Mlp: need at least input and output width");
    std::vector<DenseLayer> layers;
    for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
        const std::size_t in = widths[i], out = widths[i + 1];
        require(in > 0 && out > 0, ErrorKind::invalid_dimension, "Mlp: zero width");
        const double bound = 1.0 / std::sqrt(double(in));
        RngStream layer_rng = rng.split("layer", i);
        DenseLayer l{Matrix(out, in), Matrix(1, out)};
        for (double& v : l.weight.values()) v = layer_rng.uniform(-bound, bound);
        for (double& v : l.bias.values()) v = layer_rng.uniform(-bound, bound);
        layers.push_back(std::move(l));
    }
    return Mlp(std::move(layers));
}

std::size_t Mlp::input_dim() const { return layers_.empty() ? 0 : layers_.front().weight.cols(); }
std::size_t Mlp::output_dim() const { return layers_.empty() ? 0 : layers_.back().weight.rows(); }

std::vector<std::size_t> Mlp::widths() const {
    std::vector<std::size_t> w;
    if (layers_.empty()) return w;
    w.push_back(input_dim());
    for (const auto& l : layers_) w.push_back(l.weight.rows());
    return w;
}

std::size_t Mlp::parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers_) n += l.weight.size() + l.bias.size();
    return n;
}

std::vector<Matrix*> Mlp::parameters() {
    std::vector<Matrix*> p;
    for (auto& l : layers_) {
        p.push_back(&l.weight);
        p.push_back(&l.bias);
    }
    return p;
}

std::vector<const Matrix*> Mlp::parameters() const {
    std::vector<const Matrix*> p;
    for (const auto& l : layers_) {
        p.push_back(&l.weight);
        p.push_back(&l.bias);
    }
    return p;
}

std::vector<ad::Var> Mlp::bind(ad::Tape& tape) const {
    std::vector<ad::Var> vars;
    for (const auto& l : layers_) {
        vars.push_back(tape.parameter(l.weight));
        vars.push_back(tape.parameter(l.bias));
    }
    return vars;
}

ad::Var Mlp::forward(ad::Var x, std::span<const ad::Var> params) const {
    require(params.size() == 2 * layers_.size(), ErrorKind::invalid_input, "Mlp: parameter count");
    require(x.cols() == input_dim(), ErrorKind::invalid_input,
            "Mlp: input has " + std::to_string(x.cols()) + " columns, expected " +
                std::to_string(input_dim()));
    ad::Var h = x;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        h = ad::add_bias(ad::matmul_nt(h, params[2 * i]), params[2 * i + 1]);
        if (i + 1 < layers_.size()) h = ad::relu(h);
    }
    return h;
}

AdapterMlp make_adapter(std::size_t d_in, std::size_t d_hidden, std::size_t d_out, RngStream rng) {
    const std::size_t widths[] = {d_in, d_hidden, d_out};
    return Mlp::fan_in_uniform(widths, rng);
}

DecoderMlp make_decoder(const AdapterMlp& adapter, std::size_t raw_dim, RngStream rng) {
    const auto w = adapter.widths();
    require(w.size() == 3, ErrorKind::invalid_config, "decoder mirrors a one-hidden-layer adapter");
    const std::size_t widths[] = {w[2], w[1], raw_dim};
    return Mlp::fan_in_uniform(widths, rng);
}

const char* to_string(ProbeKind kind) noexcept {
    switch (kind) {
        case ProbeKind::linear: return "lc";
        case ProbeKind::nonlinear: return "nc";
        case ProbeKind::end_to_end: return "ec";
    }
    return "?";
}

ProbeKind parse_probe_kind(const std::string& name) {
    if (name == "lc" || name == "linear") return ProbeKind::linear;
    if (name == "nc" || name == "nonlinear") return ProbeKind::nonlinear;
    if (name == "ec" || name == "end_to_end") return ProbeKind::end_to_end;
    fail(ErrorKind::invalid_config, "unknown probe kind '" + name + "'");
}

ProbeHead make_probe(ProbeKind kind, std::size_t d, std::size_t hidden, std::size_t classes,
                     RngStream rng) {
    std::vector<std::size_t> widths{d};
    if (kind == ProbeKind::nonlinear) widths.push_back(hidden);
    if (kind == ProbeKind::end_to_end) {
        widths.push_back(hidden);
        widths.push_back(hidden);
    }
    widths.push_back(classes);
    return ProbeHead{kind, classes, Mlp::fan_in_uniform(widths, rng)};
}

Matrix mlp_forward(const Mlp& net, const Matrix& x) {
    require(x.cols() == net.input_dim(), ErrorKind::invalid_input,
            "mlp_forward: input has " + std::to_string(x.cols()) + " columns, expected " +
                std::to_string(net.input_dim()));
    Matrix h = x;
    const auto& layers = net.layers();
    for (std::size_t i = 0; i < layers.size(); ++i) {
        Matrix next = matmul_nt(h, layers[i].weight);
        const bool hidden = i + 1 < layers.size();
        for (std::size_t r = 0; r < next.rows(); ++r) {
            auto row = next.row(r);
            for (std::size_t c = 0; c < row.size(); ++c) {
                const double v = row[c] + layers[i].bias[c];
                row[c] = hidden && !(v > 0.0) ? 0.0 : v;
            }
        }
        h = std::move(next);
    }
    return h;
}

}  // namespace ptai::nn
