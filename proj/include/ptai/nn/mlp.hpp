#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ptai/autodiff/tape.hpp"
#include "ptai/core/matrix.hpp"
#include "ptai/core/rng.hpp"

namespace ptai::nn {

struct DenseLayer {
    Matrix weight;  // out x in
    Matrix bias;    // 1 x out

    bool operator==(const DenseLayer&) const = default;
};

/// Dense ReLU network: ReLU between layers, none after the last one.
class Mlp {
public:
    Mlp() = default;
    explicit Mlp(std::vector<DenseLayer> layers);

    /// Uniform fan-in initialization: weights and biases ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
    static Mlp fan_in_uniform(std::span<const std::size_t> widths, RngStream rng);

    std::size_t input_dim() const;
    std::size_t output_dim() const;
    std::size_t depth() const noexcept { return layers_.size(); }
    std::vector<std::size_t> widths() const;
    std::size_t parameter_count() const;

    const std::vector<DenseLayer>& layers() const noexcept { return layers_; }
    std::vector<DenseLayer>& layers() noexcept { return layers_; }

    /// Parameter blocks in order W1, b1, W2, b2, ...
    std::vector<Matrix*> parameters();
    std::vector<const Matrix*> parameters() const;

    /// Registers every parameter block as a tape leaf, same order as parameters().
    std::vector<ad::Var> bind(ad::Tape& tape) const;
    /// Forward pass on the tape using previously bound parameters.
    ad::Var forward(ad::Var x, std::span<const ad::Var> params) const;

    bool operator==(const Mlp&) const = default;

private:
    std::vector<DenseLayer> layers_;
};

/// E_theta: d_in -> d_hidden -> d_out.
using AdapterMlp = Mlp;
/// D_phi: mirror of the adapter ending in the raw input dimension.
using DecoderMlp = Mlp;

AdapterMlp make_adapter(std::size_t d_in, std::size_t d_hidden, std::size_t d_out, RngStream rng);
DecoderMlp make_decoder(const AdapterMlp& adapter, std::size_t raw_dim, RngStream rng);

enum class ProbeKind { linear, nonlinear, end_to_end };

const char* to_string(ProbeKind kind) noexcept;
ProbeKind parse_probe_kind(const std::string& name);

struct ProbeHead {
    ProbeKind kind = ProbeKind::linear;
    std::size_t classes = 0;
    Mlp net;

    bool operator==(const ProbeHead&) const = default;
};

/// linear (d -> k), nonlinear (d -> h -> k), end_to_end (d -> h -> h -> k).
ProbeHead make_probe(ProbeKind kind, std::size_t d, std::size_t hidden, std::size_t classes,
                     RngStream rng);

/// Row-wise forward pass for any of the networks above.
Matrix mlp_forward(const Mlp& net, const Matrix& x);

}  // namespace ptai::nn
