#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

#include "ptai/core/matrix.hpp"

namespace ptai::ad {

/// Records data-dependent orderings (sort permutations, canonical row orders)
/// so a later evaluation can replay them exactly. Replaying freezes the
/// piecewise structure of sort-based losses, which is what the backward pass
/// differentiates; finite-difference checks rely on it.
class OrderTrace {
public:
    enum class Mode { record, replay };

    Mode mode() const noexcept { return mode_; }
    void start_replay() noexcept {
        mode_ = Mode::replay;
        cursor_ = 0;
        scalar_cursor_ = 0;
    }
    std::size_t size() const noexcept { return orders_.size(); }

    /// In record mode, computes and stores the order; in replay mode, returns
    /// the next stored order (and checks its length).
    std::vector<std::size_t> next(std::size_t expected_length,
                                  const std::function<std::vector<std::size_t>()>& compute);
    /// Same protocol for data-dependent scalars treated as constants (bandwidths).
    double next_scalar(const std::function<double()>& compute);

private:
    Mode mode_ = Mode::record;
    std::size_t cursor_ = 0;
    std::size_t scalar_cursor_ = 0;
    std::vector<std::vector<std::size_t>> orders_;
    std::vector<double> scalars_;
};

class Tape;

/// Handle to a tape node. Cheap to copy; valid while its tape lives.
struct Var {
    Tape* tape = nullptr;
    std::size_t id = 0;

    const Matrix& value() const;
    double scalar() const;
    std::size_t rows() const { return value().rows(); }
    std::size_t cols() const { return value().cols(); }
};

/// Minimal reverse-mode tape over matrix-valued nodes.
class Tape {
public:
    using Backward = std::function<void(Tape&, const Matrix& grad_out)>;

    explicit Tape(OrderTrace* trace = nullptr) : trace_(trace) {}
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Var constant(Matrix value);
    Var parameter(Matrix value);

    const Matrix& value(Var v) const { return nodes_[v.id].value; }
    /// Gradient accumulated by backward(); zeros if the node was not reached.
    Matrix grad(Var v) const;
    bool requires_grad(Var v) const { return nodes_[v.id].requires_grad; }

    /// Seeds d(root)/d(root) = 1 for a 1x1 root and propagates to parameters.
    void backward(Var root);

    OrderTrace* trace() const noexcept { return trace_; }
    std::size_t size() const noexcept { return nodes_.size(); }

    /// Appends an operation node. `fn` is kept only when an input needs grad.
    Var record(Matrix value, std::initializer_list<Var> inputs, Backward fn);
    void accumulate(Var v, const Matrix& g);

private:
    struct Node {
        Matrix value;
        Matrix grad;
        bool requires_grad = false;
        Backward backward;
    };
    std::vector<Node> nodes_;
    OrderTrace* trace_;
};

// Linear algebra
Var matmul_nt(Var x, Var w);  // x * w^T
Var add_bias(Var x, Var bias);  // bias is 1 x cols, broadcast over rows
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var hadamard(Var a, Var b);
Var scale(Var a, double s);
Var add_scalar(Var a, double s);

// Shape
Var gather_rows(Var x, std::vector<std::size_t> indices);
Var vstack(Var top, Var bottom);
Var hstack(Var left, Var right);

// Elementwise
Var relu(Var x);
Var abs_pow(Var x, double p);  // |x|^p, p >= 1
Var power(Var x, double e);    // x^e for x >= 0
Var exp(Var x);
Var log(Var x);

// Reductions
Var sum(Var x);
Var mean(Var x);
Var row_sum(Var x);              // n x 1
Var add_col(Var x, Var column);  // column is n x 1, broadcast over cols
Var mul(Var a, Var b);           // 1x1 * 1x1
Var div(Var a, Var b);           // 1x1 / 1x1

// Sorting: each column sorted ascending; permutations treated as constants.
Var sort_columns(Var x);

// Kernels and similarities
Var pairwise_sqdist(Var x);         // n x n, D_ij = |x_i - x_j|^2
Var double_center(Var x);           // H x H with H = I - 11^T / n
Var row_normalize(Var x);           // rows scaled to unit L2 norm
Var softmax_cross_entropy(Var logits, std::span<const std::size_t> labels);

}  // namespace ptai::ad
