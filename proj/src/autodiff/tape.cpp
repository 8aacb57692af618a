#include "ptai/autodiff/tape.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ptai/core/error.hpp"
#include "ptai/core/numeric.hpp"
#include "ptai/nn/cross_entropy.hpp"

namespace ptai::ad {

std::vector<std::size_t> OrderTrace::next(std::size_t expected_length,
                                          const std::function<std::vector<std::size_t>()>& compute) {
    if (mode_ == Mode::record) {
        orders_.push_back(compute());
        return orders_.back();
    }
    require(cursor_ < orders_.size(), ErrorKind::invalid_input, "order trace exhausted on replay");
    const auto& order = orders_[cursor_++];
    require(order.size() == expected_length, ErrorKind::invalid_input,
            "order trace length mismatch on replay");
    return order;
}

double OrderTrace::next_scalar(const std::function<double()>& compute) {
    if (mode_ == Mode::record) {
        scalars_.push_back(compute());
        return scalars_.back();
    }
    require(scalar_cursor_ < scalars_.size(), ErrorKind::invalid_input, "scalar trace exhausted on replay");
    return scalars_[scalar_cursor_++];
}

const Matrix& Var::value() const { return tape->value(*this); }

double Var::scalar() const {
    const Matrix& m = value();
    require(m.size() == 1, ErrorKind::invalid_dimension, "scalar() on non-1x1 node");
    return m[0];
}

Var Tape::constant(Matrix value) {
    nodes_.push_back(Node{std::move(value), Matrix(), false, nullptr});
    return Var{this, nodes_.size() - 1};
}

Var Tape::parameter(Matrix value) {
    nodes_.push_back(Node{std::move(value), Matrix(), true, nullptr});
    return Var{this, nodes_.size() - 1};
}

Matrix Tape::grad(Var v) const {
    const Node& n = nodes_[v.id];
    if (n.grad.size() == n.value.size() && n.grad.rows() == n.value.rows()) return n.grad;
    return Matrix(n.value.rows(), n.value.cols());
}

Var Tape::record(Matrix value, std::initializer_list<Var> inputs, Backward fn) {
    bool needs = false;
    for (Var in : inputs) needs = needs || nodes_[in.id].requires_grad;
    nodes_.push_back(Node{std::move(value), Matrix(), needs, needs ? std::move(fn) : nullptr});
    return Var{this, nodes_.size() - 1};
}

void Tape::accumulate(Var v, const Matrix& g) {
    Node& n = nodes_[v.id];
    if (!n.requires_grad) return;
    if (n.grad.rows() != n.value.rows() || n.grad.cols() != n.value.cols()) {
        n.grad = g;
    } else {
        n.grad += g;
    }
}

void Tape::backward(Var root) {
    require(nodes_[root.id].value.size() == 1, ErrorKind::invalid_dimension,
            "backward: root must be 1x1");
    for (Node& n : nodes_) n.grad = Matrix();
    if (!nodes_[root.id].requires_grad) return;
    nodes_[root.id].grad = Matrix(1, 1, 1.0);
    for (std::size_t i = root.id + 1; i-- > 0;) {
        Node& n = nodes_[i];
        if (!n.backward || n.grad.size() != n.value.size() || n.grad.rows() != n.value.rows()) continue;
        n.backward(*this, n.grad);
    }
}

namespace {

Tape& tape_of(Var a, Var b) {
    require(a.tape == b.tape && a.tape != nullptr, ErrorKind::invalid_input,
            "operands live on different tapes");
    return *a.tape;
}

void check_same(const Matrix& a, const Matrix& b, const char* op) {
    require(a.rows() == b.rows() && a.cols() == b.cols(), ErrorKind::invalid_dimension,
            std::string(op) + ": shape mismatch");
}

template <class F>
Matrix map(const Matrix& x, F f) {
    Matrix out(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = f(x[i]);
    return out;
}

}  // namespace

Var matmul_nt(Var x, Var w) {
    Tape& t = tape_of(x, w);
    return t.record(ptai::matmul_nt(x.value(), w.value()), {x, w},
                    [x, w](Tape& tp, const Matrix& g) {
                        if (tp.requires_grad(x)) tp.accumulate(x, ptai::matmul(g, w.value()));
                        if (tp.requires_grad(w)) tp.accumulate(w, ptai::matmul_tn(g, x.value()));
                    });
}

Var add_bias(Var x, Var bias) {
    Tape& t = tape_of(x, bias);
    const Matrix& xv = x.value();
    const Matrix& bv = bias.value();
    require(bv.rows() == 1 && bv.cols() == xv.cols(), ErrorKind::invalid_dimension,
            "add_bias: bias must be 1 x cols");
    Matrix out = xv;
    for (std::size_t r = 0; r < out.rows(); ++r)
        for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) += bv[c];
    return t.record(std::move(out), {x, bias}, [x, bias](Tape& tp, const Matrix& g) {
        tp.accumulate(x, g);
        if (tp.requires_grad(bias)) {
            Matrix gb(1, g.cols());
            for (std::size_t r = 0; r < g.rows(); ++r)
                for (std::size_t c = 0; c < g.cols(); ++c) gb[c] += g(r, c);
            tp.accumulate(bias, gb);
        }
    });
}

Var add(Var a, Var b) {
    Tape& t = tape_of(a, b);
    check_same(a.value(), b.value(), "add");
    return t.record(a.value() + b.value(), {a, b}, [a, b](Tape& tp, const Matrix& g) {
        tp.accumulate(a, g);
        tp.accumulate(b, g);
    });
}

Var sub(Var a, Var b) {
    Tape& t = tape_of(a, b);
    check_same(a.value(), b.value(), "sub");
    return t.record(a.value() - b.value(), {a, b}, [a, b](Tape& tp, const Matrix& g) {
        tp.accumulate(a, g);
        if (tp.requires_grad(b)) tp.accumulate(b, -1.0 * g);
    });
}

Var hadamard(Var a, Var b) {
    Tape& t = tape_of(a, b);
    check_same(a.value(), b.value(), "hadamard");
    Matrix out = a.value();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
    return t.record(std::move(out), {a, b}, [a, b](Tape& tp, const Matrix& g) {
        if (tp.requires_grad(a)) {
            Matrix ga = g;
            for (std::size_t i = 0; i < ga.size(); ++i) ga[i] *= b.value()[i];
            tp.accumulate(a, ga);
        }
        if (tp.requires_grad(b)) {
            Matrix gb = g;
            for (std::size_t i = 0; i < gb.size(); ++i) gb[i] *= a.value()[i];
            tp.accumulate(b, gb);
        }
    });
}

Var scale(Var a, double s) {
    return a.tape->record(s * a.value(), {a},
                          [a, s](Tape& tp, const Matrix& g) { tp.accumulate(a, s * g); });
}

Var add_scalar(Var a, double s) {
    return a.tape->record(map(a.value(), [s](double v) { return v + s; }), {a},
                          [a](Tape& tp, const Matrix& g) { tp.accumulate(a, g); });
}

Var gather_rows(Var x, std::vector<std::size_t> indices) {
    Matrix out = ptai::gather_rows(x.value(), indices);
    return x.tape->record(std::move(out), {x},
                          [x, idx = std::move(indices)](Tape& tp, const Matrix& g) {
                              Matrix gx(x.rows(), x.cols());
                              for (std::size_t r = 0; r < idx.size(); ++r) {
                                  auto src = g.row(r);
                                  auto dst = gx.row(idx[r]);
                                  for (std::size_t c = 0; c < src.size(); ++c) dst[c] += src[c];
                              }
                              tp.accumulate(x, gx);
                          });
}

Var vstack(Var top, Var bottom) {
    Tape& t = tape_of(top, bottom);
    const std::size_t split = top.rows();
    return t.record(ptai::vstack(top.value(), bottom.value()), {top, bottom},
                    [top, bottom, split](Tape& tp, const Matrix& g) {
                        const std::size_t c = g.cols();
                        if (tp.requires_grad(top)) {
                            Matrix gt(split, c);
                            std::copy_n(g.data(), split * c, gt.data());
                            tp.accumulate(top, gt);
                        }
                        if (tp.requires_grad(bottom)) {
                            Matrix gb(g.rows() - split, c);
                            std::copy_n(g.data() + split * c, gb.size(), gb.data());
                            tp.accumulate(bottom, gb);
                        }
                    });
}

Var hstack(Var left, Var right) {
    Tape& t = tape_of(left, right);
    const std::size_t split = left.cols();
    return t.record(ptai::hstack(left.value(), right.value()), {left, right},
                    [left, right, split](Tape& tp, const Matrix& g) {
                        if (tp.requires_grad(left)) tp.accumulate(left, slice_cols(g, 0, split));
                        if (tp.requires_grad(right))
                            tp.accumulate(right, slice_cols(g, split, g.cols()));
                    });
}

Var relu(Var x) {
    return x.tape->record(map(x.value(), [](double v) { return v > 0.0 ? v : 0.0; }), {x},
                          [x](Tape& tp, const Matrix& g) {
                              Matrix gx = g;
                              const Matrix& xv = x.value();
                              for (std::size_t i = 0; i < gx.size(); ++i)
                                  if (!(xv[i] > 0.0)) gx[i] = 0.0;
                              tp.accumulate(x, gx);
                          });
}

Var abs_pow(Var x, double p) {
    require(p >= 1.0, ErrorKind::unsupported, "abs_pow: p must be >= 1");
    Matrix out = p == 2.0 ? map(x.value(), [](double v) { return v * v; })
                          : map(x.value(), [p](double v) { return std::pow(std::abs(v), p); });
    return x.tape->record(std::move(out), {x}, [x, p](Tape& tp, const Matrix& g) {
        Matrix gx = g;
        const Matrix& xv = x.value();
        for (std::size_t i = 0; i < gx.size(); ++i) {
            const double v = xv[i];
            double d;
            if (p == 2.0) {
                d = 2.0 * v;
            } else if (p == 1.0) {
                d = v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
            } else {
                d = v == 0.0 ? 0.0 : p * std::pow(std::abs(v), p - 1.0) * (v > 0.0 ? 1.0 : -1.0);
            }
            gx[i] *= d;
        }
        tp.accumulate(x, gx);
    });
}

Var power(Var x, double e) {
    for (double v : x.value().values())
        require(v >= 0.0, ErrorKind::invalid_input, "power: negative base");
    Matrix out = map(x.value(), [e](double v) { return std::pow(v, e); });
    return x.tape->record(std::move(out), {x}, [x, e](Tape& tp, const Matrix& g) {
        Matrix gx = g;
        const Matrix& xv = x.value();
        for (std::size_t i = 0; i < gx.size(); ++i) {
            // Zero base with a fractional exponent has an infinite derivative;
            // the subgradient 0 is used instead.
            gx[i] *= xv[i] > 0.0 ? e * std::pow(xv[i], e - 1.0) : 0.0;
        }
        tp.accumulate(x, gx);
    });
}

Var exp(Var x) {
    Var self{x.tape, x.tape->size()};
    return x.tape->record(map(x.value(), [](double v) { return std::exp(v); }), {x},
                          [x, self](Tape& tp, const Matrix& g) {
                              Matrix gx = g;
                              const Matrix& y = self.value();
                              for (std::size_t i = 0; i < gx.size(); ++i) gx[i] *= y[i];
                              tp.accumulate(x, gx);
                          });
}

Var log(Var x) {
    for (double v : x.value().values())
        require(v > 0.0, ErrorKind::invalid_input, "log: non-positive argument");
    return x.tape->record(map(x.value(), [](double v) { return std::log(v); }), {x},
                          [x](Tape& tp, const Matrix& g) {
                              Matrix gx = g;
                              const Matrix& xv = x.value();
                              for (std::size_t i = 0; i < gx.size(); ++i) gx[i] /= xv[i];
                              tp.accumulate(x, gx);
                          });
}

Var sum(Var x) {
    double s = 0.0;
    for (double v : x.value().values()) s += v;
    return x.tape->record(Matrix(1, 1, s), {x}, [x](Tape& tp, const Matrix& g) {
        tp.accumulate(x, Matrix(x.rows(), x.cols(), g[0]));
    });
}

Var mean(Var x) {
    const std::size_t n = x.value().size();
    require(n > 0, ErrorKind::invalid_dimension, "mean of empty matrix");
    return scale(sum(x), 1.0 / double(n));
}

Var row_sum(Var x) {
    const Matrix& xv = x.value();
    Matrix out(xv.rows(), 1);
    for (std::size_t r = 0; r < xv.rows(); ++r) {
        double s = 0.0;
        for (double v : xv.row(r)) s += v;
        out[r] = s;
    }
    return x.tape->record(std::move(out), {x}, [x](Tape& tp, const Matrix& g) {
        Matrix gx(x.rows(), x.cols());
        for (std::size_t r = 0; r < gx.rows(); ++r)
            for (double& v : gx.row(r)) v = g[r];
        tp.accumulate(x, gx);
    });
}

Var add_col(Var x, Var column) {
    Tape& t = tape_of(x, column);
    const Matrix& xv = x.value();
    const Matrix& cv = column.value();
    require(cv.rows() == xv.rows() && cv.cols() == 1, ErrorKind::invalid_dimension,
            "add_col: column must be rows x 1");
    Matrix out = xv;
    for (std::size_t r = 0; r < out.rows(); ++r)
        for (double& v : out.row(r)) v += cv[r];
    return t.record(std::move(out), {x, column}, [x, column](Tape& tp, const Matrix& g) {
        tp.accumulate(x, g);
        if (tp.requires_grad(column)) {
            Matrix gc(g.rows(), 1);
            for (std::size_t r = 0; r < g.rows(); ++r)
                for (double v : g.row(r)) gc[r] += v;
            tp.accumulate(column, gc);
        }
    });
}

Var mul(Var a, Var b) {
    Tape& t = tape_of(a, b);
    const double av = a.scalar(), bv = b.scalar();
    return t.record(Matrix(1, 1, av * bv), {a, b}, [a, b, av, bv](Tape& tp, const Matrix& g) {
        tp.accumulate(a, Matrix(1, 1, g[0] * bv));
        tp.accumulate(b, Matrix(1, 1, g[0] * av));
    });
}

Var div(Var a, Var b) {
    Tape& t = tape_of(a, b);
    const double av = a.scalar(), bv = b.scalar();
    require(bv != 0.0, ErrorKind::numerical, "div: zero denominator");
    return t.record(Matrix(1, 1, av / bv), {a, b}, [a, b, av, bv](Tape& tp, const Matrix& g) {
        tp.accumulate(a, Matrix(1, 1, g[0] / bv));
        tp.accumulate(b, Matrix(1, 1, -g[0] * av / (bv * bv)));
    });
}

Var sort_columns(Var x) {
    const Matrix& xv = x.value();
    const std::size_t n = xv.rows(), m = xv.cols();
    auto compute = [&xv, n, m] {
        // Column-major permutation block: entry c * n + k is the source row of
        // the k-th smallest value in column c.
        std::vector<std::size_t> perm(n * m);
        std::vector<double> column(n);
        for (std::size_t c = 0; c < m; ++c) {
            for (std::size_t r = 0; r < n; ++r) column[r] = xv(r, c);
            const auto order = argsort(column);
            std::copy(order.begin(), order.end(), perm.begin() + c * n);
        }
        return perm;
    };
    std::vector<std::size_t> perm =
        x.tape->trace() ? x.tape->trace()->next(n * m, compute) : compute();
    Matrix out(n, m);
    for (std::size_t c = 0; c < m; ++c)
        for (std::size_t k = 0; k < n; ++k) out(k, c) = xv(perm[c * n + k], c);
    return x.tape->record(std::move(out), {x}, [x, perm = std::move(perm)](Tape& tp, const Matrix& g) {
        const std::size_t rows = g.rows(), cols = g.cols();
        Matrix gx(rows, cols);
        for (std::size_t c = 0; c < cols; ++c)
            for (std::size_t k = 0; k < rows; ++k) gx(perm[c * rows + k], c) += g(k, c);
        tp.accumulate(x, gx);
    });
}

Var pairwise_sqdist(Var x) {
    const Matrix& xv = x.value();
    const std::size_t n = xv.rows(), d = xv.cols();
    Matrix out(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < d; ++k) {
                const double diff = xv(i, k) - xv(j, k);
                s += diff * diff;
            }
            out(i, j) = out(j, i) = s;
        }
    }
    return x.tape->record(std::move(out), {x}, [x](Tape& tp, const Matrix& g) {
        const Matrix& xv = x.value();
        const std::size_t n = xv.rows(), d = xv.cols();
        Matrix gx(n, d);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (i == j) continue;
                const double w = 2.0 * (g(i, j) + g(j, i));
                for (std::size_t k = 0; k < d; ++k) gx(i, k) += w * (xv(i, k) - xv(j, k));
            }
        }
        tp.accumulate(x, gx);
    });
}

namespace {

Matrix center_both(const Matrix& a) {
    const std::size_t n = a.rows();
    std::vector<double> row_mean(n, 0.0), col_mean(n, 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            row_mean[i] += a(i, j);
            col_mean[j] += a(i, j);
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        total += row_mean[i];
        row_mean[i] /= double(n);
    }
    for (double& v : col_mean) v /= double(n);
    total /= double(n) * double(n);
    Matrix out(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) out(i, j) = a(i, j) - row_mean[i] - col_mean[j] + total;
    return out;
}

}  // namespace

Var double_center(Var x) {
    require(x.rows() == x.cols(), ErrorKind::invalid_dimension, "double_center: square input");
    return x.tape->record(center_both(x.value()), {x},
                          [x](Tape& tp, const Matrix& g) { tp.accumulate(x, center_both(g)); });
}

Var row_normalize(Var x) {
    constexpr double floor = 1e-12;
    const Matrix& xv = x.value();
    Matrix out = xv;
    std::vector<double> norms(xv.rows());
    for (std::size_t r = 0; r < xv.rows(); ++r) {
        double s = 0.0;
        for (double v : xv.row(r)) s += v * v;
        norms[r] = std::max(std::sqrt(s), floor);
        for (double& v : out.row(r)) v /= norms[r];
    }
    Var self{x.tape, x.tape->size()};
    return x.tape->record(std::move(out), {x},
                          [x, self, norms = std::move(norms)](Tape& tp, const Matrix& g) {
                              const Matrix& y = self.value();
                              Matrix gx(g.rows(), g.cols());
                              for (std::size_t r = 0; r < g.rows(); ++r) {
                                  const bool clamped = norms[r] <= floor;
                                  double dot = 0.0;
                                  if (!clamped)
                                      for (std::size_t c = 0; c < g.cols(); ++c) dot += y(r, c) * g(r, c);
                                  for (std::size_t c = 0; c < g.cols(); ++c)
                                      gx(r, c) = (g(r, c) - y(r, c) * dot) / norms[r];
                              }
                              tp.accumulate(x, gx);
                          });
}

Var softmax_cross_entropy(Var logits, std::span<const std::size_t> labels) {
    auto [loss, grad] = nn::cross_entropy(logits.value(), labels);
    return logits.tape->record(Matrix(1, 1, loss), {logits},
                               [logits, grad = std::move(grad)](Tape& tp, const Matrix& g) {
                                   tp.accumulate(logits, g[0] * grad);
                               });
}

}  // namespace ptai::ad
