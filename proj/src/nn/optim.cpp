#include "ptai/nn/optim.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "ptai/core/error.hpp"

namespace ptai::nn {

AdamWState make_adamw_state(std::span<Matrix* const> params) {
    AdamWState s;
    for (const Matrix* p : params) {
        s.first_moment.emplace_back(p->rows(), p->cols());
        s.second_moment.emplace_back(p->rows(), p->cols());
    }
    return s;
}

void adamw_step(std::span<Matrix* const> params, std::span<const Matrix> grads, AdamWState& state,
                double lr, double weight_decay) {
    require(params.size() == grads.size() && params.size() == state.first_moment.size(),
            ErrorKind::invalid_input, "adamw_step: parameter/gradient/state count mismatch");
    require(lr > 0.0, ErrorKind::invalid_config, "adamw_step: learning rate must be positive");
    for (std::size_t i = 0; i < params.size(); ++i) {
        require(grads[i].rows() == params[i]->rows() && grads[i].cols() == params[i]->cols(),
                ErrorKind::invalid_dimension, "adamw_step: gradient shape mismatch at block " + std::to_string(i));
        require(grads[i].all_finite(), ErrorKind::numerical,
                "adamw_step: non-finite gradient in block " + std::to_string(i) + "; step rejected");
    }
    state.step += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, double(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, double(state.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        Matrix& p = *params[i];
        Matrix& m = state.first_moment[i];
        Matrix& v = state.second_moment[i];
        const Matrix& g = grads[i];
        for (std::size_t j = 0; j < p.size(); ++j) {
            p[j] -= lr * weight_decay * p[j];
            m[j] = state.beta1 * m[j] + (1.0 - state.beta1) * g[j];
            v[j] = state.beta2 * v[j] + (1.0 - state.beta2) * g[j] * g[j];
            const double m_hat = m[j] / bc1;
            const double v_hat = v[j] / bc2;
            p[j] -= lr * m_hat / (std::sqrt(v_hat) + state.eps);
        }
    }
}

CosineSchedule::CosineSchedule(double lr_max, double lr_min, std::size_t total_steps)
    : lr_max_(lr_max), lr_min_(lr_min), total_(total_steps) {
    require(lr_max > 0.0 && lr_min > 0.0 && lr_min <= lr_max, ErrorKind::invalid_config,
            "cosine schedule needs 0 < lr_min <= lr_max");
}

double CosineSchedule::at(std::size_t step) const {
    if (total_ <= 1) return lr_max_;
    if (step >= total_ - 1) return lr_min_;
    const double frac = double(step) / double(total_ - 1);
    return lr_min_ + 0.5 * (lr_max_ - lr_min_) * (1.0 + std::cos(std::numbers::pi * frac));
}

}  // namespace ptai::nn
