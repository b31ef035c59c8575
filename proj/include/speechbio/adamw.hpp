#pragma once

#include "speechbio/tensor.hpp"

#include <cmath>

namespace speechbio::nn {

struct adamw_params {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.01;
};

/**
 * One AdamW update over every parameter, with bias-corrected moments and
 * decoupled weight decay:
 *
 *   theta <- theta - lr * m_hat / (sqrt(v_hat) + eps) - lr * wd * theta
 *
 * The decay term uses theta from before the update. Each parameter keeps its
 * own step counter, incremented once per call.
 */
inline void adamw_step(const parameter_list &params, const adamw_params &h) {
    for (auto *p : params) {
        ++p->step;
        const double t = static_cast<double>(p->step);
        const double c1 = 1.0 - std::pow(h.beta1, t);
        const double c2 = 1.0 - std::pow(h.beta2, t);
        auto &theta = p->value.raw();
        auto &m = p->m.raw();
        auto &v = p->v.raw();
        const auto &g = p->grad.raw();
        for (std::size_t i = 0; i < theta.size(); ++i) {
            m[i] = h.beta1 * m[i] + (1.0 - h.beta1) * g[i];
            v[i] = h.beta2 * v[i] + (1.0 - h.beta2) * g[i] * g[i];
            const double m_hat = m[i] / c1;
            const double v_hat = v[i] / c2;
            theta[i] = theta[i] - h.lr * m_hat / (std::sqrt(v_hat) + h.eps) - h.lr * h.weight_decay * theta[i];
        }
    }
}

}  // namespace speechbio::nn
