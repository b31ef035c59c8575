#pragma once

#include "speechbio/tensor.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace speechbio::nn {

/**
 * Weights of one LSTM cell. Gate blocks are laid out along the 4*hidden axis
 * in the order input, forget, cell candidate, output.
 */
struct lstm_weights {
    parameter input_weight;   // [in, 4h]
    parameter hidden_weight;  // [h, 4h]
    parameter bias;           // [4h]

    lstm_weights() = default;

    lstm_weights(std::size_t in, std::size_t hidden, const std::string &name) :
        input_weight{ name + ".w_ih", { in, 4 * hidden } },
        hidden_weight{ name + ".w_hh", { hidden, 4 * hidden } },
        bias{ name + ".bias", { 4 * hidden } } {}

    [[nodiscard]] std::size_t input_size() const { return input_weight.value.rows(); }

    [[nodiscard]] std::size_t hidden_size() const { return hidden_weight.value.rows(); }

    /// Uniform +-1/sqrt(fan_in) weights, zero bias except forget gate = 1.
    void init(rng &r) {
        const std::size_t h = hidden_size();
        const double bound = 1.0 / std::sqrt(static_cast<double>(input_size() + h));
        input_weight.init_uniform(r, bound);
        hidden_weight.init_uniform(r, bound);
        bias.value.fill(0.0);
        for (std::size_t j = h; j < 2 * h; ++j) {
            bias.value[j] = 1.0;
        }
    }

    parameter_list parameters() { return { &input_weight, &hidden_weight, &bias }; }
};

/// Everything the cell backward needs from one step.
struct lstm_step_cache {
    std::vector<double> x;
    std::vector<double> h_prev;
    std::vector<double> c_prev;
    std::vector<double> i, f, g, o;
    std::vector<double> c;
    std::vector<double> tanh_c;
    std::vector<double> h;
};

inline lstm_step_cache lstm_cell_forward(std::span<const double> x, std::span<const double> h_prev, std::span<const double> c_prev, const lstm_weights &w) {
    const std::size_t in = w.input_size();
    const std::size_t h = w.hidden_size();
    if (x.size() != in || h_prev.size() != h || c_prev.size() != h) {
        throw shape_error{ "lstm_cell: expected x[" + std::to_string(in) + "], h/c[" + std::to_string(h) + "], got x[" + std::to_string(x.size()) + "], h[" + std::to_string(h_prev.size()) + "], c[" + std::to_string(c_prev.size()) + "]" };
    }
    std::vector<double> a(w.bias.value.raw());
    const auto &wi = w.input_weight.value.raw();
    const auto &wh = w.hidden_weight.value.raw();
    for (std::size_t p = 0; p < in; ++p) {
        const double xv = x[p];
        const double *row = wi.data() + p * 4 * h;
        for (std::size_t j = 0; j < 4 * h; ++j) {
            a[j] += xv * row[j];
        }
    }
    for (std::size_t p = 0; p < h; ++p) {
        const double hv = h_prev[p];
        const double *row = wh.data() + p * 4 * h;
        for (std::size_t j = 0; j < 4 * h; ++j) {
            a[j] += hv * row[j];
        }
    }
    lstm_step_cache s;
    s.x.assign(x.begin(), x.end());
    s.h_prev.assign(h_prev.begin(), h_prev.end());
    s.c_prev.assign(c_prev.begin(), c_prev.end());
    s.i.resize(h);
    s.f.resize(h);
    s.g.resize(h);
    s.o.resize(h);
    s.c.resize(h);
    s.tanh_c.resize(h);
    s.h.resize(h);
    for (std::size_t k = 0; k < h; ++k) {
        s.i[k] = sigmoid(a[k]);
        s.f[k] = sigmoid(a[h + k]);
        s.g[k] = std::tanh(a[2 * h + k]);
        s.o[k] = sigmoid(a[3 * h + k]);
        s.c[k] = s.f[k] * s.c_prev[k] + s.i[k] * s.g[k];
        s.tanh_c[k] = std::tanh(s.c[k]);
        s.h[k] = s.o[k] * s.tanh_c[k];
    }
    return s;
}

struct lstm_step_grads {
    std::vector<double> dx;
    std::vector<double> dh_prev;
    std::vector<double> dc_prev;
};

/// Backward through one step given dL/dh_t and dL/dc_t (from the future).
inline lstm_step_grads lstm_cell_backward(const lstm_step_cache &s, std::span<const double> dh, std::span<const double> dc_next, lstm_weights &w) {
    const std::size_t in = w.input_size();
    const std::size_t h = w.hidden_size();
    std::vector<double> da(4 * h);
    lstm_step_grads out;
    out.dc_prev.resize(h);
    for (std::size_t k = 0; k < h; ++k) {
        const double d_o = dh[k] * s.tanh_c[k];
        const double dc = dc_next[k] + dh[k] * s.o[k] * (1.0 - s.tanh_c[k] * s.tanh_c[k]);
        const double d_i = dc * s.g[k];
        const double d_g = dc * s.i[k];
        const double d_f = dc * s.c_prev[k];
        out.dc_prev[k] = dc * s.f[k];
        da[k] = d_i * s.i[k] * (1.0 - s.i[k]);
        da[h + k] = d_f * s.f[k] * (1.0 - s.f[k]);
        da[2 * h + k] = d_g * (1.0 - s.g[k] * s.g[k]);
        da[3 * h + k] = d_o * s.o[k] * (1.0 - s.o[k]);
    }
    auto &gwi = w.input_weight.grad.raw();
    auto &gwh = w.hidden_weight.grad.raw();
    auto &gb = w.bias.grad.raw();
    const auto &wi = w.input_weight.value.raw();
    const auto &wh = w.hidden_weight.value.raw();
    for (std::size_t j = 0; j < 4 * h; ++j) {
        gb[j] += da[j];
    }
    out.dx.assign(in, 0.0);
    for (std::size_t p = 0; p < in; ++p) {
        double *grow = gwi.data() + p * 4 * h;
        const double *row = wi.data() + p * 4 * h;
        double acc = 0.0;
        for (std::size_t j = 0; j < 4 * h; ++j) {
            grow[j] += s.x[p] * da[j];
            acc += row[j] * da[j];
        }
        out.dx[p] = acc;
    }
    out.dh_prev.assign(h, 0.0);
    for (std::size_t p = 0; p < h; ++p) {
        double *grow = gwh.data() + p * 4 * h;
        const double *row = wh.data() + p * 4 * h;
        double acc = 0.0;
        for (std::size_t j = 0; j < 4 * h; ++j) {
            grow[j] += s.h_prev[p] * da[j];
            acc += row[j] * da[j];
        }
        out.dh_prev[p] = acc;
    }
    return out;
}

/// One LSTM direction over a [seq, in] sequence from zero initial state.
class lstm_layer {
  public:
    lstm_layer() = default;

    lstm_layer(std::size_t in, std::size_t hidden, bool reverse, const std::string &name) :
        weights_{ in, hidden, name },
        reverse_{ reverse } {}

    void init(rng &r) { weights_.init(r); }

    /// Returns [seq, hidden]; row t is the state after consuming x[t].
    tensor forward(const tensor &x) {
        const std::size_t t_len = x.rows();
        const std::size_t h = weights_.hidden_size();
        if (x.rank() != 2 || t_len == 0 || x.cols() != weights_.input_size()) {
            throw shape_error{ "lstm_layer: input " + shape_string(x.shape()) };
        }
        steps_.clear();
        steps_.reserve(t_len);
        tensor y = tensor::matrix(t_len, h);
        std::vector<double> hs(h, 0.0);
        std::vector<double> cs(h, 0.0);
        for (std::size_t k = 0; k < t_len; ++k) {
            const std::size_t t = reverse_ ? t_len - 1 - k : k;
            steps_.push_back(lstm_cell_forward(x.row(t), hs, cs, weights_));
            hs = steps_.back().h;
            cs = steps_.back().c;
            std::copy(hs.begin(), hs.end(), y.row(t).begin());
        }
        return y;
    }

    tensor backward(const tensor &dy) {
        const std::size_t t_len = steps_.size();
        const std::size_t h = weights_.hidden_size();
        if (dy.rows() != t_len || dy.cols() != h) {
            throw shape_error{ "lstm_layer: upstream gradient " + shape_string(dy.shape()) };
        }
        tensor dx = tensor::matrix(t_len, weights_.input_size());
        std::vector<double> dh_next(h, 0.0);
        std::vector<double> dc_next(h, 0.0);
        std::vector<double> dh(h);
        for (std::size_t k = t_len; k-- > 0;) {
            const std::size_t t = reverse_ ? t_len - 1 - k : k;
            const auto up = dy.row(t);
            for (std::size_t j = 0; j < h; ++j) {
                dh[j] = up[j] + dh_next[j];
            }
            auto g = lstm_cell_backward(steps_[k], dh, dc_next, weights_);
            std::copy(g.dx.begin(), g.dx.end(), dx.row(t).begin());
            dh_next = std::move(g.dh_prev);
            dc_next = std::move(g.dc_prev);
        }
        return dx;
    }

    lstm_weights &weights() { return weights_; }

    parameter_list parameters() { return weights_.parameters(); }

  private:
    lstm_weights weights_;
    bool reverse_ = false;
    std::vector<lstm_step_cache> steps_;
};

/// Stacked bidirectional LSTM; each layer emits [forward | backward] per step.
class bilstm {
  public:
    bilstm() = default;

    bilstm(std::size_t in, std::size_t hidden, std::size_t layers, const std::string &name = "bilstm") :
        hidden_{ hidden } {
        if (layers == 0 || hidden == 0 || in == 0) {
            throw config_error{ "bilstm: sizes must be positive" };
        }
        for (std::size_t l = 0; l < layers; ++l) {
            const std::size_t layer_in = l == 0 ? in : 2 * hidden;
            const std::string base = name + ".l" + std::to_string(l);
            forward_.emplace_back(layer_in, hidden, false, base + ".fwd");
            backward_.emplace_back(layer_in, hidden, true, base + ".bwd");
        }
    }

    void init(rng &r) {
        for (std::size_t l = 0; l < forward_.size(); ++l) {
            forward_[l].init(r);
            backward_[l].init(r);
        }
    }

    [[nodiscard]] std::size_t output_size() const noexcept { return 2 * hidden_; }

    [[nodiscard]] std::size_t layer_count() const noexcept { return forward_.size(); }

    tensor forward(const tensor &x) {
        tensor cur = x;
        for (std::size_t l = 0; l < forward_.size(); ++l) {
            const tensor a = forward_[l].forward(cur);
            const tensor b = backward_[l].forward(cur);
            tensor y = tensor::matrix(cur.rows(), 2 * hidden_);
            for (std::size_t t = 0; t < cur.rows(); ++t) {
                auto row = y.row(t);
                std::copy(a.row(t).begin(), a.row(t).end(), row.begin());
                std::copy(b.row(t).begin(), b.row(t).end(), row.begin() + static_cast<std::ptrdiff_t>(hidden_));
            }
            cur = std::move(y);
        }
        return cur;
    }

    tensor backward(const tensor &dy) {
        tensor cur = dy;
        for (std::size_t l = forward_.size(); l-- > 0;) {
            tensor da = tensor::matrix(cur.rows(), hidden_);
            tensor db = tensor::matrix(cur.rows(), hidden_);
            for (std::size_t t = 0; t < cur.rows(); ++t) {
                const auto row = cur.row(t);
                std::copy(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(hidden_), da.row(t).begin());
                std::copy(row.begin() + static_cast<std::ptrdiff_t>(hidden_), row.end(), db.row(t).begin());
            }
            tensor dx = forward_[l].backward(da);
            add_inplace(dx, backward_[l].backward(db));
            cur = std::move(dx);
        }
        return cur;
    }

    parameter_list parameters() {
        parameter_list out;
        for (std::size_t l = 0; l < forward_.size(); ++l) {
            for (auto *p : forward_[l].parameters()) {
                out.push_back(p);
            }
            for (auto *p : backward_[l].parameters()) {
                out.push_back(p);
            }
        }
        return out;
    }

  private:
    std::size_t hidden_ = 0;
    std::vector<lstm_layer> forward_;
    std::vector<lstm_layer> backward_;
};

}  // namespace speechbio::nn
