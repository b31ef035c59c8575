#pragma once

#include "speechbio/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace speechbio::nn {

struct attention_config {
    std::size_t model_dim = 0;
    std::size_t num_heads = 2;

    [[nodiscard]] std::size_t head_dim() const { return model_dim / num_heads; }

    void validate() const {
        if (model_dim == 0 || num_heads == 0) {
            throw config_error{ "attention: model_dim and num_heads must be positive" };
        }
        if (model_dim % num_heads != 0) {
            throw config_error{ "attention: model_dim " + std::to_string(model_dim) + " is not divisible by " + std::to_string(num_heads) + " heads" };
        }
    }
};

/// Score given to masked keys before the softmax.
inline constexpr double attention_mask_value = -1e9;

/**
 * Multi-head scaled dot-product self-attention over x[seq, d].
 *
 * Q, K, V and the output projection are full d x d maps; head h owns columns
 * [h*head_dim, (h+1)*head_dim). The optional key mask marks valid positions.
 */
class multi_head_attention {
  public:
    multi_head_attention() = default;

    explicit multi_head_attention(attention_config cfg, const std::string &name = "mha") :
        cfg_{ cfg } {
        cfg_.validate();
        const std::size_t d = cfg_.model_dim;
        wq_ = parameter{ name + ".w_q", { d, d } };
        bq_ = parameter{ name + ".b_q", { d } };
        wk_ = parameter{ name + ".w_k", { d, d } };
        bk_ = parameter{ name + ".b_k", { d } };
        wv_ = parameter{ name + ".w_v", { d, d } };
        bv_ = parameter{ name + ".b_v", { d } };
        wo_ = parameter{ name + ".w_o", { d, d } };
        bo_ = parameter{ name + ".b_o", { d } };
    }

    void init(rng &r) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(cfg_.model_dim));
        for (auto *p : { &wq_, &wk_, &wv_, &wo_ }) {
            p->init_uniform(r, bound);
        }
        for (auto *p : { &bq_, &bk_, &bv_, &bo_ }) {
            p->value.fill(0.0);
        }
    }

    [[nodiscard]] const attention_config &config() const noexcept { return cfg_; }

    tensor forward(const tensor &x, const std::vector<bool> &key_mask = {}) {
        const std::size_t d = cfg_.model_dim;
        if (x.rank() != 2 || x.rows() == 0 || x.cols() != d) {
            throw shape_error{ "attention: input " + shape_string(x.shape()) + " for model_dim " + std::to_string(d) };
        }
        const std::size_t t_len = x.rows();
        if (!key_mask.empty()) {
            if (key_mask.size() != t_len) {
                throw shape_error{ "attention: key mask length mismatch" };
            }
            if (std::none_of(key_mask.begin(), key_mask.end(), [](bool b) { return b; })) {
                throw empty_input_error{ "attention: every key is masked" };
            }
        }
        x_ = x;
        mask_ = key_mask;
        q_ = matmul(x, wq_.value);
        add_row_broadcast(q_, bq_.value);
        k_ = matmul(x, wk_.value);
        add_row_broadcast(k_, bk_.value);
        v_ = matmul(x, wv_.value);
        add_row_broadcast(v_, bv_.value);

        const std::size_t hd = cfg_.head_dim();
        const double scale = 1.0 / std::sqrt(static_cast<double>(hd));
        weights_.assign(cfg_.num_heads, tensor::matrix(t_len, t_len));
        concat_ = tensor::matrix(t_len, d);
        for (std::size_t h = 0; h < cfg_.num_heads; ++h) {
            const std::size_t off = h * hd;
            tensor &a = weights_[h];
            for (std::size_t i = 0; i < t_len; ++i) {
                double mx = -std::numeric_limits<double>::infinity();
                for (std::size_t j = 0; j < t_len; ++j) {
                    double s = attention_mask_value;
                    if (key_mask.empty() || key_mask[j]) {
                        s = 0.0;
                        for (std::size_t c = 0; c < hd; ++c) {
                            s += q_.at(i, off + c) * k_.at(j, off + c);
                        }
                        s *= scale;
                    }
                    a.at(i, j) = s;
                    mx = std::max(mx, s);
                }
                double sum = 0.0;
                for (std::size_t j = 0; j < t_len; ++j) {
                    a.at(i, j) = std::exp(a.at(i, j) - mx);
                    sum += a.at(i, j);
                }
                for (std::size_t j = 0; j < t_len; ++j) {
                    a.at(i, j) /= sum;
                }
                for (std::size_t j = 0; j < t_len; ++j) {
                    const double w = a.at(i, j);
                    for (std::size_t c = 0; c < hd; ++c) {
                        concat_.at(i, off + c) += w * v_.at(j, off + c);
                    }
                }
            }
        }
        tensor y = matmul(concat_, wo_.value);
        add_row_broadcast(y, bo_.value);
        return y;
    }

    tensor backward(const tensor &dy) {
        const std::size_t d = cfg_.model_dim;
        const std::size_t t_len = x_.rows();
        if (dy.rows() != t_len || dy.cols() != d) {
            throw shape_error{ "attention: upstream gradient " + shape_string(dy.shape()) };
        }
        add_inplace(wo_.grad, matmul_tn(concat_, dy));
        accumulate_bias(bo_, dy);
        const tensor dconcat = matmul_nt(dy, wo_.value);

        const std::size_t hd = cfg_.head_dim();
        const double scale = 1.0 / std::sqrt(static_cast<double>(hd));
        tensor dq = tensor::matrix(t_len, d);
        tensor dk = tensor::matrix(t_len, d);
        tensor dv = tensor::matrix(t_len, d);
        std::vector<double> da(t_len);
        for (std::size_t h = 0; h < cfg_.num_heads; ++h) {
            const std::size_t off = h * hd;
            const tensor &a = weights_[h];
            for (std::size_t i = 0; i < t_len; ++i) {
                double dot = 0.0;
                for (std::size_t j = 0; j < t_len; ++j) {
                    double s = 0.0;
                    for (std::size_t c = 0; c < hd; ++c) {
                        s += dconcat.at(i, off + c) * v_.at(j, off + c);
                    }
                    da[j] = s;
                    dot += s * a.at(i, j);
                    for (std::size_t c = 0; c < hd; ++c) {
                        dv.at(j, off + c) += a.at(i, j) * dconcat.at(i, off + c);
                    }
                }
                for (std::size_t j = 0; j < t_len; ++j) {
                    const double ds = a.at(i, j) * (da[j] - dot) * scale;
                    if (ds == 0.0) {
                        continue;
                    }
                    for (std::size_t c = 0; c < hd; ++c) {
                        dq.at(i, off + c) += ds * k_.at(j, off + c);
                        dk.at(j, off + c) += ds * q_.at(i, off + c);
                    }
                }
            }
        }
        add_inplace(wq_.grad, matmul_tn(x_, dq));
        add_inplace(wk_.grad, matmul_tn(x_, dk));
        add_inplace(wv_.grad, matmul_tn(x_, dv));
        accumulate_bias(bq_, dq);
        accumulate_bias(bk_, dk);
        accumulate_bias(bv_, dv);
        tensor dx = matmul_nt(dq, wq_.value);
        add_inplace(dx, matmul_nt(dk, wk_.value));
        add_inplace(dx, matmul_nt(dv, wv_.value));
        return dx;
    }

    /// Softmax weights of head h from the last forward, [seq, seq].
    [[nodiscard]] const tensor &attention_weights(std::size_t h) const { return weights_.at(h); }

    parameter_list parameters() { return { &wq_, &bq_, &wk_, &bk_, &wv_, &bv_, &wo_, &bo_ }; }

    parameter &query_weight() { return wq_; }
    parameter &key_weight() { return wk_; }
    parameter &value_weight() { return wv_; }
    parameter &output_weight() { return wo_; }

  private:
    static void accumulate_bias(parameter &b, const tensor &d) {
        for (std::size_t r = 0; r < d.rows(); ++r) {
            const auto row = d.row(r);
            for (std::size_t c = 0; c < row.size(); ++c) {
                b.grad[c] += row[c];
            }
        }
    }

    attention_config cfg_;
    parameter wq_, bq_, wk_, bk_, wv_, bv_, wo_, bo_;
    tensor x_, q_, k_, v_, concat_;
    std::vector<tensor> weights_;
    std::vector<bool> mask_;
};

}  // namespace speechbio::nn
