#pragma once

// Feed-forward layers with hand-written backward passes. Each layer caches what
// its backward needs from the most recent forward call; backward accumulates
// into parameter gradients and returns the input gradient.

#include "speechbio/tensor.hpp"

#include <cmath>
#include <span>
#include <string>
#include <vector>

namespace speechbio::nn {

enum class mode { train, eval };

/// y = x W + b over a batch of rows.
class linear {
  public:
    linear() = default;

    linear(std::size_t in, std::size_t out, const std::string &name = "linear") :
        weight_{ name + ".weight", { in, out } },
        bias_{ name + ".bias", { out } } {}

    void init(rng &r) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(in_features()));
        weight_.init_uniform(r, bound);
        bias_.init_uniform(r, bound);
    }

    [[nodiscard]] std::size_t in_features() const { return weight_.value.rows(); }

    [[nodiscard]] std::size_t out_features() const { return weight_.value.cols(); }

    tensor forward(const tensor &x) {
        if (x.rank() != 2 || x.cols() != in_features()) {
            throw shape_error{ "linear: input " + shape_string(x.shape()) + " for " + std::to_string(in_features()) + " features" };
        }
        input_ = x;
        tensor y = matmul(x, weight_.value);
        add_row_broadcast(y, bias_.value);
        return y;
    }

    tensor backward(const tensor &dy) {
        if (dy.rank() != 2 || dy.rows() != input_.rows() || dy.cols() != out_features()) {
            throw shape_error{ "linear: upstream gradient " + shape_string(dy.shape()) };
        }
        add_inplace(weight_.grad, matmul_tn(input_, dy));
        for (std::size_t r = 0; r < dy.rows(); ++r) {
            const auto row = dy.row(r);
            for (std::size_t c = 0; c < row.size(); ++c) {
                bias_.grad[c] += row[c];
            }
        }
        return matmul_nt(dy, weight_.value);
    }

    parameter &weight() { return weight_; }

    parameter &bias() { return bias_; }

    parameter_list parameters() { return { &weight_, &bias_ }; }

  private:
    parameter weight_;
    parameter bias_;
    tensor input_;
};

class leaky_relu {
  public:
    explicit leaky_relu(double slope = 0.01) : slope_{ slope } {}

    tensor forward(const tensor &x) {
        input_ = x;
        tensor y = x;
        for (auto &v : y.raw()) {
            if (v < 0.0) {
                v *= slope_;
            }
        }
        return y;
    }

    /// Derivative is taken as 1 at x = 0.
    tensor backward(const tensor &dy) const {
        if (dy.size() != input_.size()) {
            throw shape_error{ "leaky_relu: upstream gradient size mismatch" };
        }
        tensor dx = dy;
        for (std::size_t i = 0; i < dx.size(); ++i) {
            if (input_[i] < 0.0) {
                dx[i] *= slope_;
            }
        }
        return dx;
    }

    [[nodiscard]] double slope() const noexcept { return slope_; }

  private:
    double slope_;
    tensor input_;
};

/// Inverted dropout; the mask of the last train-mode forward is reused by backward.
class dropout {
  public:
    explicit dropout(double p = 0.2) : p_{ p } {
        if (!(p >= 0.0 && p < 1.0)) {
            throw config_error{ "dropout: probability must be in [0, 1), got " + std::to_string(p) };
        }
    }

    tensor forward(const tensor &x, mode m, rng &r) {
        mask_.assign(x.size(), 1.0);
        if (m == mode::eval || p_ == 0.0) {
            return x;
        }
        const double scale = 1.0 / (1.0 - p_);
        tensor y = x;
        for (std::size_t i = 0; i < y.size(); ++i) {
            mask_[i] = r.bernoulli(p_) ? 0.0 : scale;
            y[i] *= mask_[i];
        }
        return y;
    }

    tensor backward(const tensor &dy) const {
        if (dy.size() != mask_.size()) {
            throw shape_error{ "dropout: upstream gradient size mismatch" };
        }
        tensor dx = dy;
        for (std::size_t i = 0; i < dx.size(); ++i) {
            dx[i] *= mask_[i];
        }
        return dx;
    }

    [[nodiscard]] const std::vector<double> &mask() const noexcept { return mask_; }

    [[nodiscard]] double probability() const noexcept { return p_; }

  private:
    double p_;
    std::vector<double> mask_;
};

/// max(z, 0) - z y + log(1 + exp(-|z|)); finite for any finite z.
inline double bce_with_logits(double z, double y) { return std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z))); }

inline double bce_with_logits_grad(double z, double y) { return sigmoid(z) - y; }

/// Mean loss over a batch; `dlogits` receives d(mean)/dz.
inline double bce_with_logits_batch(std::span<const double> logits, std::span<const double> labels, std::vector<double> &dlogits) {
    if (logits.size() != labels.size() || logits.empty()) {
        throw shape_error{ "bce_with_logits: logits/labels length mismatch" };
    }
    const auto n = static_cast<double>(logits.size());
    dlogits.resize(logits.size());
    double loss = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        loss += bce_with_logits(logits[i], labels[i]);
        dlogits[i] = bce_with_logits_grad(logits[i], labels[i]) / n;
    }
    return loss / n;
}

/// Mean over unmasked rows of x[seq, d]. An empty mask means all rows count.
inline tensor mean_pool(const tensor &x, const std::vector<bool> &mask = {}) {
    if (x.rank() != 2) {
        throw shape_error{ "mean_pool: expected [seq, d]" };
    }
    if (!mask.empty() && mask.size() != x.rows()) {
        throw shape_error{ "mean_pool: mask length mismatch" };
    }
    tensor out = tensor::vector(x.cols());
    std::size_t count = 0;
    for (std::size_t r = 0; r < x.rows(); ++r) {
        if (!mask.empty() && !mask[r]) {
            continue;
        }
        ++count;
        const auto row = x.row(r);
        for (std::size_t c = 0; c < row.size(); ++c) {
            out[c] += row[c];
        }
    }
    if (count == 0) {
        throw empty_input_error{ "mean_pool: every position is masked" };
    }
    for (auto &v : out.raw()) {
        v /= static_cast<double>(count);
    }
    return out;
}

inline tensor mean_pool_backward(const tensor &dy, std::size_t seq, const std::vector<bool> &mask = {}) {
    std::size_t count = 0;
    for (std::size_t r = 0; r < seq; ++r) {
        count += mask.empty() || mask[r] ? 1 : 0;
    }
    if (count == 0) {
        throw empty_input_error{ "mean_pool: every position is masked" };
    }
    tensor dx = tensor::matrix(seq, dy.size());
    for (std::size_t r = 0; r < seq; ++r) {
        if (!mask.empty() && !mask[r]) {
            continue;
        }
        auto row = dx.row(r);
        for (std::size_t c = 0; c < row.size(); ++c) {
            row[c] = dy[c] / static_cast<double>(count);
        }
    }
    return dx;
}

}  // namespace speechbio::nn
