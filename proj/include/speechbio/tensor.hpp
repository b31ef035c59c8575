#pragma once

#include "speechbio/common.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace speechbio::nn {

/// Dense row-major array of doubles.
class tensor {
  public:
    tensor() = default;

    explicit tensor(std::vector<std::size_t> shape, double fill = 0.0) :
        shape_{ std::move(shape) } {
        for (const auto d : shape_) {
            if (d == 0) {
                throw shape_error{ "tensor: zero-sized dimension" };
            }
        }
        data_.assign(element_count(shape_), fill);
    }

    tensor(std::vector<std::size_t> shape, std::vector<double> data) :
        shape_{ std::move(shape) },
        data_{ std::move(data) } {
        if (data_.size() != element_count(shape_)) {
            throw shape_error{ "tensor: data length does not match shape" };
        }
    }

    static tensor matrix(std::size_t rows, std::size_t cols, double fill = 0.0) { return tensor{ { rows, cols }, fill }; }

    static tensor vector(std::size_t n, double fill = 0.0) { return tensor{ { n }, fill }; }

    [[nodiscard]] const std::vector<std::size_t> &shape() const noexcept { return shape_; }

    [[nodiscard]] std::size_t rank() const noexcept { return shape_.size(); }

    [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }

    [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

    /// Leading dimension (rows for a matrix, length for a vector).
    [[nodiscard]] std::size_t rows() const { return shape_.empty() ? 0 : shape_.front(); }

    /// Trailing dimension for a matrix; 1 for a vector.
    [[nodiscard]] std::size_t cols() const { return shape_.size() >= 2 ? shape_.back() : 1; }

    [[nodiscard]] std::span<double> data() noexcept { return data_; }

    [[nodiscard]] std::span<const double> data() const noexcept { return data_; }

    [[nodiscard]] std::vector<double> &raw() noexcept { return data_; }

    [[nodiscard]] const std::vector<double> &raw() const noexcept { return data_; }

    double &operator[](std::size_t i) { return data_[i]; }

    double operator[](std::size_t i) const { return data_[i]; }

    double &at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }

    [[nodiscard]] double at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }

    [[nodiscard]] std::span<double> row(std::size_t r) { return { data_.data() + r * cols(), cols() }; }

    [[nodiscard]] std::span<const double> row(std::size_t r) const { return { data_.data() + r * cols(), cols() }; }

    void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

    [[nodiscard]] bool same_shape(const tensor &o) const noexcept { return shape_ == o.shape_; }

    [[nodiscard]] bool all_finite() const {
        return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
    }

    static std::size_t element_count(const std::vector<std::size_t> &shape) {
        return shape.empty() ? 0 : std::accumulate(shape.begin(), shape.end(), std::size_t{ 1 }, std::multiplies<>{});
    }

  private:
    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

inline std::string shape_string(const std::vector<std::size_t> &s) {
    std::string out = "[";
    for (std::size_t i = 0; i < s.size(); ++i) {
        out += (i ? ", " : "") + std::to_string(s[i]);
    }
    return out + "]";
}

/// a[n,k] * b[k,m]
inline tensor matmul(const tensor &a, const tensor &b) {
    if (a.rank() != 2 || b.rank() != 2 || a.cols() != b.rows()) {
        throw shape_error{ "matmul: " + shape_string(a.shape()) + " x " + shape_string(b.shape()) };
    }
    const std::size_t n = a.rows();
    const std::size_t k = a.cols();
    const std::size_t m = b.cols();
    tensor c = tensor::matrix(n, m);
    for (std::size_t i = 0; i < n; ++i) {
        double *ci = c.raw().data() + i * m;
        for (std::size_t p = 0; p < k; ++p) {
            const double av = a.raw()[i * k + p];
            if (av == 0.0) {
                continue;
            }
            const double *bp = b.raw().data() + p * m;
            for (std::size_t j = 0; j < m; ++j) {
                ci[j] += av * bp[j];
            }
        }
    }
    return c;
}

/// a[k,n]^T * b[k,m] -> [n,m]
inline tensor matmul_tn(const tensor &a, const tensor &b) {
    if (a.rank() != 2 || b.rank() != 2 || a.rows() != b.rows()) {
        throw shape_error{ "matmul_tn: " + shape_string(a.shape()) + "^T x " + shape_string(b.shape()) };
    }
    const std::size_t k = a.rows();
    const std::size_t n = a.cols();
    const std::size_t m = b.cols();
    tensor c = tensor::matrix(n, m);
    for (std::size_t p = 0; p < k; ++p) {
        const double *ap = a.raw().data() + p * n;
        const double *bp = b.raw().data() + p * m;
        for (std::size_t i = 0; i < n; ++i) {
            const double av = ap[i];
            if (av == 0.0) {
                continue;
            }
            double *ci = c.raw().data() + i * m;
            for (std::size_t j = 0; j < m; ++j) {
                ci[j] += av * bp[j];
            }
        }
    }
    return c;
}

/// a[n,k] * b[m,k]^T -> [n,m]
inline tensor matmul_nt(const tensor &a, const tensor &b) {
    if (a.rank() != 2 || b.rank() != 2 || a.cols() != b.cols()) {
        throw shape_error{ "matmul_nt: " + shape_string(a.shape()) + " x " + shape_string(b.shape()) + "^T" };
    }
    const std::size_t n = a.rows();
    const std::size_t k = a.cols();
    const std::size_t m = b.rows();
    tensor c = tensor::matrix(n, m);
    for (std::size_t i = 0; i < n; ++i) {
        const double *ai = a.raw().data() + i * k;
        for (std::size_t j = 0; j < m; ++j) {
            const double *bj = b.raw().data() + j * k;
            double acc = 0.0;
            for (std::size_t p = 0; p < k; ++p) {
                acc += ai[p] * bj[p];
            }
            c.raw()[i * m + j] = acc;
        }
    }
    return c;
}

inline void add_inplace(tensor &dst, const tensor &src) {
    if (dst.size() != src.size()) {
        throw shape_error{ "add_inplace: " + shape_string(dst.shape()) + " += " + shape_string(src.shape()) };
    }
    for (std::size_t i = 0; i < dst.size(); ++i) {
        dst[i] += src[i];
    }
}

/// Adds a length-m vector to every row of an [n,m] matrix.
inline void add_row_broadcast(tensor &m, const tensor &bias) {
    if (bias.size() != m.cols()) {
        throw shape_error{ "add_row_broadcast: bias length " + std::to_string(bias.size()) + " for " + std::to_string(m.cols()) + " columns" };
    }
    for (std::size_t r = 0; r < m.rows(); ++r) {
        auto row = m.row(r);
        for (std::size_t c = 0; c < row.size(); ++c) {
            row[c] += bias[c];
        }
    }
}

/// Trainable tensor with its gradient and AdamW moment estimates.
struct parameter {
    std::string name;
    tensor value;
    tensor grad;
    tensor m;
    tensor v;
    std::uint64_t step = 0;

    parameter() = default;

    parameter(std::string n, std::vector<std::size_t> shape) :
        name{ std::move(n) },
        value{ shape },
        grad{ shape },
        m{ shape },
        v{ std::move(shape) } {}

    void zero_grad() { grad.fill(0.0); }

    /// Uniform in +-bound.
    void init_uniform(rng &r, double bound) {
        for (auto &x : value.raw()) {
            x = r.uniform(-bound, bound);
        }
    }
};

using parameter_list = std::vector<parameter *>;

inline void zero_grads(const parameter_list &params) {
    for (auto *p : params) {
        p->zero_grad();
    }
}

inline double max_abs_grad(const parameter_list &params) {
    double m = 0.0;
    for (const auto *p : params) {
        for (const double g : p->grad.raw()) {
            m = std::max(m, std::abs(g));
        }
    }
    return m;
}

inline double sigmoid(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

}  // namespace speechbio::nn
