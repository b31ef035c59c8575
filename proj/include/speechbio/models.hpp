#pragma once

// Baseline hand-crafted-feature MLP and the audio/text/hand-crafted fusion
// classifier, both emitting a single logit per sample.

#include "speechbio/adamw.hpp"
#include "speechbio/attention.hpp"
#include "speechbio/checkpoint.hpp"
#include "speechbio/layers.hpp"
#include "speechbio/lstm.hpp"

#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace speechbio::nn {

/// Non-finite loss during training.
class training_error : public error {
  public:
    using error::error;
};

inline std::size_t ceil_half(std::size_t n) { return (n + 1) / 2; }

struct baseline_config {
    std::size_t input_dim = 0;
    double dropout = 0.2;
    double leaky_slope = 0.01;

    /// Hidden widths, each ceil(previous / 2).
    [[nodiscard]] std::vector<std::size_t> hidden_widths() const {
        std::vector<std::size_t> w;
        std::size_t cur = input_dim;
        for (int i = 0; i < 4; ++i) {
            cur = ceil_half(cur);
            w.push_back(cur);
        }
        return w;
    }

    void validate() const {
        if (input_dim < 16) {
            throw config_error{ "baseline: input_dim must be at least 16, got " + std::to_string(input_dim) };
        }
    }
};

/**
 * Five linear layers: four (Linear -> LeakyReLU -> Dropout) blocks that halve
 * the width, then a Linear to one logit.
 */
class baseline_model {
  public:
    baseline_model(const baseline_config &cfg, std::uint64_t seed) :
        cfg_{ cfg },
        seed_{ seed },
        dropout_rng_{ seed ^ 0x9e3779b97f4a7c15ULL } {
        cfg_.validate();
        rng init{ seed };
        std::size_t in = cfg_.input_dim;
        for (const auto w : cfg_.hidden_widths()) {
            linears_.emplace_back(in, w, "linear" + std::to_string(linears_.size()));
            acts_.emplace_back(cfg_.leaky_slope);
            drops_.emplace_back(cfg_.dropout);
            in = w;
        }
        linears_.emplace_back(in, 1, "linear" + std::to_string(linears_.size()));
        for (auto &l : linears_) {
            l.init(init);
        }
    }

    [[nodiscard]] const baseline_config &config() const noexcept { return cfg_; }

    [[nodiscard]] std::size_t linear_count() const noexcept { return linears_.size(); }

    [[nodiscard]] std::vector<std::size_t> layer_widths() const {
        std::vector<std::size_t> w;
        for (const auto &l : linears_) {
            w.push_back(l.out_features());
        }
        return w;
    }

    /// x[batch, input_dim] -> logits[batch, 1]
    tensor forward(const tensor &x, mode m) {
        tensor cur = x;
        for (std::size_t i = 0; i < acts_.size(); ++i) {
            cur = linears_[i].forward(cur);
            cur = acts_[i].forward(cur);
            cur = drops_[i].forward(cur, m, dropout_rng_);
        }
        return linears_.back().forward(cur);
    }

    void backward(const tensor &dlogits) {
        tensor cur = linears_.back().backward(dlogits);
        for (std::size_t i = acts_.size(); i-- > 0;) {
            cur = drops_[i].backward(cur);
            cur = acts_[i].backward(cur);
            cur = linears_[i].backward(cur);
        }
    }

    /// Forward, BCE-with-logits, backward and one AdamW update; returns the batch loss.
    double train_step(const tensor &x, const std::vector<double> &labels, const adamw_params &opt) {
        const auto params = parameters();
        zero_grads(params);
        const tensor logits = forward(x, mode::train);
        std::vector<double> dz;
        const double loss = bce_with_logits_batch(logits.raw(), labels, dz);
        ++steps_;
        if (!std::isfinite(loss)) {
            throw training_error{ "non-finite loss at step " + std::to_string(steps_) + " (max |grad| " + format_double(max_abs_grad(params)) + ")" };
        }
        backward(tensor{ { dz.size(), 1 }, dz });
        adamw_step(params, opt);
        return loss;
    }

    parameter_list parameters() {
        parameter_list out;
        for (auto &l : linears_) {
            for (auto *p : l.parameters()) {
                out.push_back(p);
            }
        }
        return out;
    }

    [[nodiscard]] std::map<std::string, std::string> header() const {
        std::ostringstream layers;
        std::size_t in = cfg_.input_dim;
        for (std::size_t i = 0; i < linears_.size(); ++i) {
            const std::size_t out = linears_[i].out_features();
            layers << (i ? "," : "") << "linear(" << in << "->" << out << ")";
            if (i + 1 < linears_.size()) {
                layers << ",leaky_relu(" << cfg_.leaky_slope << "),dropout(" << cfg_.dropout << ")";
            }
            in = out;
        }
        return { { "kind", "baseline" }, { "seed", std::to_string(seed_) }, { "input_dim", std::to_string(cfg_.input_dim) }, { "dropout", format_double(cfg_.dropout) }, { "leaky_slope", format_double(cfg_.leaky_slope) }, { "layers", layers.str() } };
    }

    [[nodiscard]] std::string checkpoint_bytes() { return encode_checkpoint(header(), parameters()); }

    void load(const checkpoint &ck) {
        if (ck.header.count("kind") == 0 || ck.header.at("kind") != "baseline") {
            throw format_error{ "checkpoint is not a baseline model" };
        }
        load_parameters(ck, parameters());
    }

  private:
    baseline_config cfg_;
    std::uint64_t seed_;
    rng dropout_rng_;
    std::vector<linear> linears_;
    std::vector<leaky_relu> acts_;
    std::vector<dropout> drops_;
    std::uint64_t steps_ = 0;
};

struct fusion_config {
    std::size_t audio_embed_dim = 0;
    std::size_t text_embed_dim = 0;
    std::size_t handcrafted_dim = 0;
    std::size_t bilstm_hidden = 128;
    std::size_t bilstm_layers = 2;
    std::size_t heads = 2;
    double dropout = 0.2;
    double leaky_slope = 0.01;

    [[nodiscard]] std::size_t branch_dim() const { return 2 * bilstm_hidden; }

    [[nodiscard]] std::size_t concat_dim() const { return 2 * branch_dim() + handcrafted_dim; }

    [[nodiscard]] std::size_t head_hidden() const { return ceil_half(concat_dim()); }

    void validate() const {
        if (audio_embed_dim == 0 || text_embed_dim == 0 || handcrafted_dim == 0 || bilstm_hidden == 0 || bilstm_layers == 0 || heads == 0) {
            throw config_error{ "fusion: all dimensions must be positive" };
        }
        if (branch_dim() % heads != 0) {
            throw config_error{ "fusion: 2 * bilstm_hidden must be divisible by the head count" };
        }
    }
};

/// One sample for the fusion model. Empty masks mean every row is valid.
struct fusion_input {
    tensor audio;  // [frames, audio_embed_dim]
    tensor text;   // [tokens, text_embed_dim]
    std::vector<bool> audio_mask;
    std::vector<bool> text_mask;
    std::vector<double> handcrafted;
};

/// biLSTM -> multi-head attention -> masked mean pool.
class sequence_branch {
  public:
    sequence_branch() = default;

    sequence_branch(std::size_t in, const fusion_config &cfg, const std::string &name) :
        lstm_{ in, cfg.bilstm_hidden, cfg.bilstm_layers, name + ".bilstm" },
        attn_{ attention_config{ cfg.branch_dim(), cfg.heads }, name + ".mha" } {}

    void init(rng &r) {
        lstm_.init(r);
        attn_.init(r);
    }

    tensor forward(const tensor &x, const std::vector<bool> &mask) {
        mask_ = mask;
        seq_ = x.rows();
        const tensor h = lstm_.forward(x);
        const tensor a = attn_.forward(h, mask);
        return mean_pool(a, mask);
    }

    tensor backward(const tensor &dpooled) {
        const tensor da = mean_pool_backward(dpooled, seq_, mask_);
        const tensor dh = attn_.backward(da);
        return lstm_.backward(dh);
    }

    parameter_list parameters() {
        auto out = lstm_.parameters();
        for (auto *p : attn_.parameters()) {
            out.push_back(p);
        }
        return out;
    }

  private:
    bilstm lstm_;
    multi_head_attention attn_;
    std::vector<bool> mask_;
    std::size_t seq_ = 0;
};

/**
 * Audio branch (R1) and text branch (R2) pooled to fixed vectors, concatenated
 * with the hand-crafted vector (R3), then Linear -> LeakyReLU -> Dropout ->
 * Linear to one logit.
 *
 * Samples are processed one at a time; train_step accumulates gradients over
 * the batch in index order before a single optimizer update.
 */
class fusion_model {
  public:
    fusion_model(const fusion_config &cfg, std::uint64_t seed) :
        cfg_{ cfg },
        seed_{ seed },
        dropout_rng_{ seed ^ 0x9e3779b97f4a7c15ULL } {
        cfg_.validate();
        audio_ = sequence_branch{ cfg_.audio_embed_dim, cfg_, "audio" };
        text_ = sequence_branch{ cfg_.text_embed_dim, cfg_, "text" };
        head1_ = linear{ cfg_.concat_dim(), cfg_.head_hidden(), "head0" };
        head2_ = linear{ cfg_.head_hidden(), 1, "head1" };
        act_ = leaky_relu{ cfg_.leaky_slope };
        drop_ = dropout{ cfg_.dropout };
        rng init{ seed };
        audio_.init(init);
        text_.init(init);
        head1_.init(init);
        head2_.init(init);
    }

    [[nodiscard]] const fusion_config &config() const noexcept { return cfg_; }

    void validate_input(const fusion_input &s) const {
        if (s.audio.rank() != 2 || s.audio.rows() == 0) {
            throw shape_error{ "fusion: audio embedding sequence is empty" };
        }
        if (s.text.rank() != 2 || s.text.rows() == 0) {
            throw shape_error{ "fusion: text embedding sequence is empty" };
        }
        if (s.audio.cols() != cfg_.audio_embed_dim || s.text.cols() != cfg_.text_embed_dim) {
            throw shape_error{ "fusion: embedding widths " + std::to_string(s.audio.cols()) + "/" + std::to_string(s.text.cols()) + " do not match model " + std::to_string(cfg_.audio_embed_dim) + "/" + std::to_string(cfg_.text_embed_dim) };
        }
        if (s.handcrafted.size() != cfg_.handcrafted_dim) {
            throw shape_error{ "fusion: hand-crafted vector has " + std::to_string(s.handcrafted.size()) + " values, model expects " + std::to_string(cfg_.handcrafted_dim) };
        }
    }

    /// Pooled audio, pooled text and hand-crafted values, in that order.
    tensor fused_representation(const fusion_input &s) {
        validate_input(s);
        const tensor r1 = audio_.forward(s.audio, s.audio_mask);
        const tensor r2 = text_.forward(s.text, s.text_mask);
        tensor z = tensor::matrix(1, cfg_.concat_dim());
        std::size_t k = 0;
        for (const double v : r1.raw()) {
            z[k++] = v;
        }
        for (const double v : r2.raw()) {
            z[k++] = v;
        }
        for (const double v : s.handcrafted) {
            z[k++] = v;
        }
        return z;
    }

    double forward(const fusion_input &s, mode m) {
        const tensor z = fused_representation(s);
        tensor h = head1_.forward(z);
        h = act_.forward(h);
        h = drop_.forward(h, m, dropout_rng_);
        return head2_.forward(h)[0];
    }

    void backward(double dlogit) {
        tensor d = head2_.backward(tensor{ { 1, 1 }, { dlogit } });
        d = drop_.backward(d);
        d = act_.backward(d);
        d = head1_.backward(d);
        const std::size_t b = cfg_.branch_dim();
        tensor d1 = tensor::vector(b);
        tensor d2 = tensor::vector(b);
        for (std::size_t i = 0; i < b; ++i) {
            d1[i] = d[i];
            d2[i] = d[b + i];
        }
        audio_.backward(d1);
        text_.backward(d2);
    }

    std::vector<double> predict(const std::vector<const fusion_input *> &batch) {
        std::vector<double> out;
        out.reserve(batch.size());
        for (const auto *s : batch) {
            out.push_back(forward(*s, mode::eval));
        }
        return out;
    }

    double train_step(const std::vector<const fusion_input *> &batch, const std::vector<double> &labels, const adamw_params &opt) {
        if (batch.size() != labels.size() || batch.empty()) {
            throw shape_error{ "fusion: batch/labels length mismatch" };
        }
        const auto params = parameters();
        zero_grads(params);
        const auto n = static_cast<double>(batch.size());
        double loss = 0.0;
        for (std::size_t i = 0; i < batch.size(); ++i) {
            const double z = forward(*batch[i], mode::train);
            loss += bce_with_logits(z, labels[i]);
            backward(bce_with_logits_grad(z, labels[i]) / n);
        }
        loss /= n;
        ++steps_;
        if (!std::isfinite(loss)) {
            throw training_error{ "non-finite loss at step " + std::to_string(steps_) + " (max |grad| " + format_double(max_abs_grad(params)) + ")" };
        }
        adamw_step(params, opt);
        return loss;
    }

    parameter_list parameters() {
        parameter_list out = audio_.parameters();
        for (auto *p : text_.parameters()) {
            out.push_back(p);
        }
        for (auto *p : head1_.parameters()) {
            out.push_back(p);
        }
        for (auto *p : head2_.parameters()) {
            out.push_back(p);
        }
        return out;
    }

    [[nodiscard]] std::map<std::string, std::string> header() const {
        std::ostringstream layers;
        layers << "audio:bilstm(" << cfg_.audio_embed_dim << "->" << cfg_.branch_dim() << "x" << cfg_.bilstm_layers << "),mha(" << cfg_.branch_dim() << "," << cfg_.heads << "),mean_pool;"
               << "text:bilstm(" << cfg_.text_embed_dim << "->" << cfg_.branch_dim() << "x" << cfg_.bilstm_layers << "),mha(" << cfg_.branch_dim() << "," << cfg_.heads << "),mean_pool;"
               << "head:linear(" << cfg_.concat_dim() << "->" << cfg_.head_hidden() << "),leaky_relu(" << cfg_.leaky_slope << "),dropout(" << cfg_.dropout << "),linear(" << cfg_.head_hidden() << "->1)";
        return {
            { "kind", "fusion" },
            { "seed", std::to_string(seed_) },
            { "audio_embed_dim", std::to_string(cfg_.audio_embed_dim) },
            { "text_embed_dim", std::to_string(cfg_.text_embed_dim) },
            { "handcrafted_dim", std::to_string(cfg_.handcrafted_dim) },
            { "bilstm_hidden", std::to_string(cfg_.bilstm_hidden) },
            { "bilstm_layers", std::to_string(cfg_.bilstm_layers) },
            { "heads", std::to_string(cfg_.heads) },
            { "dropout", format_double(cfg_.dropout) },
            { "leaky_slope", format_double(cfg_.leaky_slope) },
            { "layers", layers.str() },
        };
    }

    [[nodiscard]] std::string checkpoint_bytes() { return encode_checkpoint(header(), parameters()); }

    void load(const checkpoint &ck) {
        if (ck.header.count("kind") == 0 || ck.header.at("kind") != "fusion") {
            throw format_error{ "checkpoint is not a fusion model" };
        }
        load_parameters(ck, parameters());
    }

  private:
    fusion_config cfg_;
    std::uint64_t seed_;
    rng dropout_rng_;
    sequence_branch audio_;
    sequence_branch text_;
    linear head1_;
    leaky_relu act_;
    dropout drop_;
    linear head2_;
    std::uint64_t steps_ = 0;
};

}  // namespace speechbio::nn
