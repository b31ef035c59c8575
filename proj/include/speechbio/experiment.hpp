#pragma once

// Cross-validated training and evaluation runs.

#include "speechbio/dataset.hpp"
#include "speechbio/embedding_io.hpp"
#include "speechbio/features.hpp"
#include "speechbio/metrics.hpp"
#include "speechbio/models.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace speechbio {

enum class model_kind { baseline, fusion };

inline const char *to_string(model_kind m) { return m == model_kind::baseline ? "baseline" : "fusion"; }

inline model_kind parse_model_kind(const std::string &s) {
    if (s == "baseline") {
        return model_kind::baseline;
    }
    if (s == "fusion") {
        return model_kind::fusion;
    }
    throw config_error{ "model must be baseline or fusion, got '" + s + "'" };
}

struct train_params {
    std::size_t baseline_epochs = 10;
    double baseline_lr = 3e-4;
    std::size_t baseline_batch = 8;
    std::size_t fusion_epochs = 10;
    double fusion_lr = 3e-5;
    std::size_t fusion_batch = 4;
    double weight_decay = 0.01;
    double dropout = 0.2;
    double leaky_slope = 0.01;
    std::size_t bilstm_hidden = 128;
    std::size_t bilstm_layers = 2;
    std::size_t attention_heads = 2;
    double threshold = 0.5;
    bool standardize = true;

    static train_params from_config(const config &c) {
        train_params p;
        auto size = [&c](const char *key, std::size_t def) {
            const long long v = c.get_int(key, static_cast<long long>(def));
            if (v <= 0) {
                throw config_error{ std::string{ key } + " must be positive" };
            }
            return static_cast<std::size_t>(v);
        };
        p.baseline_epochs = size("baseline_epochs", p.baseline_epochs);
        p.baseline_lr = c.get_double("baseline_lr", p.baseline_lr);
        p.baseline_batch = size("baseline_batch_size", p.baseline_batch);
        p.fusion_epochs = size("fusion_epochs", p.fusion_epochs);
        p.fusion_lr = c.get_double("fusion_lr", p.fusion_lr);
        p.fusion_batch = size("fusion_batch_size", p.fusion_batch);
        p.weight_decay = c.get_double("weight_decay", p.weight_decay);
        p.dropout = c.get_double("dropout", p.dropout);
        p.leaky_slope = c.get_double("leaky_slope", p.leaky_slope);
        p.bilstm_hidden = size("bilstm_hidden", p.bilstm_hidden);
        p.bilstm_layers = size("bilstm_layers", p.bilstm_layers);
        p.attention_heads = size("attention_heads", p.attention_heads);
        p.threshold = c.get_double("threshold", p.threshold);
        p.standardize = c.get_int("standardize", p.standardize ? 1 : 0) != 0;
        return p;
    }
};

struct prediction {
    std::string sample_id;
    int fold = 0;
    double logit = 0.0;
    double probability = 0.0;
    int label = 0;
    int pred = 0;
};

struct run_result {
    metrics_report report;
    std::vector<prediction> predictions;  // fold-major, test order within a fold
    std::vector<std::string> checkpoints; // one per fold
};

struct run_inputs {
    const std::vector<sample_record> *records = nullptr;
    const feature_table *features = nullptr;
    const embedding_index *embeddings = nullptr;  // required for fusion
    const fold_plan *plan = nullptr;
};

namespace detail {

/// Per-fold seed, so folds are independent of each other's consumption.
inline std::uint64_t fold_seed(std::uint64_t seed, int fold) { return seed * 0x100000001b3ULL + static_cast<std::uint64_t>(fold) * 0x9e3779b97f4a7c15ULL + 1; }

inline void check_inputs(const run_inputs &in, model_kind kind) {
    if (in.records == nullptr || in.features == nullptr || in.plan == nullptr) {
        throw error{ "train_eval: manifest, features and fold plan are required" };
    }
    if (kind == model_kind::fusion && in.embeddings == nullptr) {
        throw error{ "train_eval: the fusion model needs an embeddings directory" };
    }
    std::vector<std::string> missing;
    for (const auto &r : *in.records) {
        const auto *row = in.features->find(r.sample_id);
        bool ok = row != nullptr && row->size() == in.features->names.size();
        if (kind == model_kind::fusion) {
            ok = ok && in.embeddings->find(r.sample_id, embedding_source::audio) != nullptr && in.embeddings->find(r.sample_id, embedding_source::text) != nullptr;
        }
        if (!ok) {
            missing.push_back(r.sample_id);
        }
        if (in.plan->assignment.count(r.subject_id) == 0) {
            throw error{ "fold plan does not cover subject " + r.subject_id };
        }
    }
    if (!missing.empty()) {
        std::string list;
        for (std::size_t i = 0; i < missing.size(); ++i) {
            list += (i == 0 ? "" : ", ") + missing[i];
        }
        throw error{ std::string{ "missing " } + (kind == model_kind::fusion ? "features or embeddings" : "features") + " for " + std::to_string(missing.size()) + " sample(s): " + list };
    }
}

inline std::vector<std::vector<std::size_t>> batches(std::vector<std::size_t> order, std::size_t batch, rng &r) {
    r.shuffle(order);
    std::vector<std::vector<std::size_t>> out;
    for (std::size_t i = 0; i < order.size(); i += batch) {
        out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(i), order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), i + batch)));
    }
    return out;
}

}  // namespace detail

/**
 * Trains one model per fold on the other folds and scores the held-out fold.
 * Hand-crafted features are z-scored with statistics of the training folds.
 */
inline run_result train_eval(const run_inputs &in, disease dis, model_kind kind, const train_params &tp, std::uint64_t seed, std::ostream *log = nullptr) {
    detail::check_inputs(in, kind);
    const auto &records = *in.records;
    const auto &plan = *in.plan;
    const std::size_t dim = in.features->names.size();

    std::vector<int> labels(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        labels[i] = binarize(records[i].score(dis));
    }

    std::vector<nn::tensor> audio;
    std::vector<nn::tensor> text;
    if (kind == model_kind::fusion) {
        for (const auto &r : records) {
            audio.push_back(load_sequence(*in.embeddings->find(r.sample_id, embedding_source::audio)));
            text.push_back(load_sequence(*in.embeddings->find(r.sample_id, embedding_source::text)));
        }
        for (std::size_t i = 1; i < records.size(); ++i) {
            if (audio[i].cols() != audio[0].cols() || text[i].cols() != text[0].cols()) {
                throw format_error{ "embedding width differs for sample " + records[i].sample_id };
            }
        }
    }

    run_result result;
    result.report.disease = to_string(dis);
    result.report.model_kind = to_string(kind);
    for (int fold = 0; fold < plan.k; ++fold) {
        const auto train_idx = plan.train_indices(records, fold);
        const auto test_idx = plan.test_indices(records, fold);
        if (train_idx.empty() || test_idx.empty()) {
            throw error{ "fold " + std::to_string(fold) + " has an empty train or test split" };
        }
        std::vector<const std::vector<double> *> train_rows;
        for (const auto i : train_idx) {
            train_rows.push_back(in.features->find(records[i].sample_id));
        }
        const standardizer z = tp.standardize ? standardizer{ train_rows } : standardizer{};
        auto features_of = [&](std::size_t i) {
            const auto &raw = *in.features->find(records[i].sample_id);
            return tp.standardize ? z.apply(raw) : raw;
        };

        const std::uint64_t fs = detail::fold_seed(seed, fold);
        rng order_rng{ fs ^ 0x5bd1e995ULL };
        std::vector<double> logits;
        if (kind == model_kind::baseline) {
            nn::baseline_config cfg;
            cfg.input_dim = dim;
            cfg.dropout = tp.dropout;
            cfg.leaky_slope = tp.leaky_slope;
            nn::baseline_model model{ cfg, fs };
            const nn::adamw_params opt{ tp.baseline_lr, 0.9, 0.999, 1e-8, tp.weight_decay };
            for (std::size_t epoch = 0; epoch < tp.baseline_epochs; ++epoch) {
                for (const auto &b : detail::batches(train_idx, tp.baseline_batch, order_rng)) {
                    nn::tensor x = nn::tensor::matrix(b.size(), dim);
                    std::vector<double> y;
                    for (std::size_t r = 0; r < b.size(); ++r) {
                        const auto f = features_of(b[r]);
                        std::copy(f.begin(), f.end(), x.row(r).begin());
                        y.push_back(labels[b[r]]);
                    }
                    model.train_step(x, y, opt);
                }
            }
            nn::tensor x = nn::tensor::matrix(test_idx.size(), dim);
            for (std::size_t r = 0; r < test_idx.size(); ++r) {
                const auto f = features_of(test_idx[r]);
                std::copy(f.begin(), f.end(), x.row(r).begin());
            }
            logits = model.forward(x, nn::mode::eval).raw();
            result.checkpoints.push_back(model.checkpoint_bytes());
        } else {
            nn::fusion_config cfg;
            cfg.audio_embed_dim = audio[0].cols();
            cfg.text_embed_dim = text[0].cols();
            cfg.handcrafted_dim = dim;
            cfg.bilstm_hidden = tp.bilstm_hidden;
            cfg.bilstm_layers = tp.bilstm_layers;
            cfg.heads = tp.attention_heads;
            cfg.dropout = tp.dropout;
            cfg.leaky_slope = tp.leaky_slope;
            nn::fusion_model model{ cfg, fs };
            std::vector<nn::fusion_input> inputs(records.size());
            auto input_of = [&](std::size_t i) -> const nn::fusion_input * {
                auto &s = inputs[i];
                if (s.handcrafted.empty()) {
                    s.audio = audio[i];
                    s.text = text[i];
                    s.handcrafted = features_of(i);
                }
                return &s;
            };
            const nn::adamw_params opt{ tp.fusion_lr, 0.9, 0.999, 1e-8, tp.weight_decay };
            for (std::size_t epoch = 0; epoch < tp.fusion_epochs; ++epoch) {
                for (const auto &b : detail::batches(train_idx, tp.fusion_batch, order_rng)) {
                    std::vector<const nn::fusion_input *> batch;
                    std::vector<double> y;
                    for (const auto i : b) {
                        batch.push_back(input_of(i));
                        y.push_back(labels[i]);
                    }
                    model.train_step(batch, y, opt);
                }
            }
            std::vector<const nn::fusion_input *> batch;
            for (const auto i : test_idx) {
                batch.push_back(input_of(i));
            }
            logits = model.predict(batch);
            result.checkpoints.push_back(model.checkpoint_bytes());
        }

        std::vector<int> fold_preds;
        std::vector<int> fold_labels;
        for (std::size_t r = 0; r < test_idx.size(); ++r) {
            prediction p;
            p.sample_id = records[test_idx[r]].sample_id;
            p.fold = fold;
            p.logit = logits[r];
            p.probability = nn::sigmoid(p.logit);
            p.label = labels[test_idx[r]];
            p.pred = p.probability >= tp.threshold ? 1 : 0;
            fold_preds.push_back(p.pred);
            fold_labels.push_back(p.label);
            result.predictions.push_back(p);
        }
        auto m = compute_metrics(fold_preds, fold_labels);
        if (log != nullptr) {
            for (const auto &w : m.warnings) {
                *log << "warning: fold " << fold << ": " << w << "\n";
            }
        }
        result.report.folds.push_back(std::move(m));
    }
    result.report.mean = mean_metrics(result.report.folds);
    return result;
}

inline const char *predictions_header = "sample_id,logit,probability,label,pred";

inline void write_predictions(const std::string &path, const std::vector<prediction> &preds) {
    std::ofstream out{ path };
    if (!out) {
        throw error{ "cannot write " + path };
    }
    out << predictions_header << "\n";
    for (const auto &p : preds) {
        out << p.sample_id << "," << detail::exact(p.logit) << "," << detail::exact(p.probability) << "," << p.label << "," << p.pred << "\n";
    }
}

inline std::vector<prediction> read_predictions(const std::string &path, int fold = 0) {
    const csv_table t = read_csv(path);
    if (join(t.header) != predictions_header) {
        throw parse_error{ path, 1, std::string{ "header must be " } + predictions_header };
    }
    std::vector<prediction> out;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto &f = t.rows[r];
        prediction p;
        p.sample_id = f[0];
        p.fold = fold;
        try {
            p.logit = parse_double(f[1]);
            p.probability = parse_double(f[2]);
            p.label = static_cast<int>(parse_int(f[3]));
            p.pred = static_cast<int>(parse_int(f[4]));
        } catch (const error &e) {
            throw parse_error{ path, t.line_numbers[r], e.what() };
        }
        out.push_back(p);
    }
    return out;
}

inline std::string fold_dir_name(int fold) { return "fold_" + std::to_string(fold); }

/**
 * Run directory layout:
 *   config.txt            effective configuration
 *   plan.json             fold plan used
 *   metrics.json          per-fold and mean metrics
 *   predictions.csv       all held-out predictions
 *   fold_<k>/model.sbck   checkpoint of fold k
 *   fold_<k>/predictions.csv
 */
inline void write_run(const std::string &rundir, const run_result &r, const fold_plan &plan, const config &cfg) {
    namespace fs = std::filesystem;
    const fs::path base{ rundir };
    fs::create_directories(base);
    {
        std::ofstream out{ (base / "config.txt").string() };
        out << cfg.to_string();
    }
    save_fold_plan((base / "plan.json").string(), plan);
    for (int f = 0; f < plan.k; ++f) {
        const fs::path dir = base / fold_dir_name(f);
        fs::create_directories(dir);
        nn::write_file((dir / "model.sbck").string(), r.checkpoints.at(static_cast<std::size_t>(f)));
        std::vector<prediction> fold_preds;
        for (const auto &p : r.predictions) {
            if (p.fold == f) {
                fold_preds.push_back(p);
            }
        }
        write_predictions((dir / "predictions.csv").string(), fold_preds);
    }
    write_predictions((base / "predictions.csv").string(), r.predictions);
    std::ofstream out{ (base / "metrics.json").string() };
    if (!out) {
        throw error{ "cannot write metrics in " + rundir };
    }
    out << r.report.to_json().dump(2) << "\n";
}

inline metrics_report load_report(const std::string &rundir) {
    const std::string path = (std::filesystem::path{ rundir } / "metrics.json").string();
    std::ifstream in{ path };
    if (!in) {
        throw error{ "cannot read " + path };
    }
    try {
        return metrics_report::from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception &e) {
        throw format_error{ path + ": " + e.what() };
    }
}

/// Recomputes per-fold and mean metrics from the saved fold prediction files.
inline metrics_report evaluate_run(const std::string &rundir) {
    namespace fs = std::filesystem;
    const metrics_report stored = load_report(rundir);
    const fold_plan plan = load_fold_plan((fs::path{ rundir } / "plan.json").string());
    metrics_report r;
    r.disease = stored.disease;
    r.model_kind = stored.model_kind;
    for (int f = 0; f < plan.k; ++f) {
        const auto preds = read_predictions((fs::path{ rundir } / fold_dir_name(f) / "predictions.csv").string(), f);
        std::vector<int> p;
        std::vector<int> l;
        for (const auto &x : preds) {
            p.push_back(x.pred);
            l.push_back(x.label);
        }
        r.folds.push_back(compute_metrics(p, l));
    }
    r.mean = mean_metrics(r.folds);
    return r;
}

}  // namespace speechbio
