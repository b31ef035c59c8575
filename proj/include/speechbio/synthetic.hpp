#pragma once

// Seeded synthetic cohorts with a controllable amount of label signal.

#include "speechbio/audio.hpp"
#include "speechbio/dataset.hpp"
#include "speechbio/embedding_io.hpp"
#include "speechbio/features.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace speechbio {

struct synthetic_params {
    std::size_t subjects = 200;
    std::size_t samples_per_subject = 2;
    double depression_rate = 0.253;
    double anxiety_rate = 0.128;
    double signal_strength = 3.0;   // mean shift, in feature standard deviations
    std::size_t signal_features = 16;
    std::uint64_t seed = 0;

    bool embeddings = true;
    double embedding_signal = 1.0;  // mean shift on the embedding signal dims
    std::size_t embedding_signal_dims = 4;
    std::size_t audio_dim = 16;
    std::size_t text_dim = 16;
    std::size_t audio_frames_min = 12;
    std::size_t audio_frames_max = 24;
    std::size_t text_rows = 24;      // padded length
    std::size_t text_valid_min = 8;

    bool media = false;  // also write WAV and transcript files

    static synthetic_params from_config(const config &c) {
        synthetic_params p;
        p.subjects = static_cast<std::size_t>(c.get_int("synth_subjects", static_cast<long long>(p.subjects)));
        p.samples_per_subject = static_cast<std::size_t>(c.get_int("synth_samples_per_subject", static_cast<long long>(p.samples_per_subject)));
        p.depression_rate = c.get_double("synth_depression_rate", p.depression_rate);
        p.anxiety_rate = c.get_double("synth_anxiety_rate", p.anxiety_rate);
        p.signal_strength = c.get_double("synth_signal", p.signal_strength);
        p.signal_features = static_cast<std::size_t>(c.get_int("synth_signal_features", static_cast<long long>(p.signal_features)));
        p.embedding_signal = c.get_double("synth_embedding_signal", p.embedding_signal);
        p.embedding_signal_dims = static_cast<std::size_t>(c.get_int("synth_embedding_signal_dims", static_cast<long long>(p.embedding_signal_dims)));
        p.audio_dim = static_cast<std::size_t>(c.get_int("synth_audio_dim", static_cast<long long>(p.audio_dim)));
        p.text_dim = static_cast<std::size_t>(c.get_int("synth_text_dim", static_cast<long long>(p.text_dim)));
        p.audio_frames_min = static_cast<std::size_t>(c.get_int("synth_audio_frames_min", static_cast<long long>(p.audio_frames_min)));
        p.audio_frames_max = static_cast<std::size_t>(c.get_int("synth_audio_frames_max", static_cast<long long>(p.audio_frames_max)));
        p.text_rows = static_cast<std::size_t>(c.get_int("synth_text_rows", static_cast<long long>(p.text_rows)));
        p.text_valid_min = static_cast<std::size_t>(c.get_int("synth_text_valid_min", static_cast<long long>(p.text_valid_min)));
        return p;
    }

    void validate() const {
        if (subjects == 0 || samples_per_subject == 0) {
            throw config_error{ "synth: subjects and samples per subject must be positive" };
        }
        for (const double r : { depression_rate, anxiety_rate }) {
            if (!(r > 0.0 && r < 1.0)) {
                throw config_error{ "synth: positive rates must lie in (0, 1)" };
            }
        }
        if (signal_strength < 0.0 || embedding_signal < 0.0) {
            throw config_error{ "synth: signal strengths must be non-negative" };
        }
        if (2 * signal_features > handcrafted_feature_names().size()) {
            throw config_error{ "synth: too many signal features" };
        }
        if (embeddings && (embedding_signal_dims > std::min(audio_dim, text_dim) || audio_frames_min == 0 || audio_frames_min > audio_frames_max || text_valid_min == 0 || text_valid_min > text_rows)) {
            throw config_error{ "synth: inconsistent embedding shape settings" };
        }
    }
};

struct synthetic_dataset {
    std::vector<sample_record> records;
    feature_table features;
    std::vector<embedding_entry> embedding_entries;  // paths relative to the embeddings dir
    std::vector<embedding_sequence> embedding_data;  // parallel to embedding_entries
};

/// Subject i is positive iff i's position in a seeded permutation is below round(rate * n).
inline std::vector<int> synthetic_labels(std::size_t n, double rate, rng &r) {
    const auto positives = static_cast<std::size_t>(std::llround(rate * static_cast<double>(n)));
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) {
        order[i] = i;
    }
    r.shuffle(order);
    std::vector<int> label(n, 0);
    for (std::size_t i = 0; i < positives; ++i) {
        label[order[i]] = 1;
    }
    return label;
}

/**
 * Hand-crafted columns are offset + scale * N(0, 1) per sample. Positive
 * samples shift `signal_features` columns by `signal_strength` standard
 * deviations: the first block for depression, a disjoint second block for
 * anxiety. Embedding rows are N(0, 1) with a label shift of `embedding_signal`
 * on their first `embedding_signal_dims` dims, for the disease named by
 * `signal_disease`.
 */
inline synthetic_dataset make_synthetic_dataset(const synthetic_params &p, disease signal_disease = disease::depression) {
    p.validate();
    rng r{ p.seed };
    const auto dep = synthetic_labels(p.subjects, p.depression_rate, r);
    const auto anx = synthetic_labels(p.subjects, p.anxiety_rate, r);
    const auto &names = handcrafted_feature_names();
    const std::size_t d = names.size();

    // Spread the signal columns over the vector: depression on even strides, anxiety offset by one.
    const std::size_t stride = d / (2 * p.signal_features == 0 ? 1 : 2 * p.signal_features);
    std::vector<std::size_t> dep_cols;
    std::vector<std::size_t> anx_cols;
    for (std::size_t i = 0; i < p.signal_features; ++i) {
        dep_cols.push_back(2 * i * stride);
        anx_cols.push_back(2 * i * stride + stride);
    }

    synthetic_dataset out;
    out.features.names = names;
    const auto tasks = std::vector<task_type>{ task_type::journaling, task_type::prompted_narrative, task_type::semantic_fluency };
    char buf[64];
    for (std::size_t s = 0; s < p.subjects; ++s) {
        std::snprintf(buf, sizeof buf, "p%04zu", s + 1);
        const std::string subject = buf;
        for (std::size_t k = 0; k < p.samples_per_subject; ++k) {
            std::snprintf(buf, sizeof buf, "%s_s%02zu", subject.c_str(), k + 1);
            sample_record rec;
            rec.sample_id = buf;
            rec.subject_id = subject;
            rec.audio_path = "media/" + rec.sample_id + ".wav";
            rec.transcript_path = "media/" + rec.sample_id + ".txt";
            rec.phq8 = dep[s] != 0 ? diagnosis_cutoff + static_cast<int>(r.below(phq8_max - diagnosis_cutoff + 1)) : static_cast<int>(r.below(diagnosis_cutoff));
            rec.gad7 = anx[s] != 0 ? diagnosis_cutoff + static_cast<int>(r.below(gad7_max - diagnosis_cutoff + 1)) : static_cast<int>(r.below(diagnosis_cutoff));
            rec.task = tasks[k % tasks.size()];

            std::vector<double> z(d);
            for (auto &v : z) {
                v = r.normal();
            }
            if (dep[s] != 0) {
                for (const auto c : dep_cols) {
                    z[c] += p.signal_strength;
                }
            }
            if (anx[s] != 0) {
                for (const auto c : anx_cols) {
                    z[c] += p.signal_strength;
                }
            }
            std::vector<double> x(d);
            for (std::size_t j = 0; j < d; ++j) {
                const double offset = static_cast<double>(j % 7) - 3.0;
                const double scale = 0.5 + static_cast<double>(j % 5);
                x[j] = offset + scale * z[j];
            }
            out.features.rows.emplace(rec.sample_id, std::move(x));

            if (p.embeddings) {
                const int label = signal_disease == disease::depression ? dep[s] : anx[s];
                auto make = [&](embedding_source src, std::size_t rows, std::size_t valid, std::size_t dim) {
                    embedding_sequence e;
                    e.source = src;
                    e.rows = rows;
                    e.dim = dim;
                    e.values.resize(rows * dim);
                    for (std::size_t t = 0; t < rows; ++t) {
                        for (std::size_t j = 0; j < dim; ++j) {
                            double v = r.normal();
                            if (label != 0 && t < valid && j < p.embedding_signal_dims) {
                                v += p.embedding_signal;
                            }
                            e.values[t * dim + j] = static_cast<float>(v);
                        }
                    }
                    embedding_entry entry;
                    entry.sample_id = rec.sample_id;
                    entry.source = src;
                    entry.path = std::string{ to_string(src) } + "/" + rec.sample_id + ".sbem";
                    entry.rows = rows;
                    entry.dim = dim;
                    entry.valid = valid;
                    out.embedding_entries.push_back(entry);
                    out.embedding_data.push_back(std::move(e));
                };
                const std::size_t frames = p.audio_frames_min + static_cast<std::size_t>(r.below(p.audio_frames_max - p.audio_frames_min + 1));
                make(embedding_source::audio, frames, frames, p.audio_dim);
                const std::size_t valid = p.text_valid_min + static_cast<std::size_t>(r.below(p.text_rows - p.text_valid_min + 1));
                make(embedding_source::text, p.text_rows, valid, p.text_dim);
            }
            out.records.push_back(std::move(rec));
        }
    }
    return out;
}

namespace detail {

/// Short voiced/paused recording; more and longer pauses for positive labels.
inline audio_buffer synthetic_recording(int label, rng &r) {
    audio_buffer b;
    b.sample_rate = canonical_rate;
    const double f0 = 110.0 + 60.0 * r.uniform();
    const double pi = 3.14159265358979323846;
    double phase = 0.0;
    for (int burst = 0; burst < 3; ++burst) {
        const auto voiced = static_cast<std::size_t>((1.0 + r.uniform()) * canonical_rate);
        for (std::size_t n = 0; n < voiced; ++n) {
            phase += 2.0 * pi * f0 / canonical_rate;
            b.samples.push_back(0.3 * std::sin(phase) + 0.15 * std::sin(2.0 * phase) + 0.002 * r.normal());
        }
        const double gap = label != 0 ? 0.8 + 1.5 * r.uniform() : 0.3 + 0.4 * r.uniform();
        b.samples.insert(b.samples.end(), static_cast<std::size_t>(gap * canonical_rate), 0.0);
    }
    return b;
}

inline std::string synthetic_transcript(int label, rng &r) {
    static const std::vector<std::string> words{ "i", "went", "to", "the", "park", "with", "my", "dog", "and", "we", "walked", "along", "river", "it", "was", "sunny", "because", "she", "likes", "water", "then", "came", "home", "made", "dinner" };
    static const std::vector<std::string> fillers{ "um", "uh", "er" };
    std::string text;
    for (int u = 0; u < 4; ++u) {
        const std::size_t len = 5 + static_cast<std::size_t>(r.below(6));
        for (std::size_t w = 0; w < len; ++w) {
            if (label != 0 && r.bernoulli(0.2)) {
                text += fillers[r.below(fillers.size())] + " ";
            }
            text += words[r.below(words.size())];
            text += w + 1 == len ? ". " : " ";
        }
    }
    return text + "\n";
}

}  // namespace detail

/**
 * Writes manifest.csv, features.csv and (when enabled) embeddings/index.csv
 * plus one SBEM file per sample and source, and media/ WAV + transcripts.
 */
inline void write_synthetic_dataset(const std::string &dir, const synthetic_dataset &ds, const synthetic_params &p) {
    namespace fs = std::filesystem;
    const fs::path base{ dir };
    fs::create_directories(base);
    write_manifest((base / "manifest.csv").string(), ds.records);
    std::vector<std::string> order;
    for (const auto &rec : ds.records) {
        order.push_back(rec.sample_id);
    }
    write_features((base / "features.csv").string(), ds.features, order);
    if (!ds.embedding_entries.empty()) {
        const fs::path edir = base / "embeddings";
        fs::create_directories(edir / "audio");
        fs::create_directories(edir / "text");
        for (std::size_t i = 0; i < ds.embedding_entries.size(); ++i) {
            write_embedding((edir / ds.embedding_entries[i].path).string(), ds.embedding_data[i]);
        }
        write_embedding_index(edir.string(), ds.embedding_entries);
    }
    if (p.media) {
        fs::create_directories(base / "media");
        rng r{ p.seed ^ 0x6d65646961ULL };
        for (const auto &rec : ds.records) {
            const int label = binarize(rec.phq8);
            write_wav((base / rec.audio_path).string(), detail::synthetic_recording(label, r));
            std::ofstream t{ (base / rec.transcript_path).string() };
            t << detail::synthetic_transcript(label, r);
        }
    }
}

}  // namespace speechbio
