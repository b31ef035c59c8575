#pragma once

// Sample manifests, diagnosis labels and subject-disjoint folds.

#include "speechbio/csv.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

namespace speechbio {

enum class task_type { journaling, prompted_narrative, semantic_fluency };

inline const char *to_string(task_type t) {
    switch (t) {
    case task_type::journaling:
        return "journaling";
    case task_type::prompted_narrative:
        return "prompted_narrative";
    case task_type::semantic_fluency:
        return "semantic_fluency";
    }
    return "?";
}

inline std::optional<task_type> parse_task_type(const std::string &s) {
    for (const auto t : { task_type::journaling, task_type::prompted_narrative, task_type::semantic_fluency }) {
        if (s == to_string(t)) {
            return t;
        }
    }
    return std::nullopt;
}

enum class disease { depression, anxiety };

inline const char *to_string(disease d) { return d == disease::depression ? "depression" : "anxiety"; }

inline disease parse_disease(const std::string &s) {
    if (s == "depression") {
        return disease::depression;
    }
    if (s == "anxiety") {
        return disease::anxiety;
    }
    throw config_error{ "disease must be depression or anxiety, got '" + s + "'" };
}

inline constexpr int phq8_max = 24;
inline constexpr int gad7_max = 21;
inline constexpr int diagnosis_cutoff = 10;

struct sample_record {
    std::string sample_id;
    std::string subject_id;
    std::string audio_path;       // resolved against the manifest directory
    std::string transcript_path;  // resolved against the manifest directory
    int phq8 = 0;
    int gad7 = 0;
    task_type task = task_type::journaling;

    [[nodiscard]] int score(disease d) const { return d == disease::depression ? phq8 : gad7; }
};

/// 1 (diagnosis) iff score >= cutoff.
inline int binarize(int score, int cutoff = diagnosis_cutoff) { return score >= cutoff ? 1 : 0; }

inline const char *manifest_header = "sample_id,subject_id,audio_path,transcript_path,phq8,gad7,task_type";

inline std::vector<sample_record> load_manifest(const std::string &path) {
    const csv_table t = read_csv(path);
    if (join(t.header) != manifest_header) {
        throw parse_error{ path, 1, std::string{ "header must be exactly " } + manifest_header };
    }
    const std::filesystem::path base = std::filesystem::path{ path }.parent_path();
    auto resolve = [&base](const std::string &p) {
        const std::filesystem::path q{ p };
        return q.is_absolute() || p.empty() ? p : (base / q).string();
    };
    std::vector<sample_record> out;
    std::set<std::string> seen;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto &f = t.rows[r];
        const std::size_t line = t.line_numbers[r];
        sample_record s;
        s.sample_id = f[0];
        s.subject_id = f[1];
        if (s.sample_id.empty() || s.subject_id.empty()) {
            throw parse_error{ path, line, "sample_id and subject_id must be non-empty" };
        }
        if (!seen.insert(s.sample_id).second) {
            throw parse_error{ path, line, "duplicate sample_id " + s.sample_id };
        }
        s.audio_path = resolve(f[2]);
        s.transcript_path = resolve(f[3]);
        auto score = [&](const std::string &text, const char *name, int max) {
            long long v = 0;
            try {
                v = parse_int(text);
            } catch (const error &) {
                throw parse_error{ path, line, std::string{ name } + " is not an integer: '" + text + "'" };
            }
            if (v < 0 || v > max) {
                throw parse_error{ path, line, std::string{ name } + " = " + text + " outside 0-" + std::to_string(max) };
            }
            return static_cast<int>(v);
        };
        s.phq8 = score(f[4], "phq8", phq8_max);
        s.gad7 = score(f[5], "gad7", gad7_max);
        const auto task = parse_task_type(f[6]);
        if (!task) {
            throw parse_error{ path, line, "unknown task_type '" + f[6] + "'" };
        }
        s.task = *task;
        out.push_back(std::move(s));
    }
    if (out.empty()) {
        throw parse_error{ path, 1, "manifest has no samples" };
    }
    return out;
}

/// Writes a manifest; paths are written as given.
inline void write_manifest(const std::string &path, const std::vector<sample_record> &records) {
    std::ofstream out{ path };
    if (!out) {
        throw error{ "cannot write " + path };
    }
    out << manifest_header << "\n";
    for (const auto &r : records) {
        out << r.sample_id << "," << r.subject_id << "," << r.audio_path << "," << r.transcript_path << "," << r.phq8 << "," << r.gad7 << "," << to_string(r.task) << "\n";
    }
}

struct fold_plan {
    int k = 5;
    std::uint64_t seed = 0;
    std::string stratify_by = "depression";
    std::map<std::string, int> assignment;  // subject_id -> fold

    [[nodiscard]] int fold_of(const sample_record &s) const {
        const auto it = assignment.find(s.subject_id);
        if (it == assignment.end()) {
            throw error{ "fold plan has no subject " + s.subject_id };
        }
        return it->second;
    }

    /// Indices into `records` of the held-out (test) samples of fold f.
    [[nodiscard]] std::vector<std::size_t> test_indices(const std::vector<sample_record> &records, int f) const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < records.size(); ++i) {
            if (fold_of(records[i]) == f) {
                out.push_back(i);
            }
        }
        return out;
    }

    [[nodiscard]] std::vector<std::size_t> train_indices(const std::vector<sample_record> &records, int f) const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < records.size(); ++i) {
            if (fold_of(records[i]) != f) {
                out.push_back(i);
            }
        }
        return out;
    }

    [[nodiscard]] nlohmann::json to_json() const {
        nlohmann::json j;
        j["k"] = k;
        j["seed"] = seed;
        j["stratify_by"] = stratify_by;
        j["assignment"] = assignment;
        return j;
    }

    static fold_plan from_json(const nlohmann::json &j) {
        fold_plan p;
        p.k = j.at("k").get<int>();
        p.seed = j.at("seed").get<std::uint64_t>();
        p.stratify_by = j.value("stratify_by", std::string{ "depression" });
        p.assignment = j.at("assignment").get<std::map<std::string, int>>();
        for (const auto &[subject, f] : p.assignment) {
            if (f < 0 || f >= p.k) {
                throw format_error{ "fold plan: subject " + subject + " has fold " + std::to_string(f) };
            }
        }
        return p;
    }
};

inline void save_fold_plan(const std::string &path, const fold_plan &p) {
    std::ofstream out{ path };
    if (!out) {
        throw error{ "cannot write " + path };
    }
    out << p.to_json().dump(2) << "\n";
}

inline fold_plan load_fold_plan(const std::string &path) {
    std::ifstream in{ path };
    if (!in) {
        throw error{ "cannot read " + path };
    }
    try {
        return fold_plan::from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception &e) {
        throw format_error{ path + ": " + e.what() };
    }
}

/**
 * Subject-disjoint stratified folds. A subject is positive iff any of their
 * samples is. Positives and negatives are shuffled separately (from a sorted
 * start, so input order does not matter) and dealt round-robin, negatives
 * continuing where the positives stopped.
 */
inline fold_plan make_folds(const std::vector<sample_record> &records, int k, std::uint64_t seed, disease stratify = disease::depression) {
    if (k < 2) {
        throw config_error{ "make_folds: k must be at least 2" };
    }
    std::map<std::string, int> subject_label;
    for (const auto &r : records) {
        int &l = subject_label[r.subject_id];
        l = std::max(l, binarize(r.score(stratify)));
    }
    if (subject_label.size() < static_cast<std::size_t>(k)) {
        throw config_error{ "make_folds: " + std::to_string(subject_label.size()) + " subjects for " + std::to_string(k) + " folds" };
    }
    std::vector<std::string> pos;
    std::vector<std::string> neg;
    for (const auto &[s, l] : subject_label) {
        (l != 0 ? pos : neg).push_back(s);
    }
    rng r{ seed };
    r.shuffle(pos);
    r.shuffle(neg);
    fold_plan p;
    p.k = k;
    p.seed = seed;
    p.stratify_by = to_string(stratify);
    std::size_t slot = 0;
    for (const auto *group : { &pos, &neg }) {
        for (const auto &s : *group) {
            p.assignment[s] = static_cast<int>(slot % static_cast<std::size_t>(k));
            ++slot;
        }
    }
    return p;
}

}  // namespace speechbio
