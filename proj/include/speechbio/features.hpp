#pragma once

// Hand-crafted feature vectors: acoustic columns followed by linguistic ones.

#include "speechbio/acoustic.hpp"
#include "speechbio/csv.hpp"
#include "speechbio/dataset.hpp"
#include "speechbio/linguistic.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace speechbio {

inline const std::vector<std::string> &handcrafted_feature_names() {
    static const std::vector<std::string> n = [] {
        std::vector<std::string> v = acoustic_feature_vector::names();
        const auto &l = linguistic_feature_vector::names();
        v.insert(v.end(), l.begin(), l.end());
        return v;
    }();
    return n;
}

struct feature_table {
    std::vector<std::string> names;
    std::map<std::string, std::vector<double>> rows;  // sample_id -> values

    [[nodiscard]] const std::vector<double> *find(const std::string &sample_id) const {
        const auto it = rows.find(sample_id);
        return it == rows.end() ? nullptr : &it->second;
    }
};

/// Writes `sample_id,<names...>` with round-trip precision, rows in the given order.
inline void write_features(const std::string &path, const feature_table &t, const std::vector<std::string> &order) {
    std::ofstream out{ path };
    if (!out) {
        throw error{ "cannot write " + path };
    }
    out << "sample_id," << join(t.names) << "\n";
    for (const auto &id : order) {
        const auto *v = t.find(id);
        if (v == nullptr) {
            throw error{ "write_features: no row for " + id };
        }
        out << id;
        for (const double d : *v) {
            out << "," << format_double(d);
        }
        out << "\n";
    }
}

inline feature_table read_features(const std::string &path) {
    const csv_table c = read_csv(path);
    if (c.header.empty() || c.header.front() != "sample_id" || c.header.size() < 2) {
        throw parse_error{ path, 1, "feature file must start with sample_id and at least one feature column" };
    }
    feature_table t;
    t.names.assign(c.header.begin() + 1, c.header.end());
    for (std::size_t r = 0; r < c.rows.size(); ++r) {
        const auto &f = c.rows[r];
        std::vector<double> v;
        v.reserve(t.names.size());
        for (std::size_t i = 1; i < f.size(); ++i) {
            try {
                v.push_back(parse_double(f[i]));
            } catch (const error &e) {
                throw parse_error{ path, c.line_numbers[r], c.header[i] + ": " + e.what() };
            }
            if (!std::isfinite(v.back())) {
                throw parse_error{ path, c.line_numbers[r], c.header[i] + " is not finite" };
            }
        }
        if (!t.rows.emplace(f[0], std::move(v)).second) {
            throw parse_error{ path, c.line_numbers[r], "duplicate sample_id " + f[0] };
        }
    }
    return t;
}

inline std::string read_text_file(const std::string &path) {
    std::ifstream in{ path };
    if (!in) {
        throw error{ "cannot read " + path };
    }
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

/// Full hand-crafted vector for one recording and its transcript.
inline std::vector<double> extract_features(const audio_buffer &audio, const std::string &transcript_text, const vad_lexicon &lex, const acoustic_params &ap = {}, const linguistic_params &lp = {}) {
    std::vector<double> v = extract_acoustic(audio, ap).values();
    const auto l = extract_linguistic(transcript_text, lex, lp).values();
    v.insert(v.end(), l.begin(), l.end());
    return v;
}

/// Per-column z-scoring fitted on training rows; constant columns pass through centred.
class standardizer {
  public:
    standardizer() = default;

    explicit standardizer(const std::vector<const std::vector<double> *> &rows) {
        if (rows.empty()) {
            throw empty_input_error{ "standardizer: no rows" };
        }
        const std::size_t d = rows.front()->size();
        mean_.assign(d, 0.0);
        scale_.assign(d, 0.0);
        for (const auto *r : rows) {
            for (std::size_t j = 0; j < d; ++j) {
                mean_[j] += (*r)[j];
            }
        }
        for (auto &m : mean_) {
            m /= static_cast<double>(rows.size());
        }
        for (const auto *r : rows) {
            for (std::size_t j = 0; j < d; ++j) {
                const double e = (*r)[j] - mean_[j];
                scale_[j] += e * e;
            }
        }
        for (auto &s : scale_) {
            s = std::sqrt(s / static_cast<double>(rows.size()));
            if (!(s > 1e-12)) {
                s = 1.0;
            }
        }
    }

    [[nodiscard]] std::vector<double> apply(const std::vector<double> &x) const {
        if (x.size() != mean_.size()) {
            throw shape_error{ "standardizer: expected " + std::to_string(mean_.size()) + " features, got " + std::to_string(x.size()) };
        }
        std::vector<double> y(x.size());
        for (std::size_t j = 0; j < x.size(); ++j) {
            y[j] = (x[j] - mean_[j]) / scale_[j];
        }
        return y;
    }

    [[nodiscard]] const std::vector<double> &mean() const noexcept { return mean_; }
    [[nodiscard]] const std::vector<double> &scale() const noexcept { return scale_; }

  private:
    std::vector<double> mean_;
    std::vector<double> scale_;
};

}  // namespace speechbio
