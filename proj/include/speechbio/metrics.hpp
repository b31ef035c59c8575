#pragma once

// Binary classification metrics and the results table.

#include "speechbio/common.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace speechbio {

struct class_metrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t support = 0;
};

/// Harmonic mean of precision and recall, 0 when both are 0.
inline double f1_score(double precision, double recall) {
    const double s = precision + recall;
    return s > 0.0 ? 2.0 * precision * recall / s : 0.0;
}

struct binary_metrics {
    class_metrics no_diagnosis;  // label 0
    class_metrics diagnosis;     // label 1
    double macro_f1 = 0.0;
    double weighted_f1 = 0.0;
    std::vector<std::string> warnings;
};

/**
 * Per-class precision, recall and F1 for labels in {0, 1}. A zero denominator
 * yields 0 and a warning.
 */
inline binary_metrics compute_metrics(const std::vector<int> &preds, const std::vector<int> &labels) {
    if (preds.size() != labels.size() || preds.empty()) {
        throw shape_error{ "compute_metrics: need equal, non-zero lengths (" + std::to_string(preds.size()) + " vs " + std::to_string(labels.size()) + ")" };
    }
    std::size_t counts[2][2] = {};  // [label][pred]
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if ((preds[i] != 0 && preds[i] != 1) || (labels[i] != 0 && labels[i] != 1)) {
            throw error{ "compute_metrics: labels and predictions must be 0 or 1" };
        }
        ++counts[labels[i]][preds[i]];
    }
    binary_metrics m;
    for (int c = 0; c < 2; ++c) {
        const char *name = c == 0 ? "no_diagnosis" : "diagnosis";
        class_metrics &k = c == 0 ? m.no_diagnosis : m.diagnosis;
        const auto tp = static_cast<double>(counts[c][c]);
        const auto predicted = static_cast<double>(counts[0][c] + counts[1][c]);
        const auto actual = static_cast<double>(counts[c][0] + counts[c][1]);
        k.support = counts[c][0] + counts[c][1];
        if (predicted > 0.0) {
            k.precision = tp / predicted;
        } else {
            m.warnings.push_back(std::string{ "precision of " } + name + " undefined (no predictions), set to 0");
        }
        if (actual > 0.0) {
            k.recall = tp / actual;
        } else {
            m.warnings.push_back(std::string{ "recall of " } + name + " undefined (no samples), set to 0");
        }
        k.f1 = f1_score(k.precision, k.recall);
    }
    m.macro_f1 = (m.no_diagnosis.f1 + m.diagnosis.f1) / 2.0;
    const auto n = static_cast<double>(preds.size());
    m.weighted_f1 = (m.no_diagnosis.f1 * static_cast<double>(m.no_diagnosis.support) + m.diagnosis.f1 * static_cast<double>(m.diagnosis.support)) / n;
    return m;
}

/// Field-wise arithmetic mean; supports become totals.
inline binary_metrics mean_metrics(const std::vector<binary_metrics> &folds) {
    if (folds.empty()) {
        throw empty_input_error{ "mean_metrics: no folds" };
    }
    binary_metrics out;
    const auto n = static_cast<double>(folds.size());
    for (const auto &f : folds) {
        for (int c = 0; c < 2; ++c) {
            class_metrics &o = c == 0 ? out.no_diagnosis : out.diagnosis;
            const class_metrics &k = c == 0 ? f.no_diagnosis : f.diagnosis;
            o.precision += k.precision / n;
            o.recall += k.recall / n;
            o.f1 += k.f1 / n;
            o.support += k.support;
        }
        out.macro_f1 += f.macro_f1 / n;
        out.weighted_f1 += f.weighted_f1 / n;
    }
    return out;
}

inline nlohmann::json to_json(const class_metrics &c) {
    return { { "precision", c.precision }, { "recall", c.recall }, { "f1", c.f1 }, { "support", c.support } };
}

inline nlohmann::json to_json(const binary_metrics &m) {
    return { { "no_diagnosis", to_json(m.no_diagnosis) }, { "diagnosis", to_json(m.diagnosis) }, { "macro_f1", m.macro_f1 }, { "weighted_f1", m.weighted_f1 }, { "warnings", m.warnings } };
}

inline class_metrics class_metrics_from_json(const nlohmann::json &j) {
    return { j.at("precision").get<double>(), j.at("recall").get<double>(), j.at("f1").get<double>(), j.at("support").get<std::size_t>() };
}

inline binary_metrics metrics_from_json(const nlohmann::json &j) {
    binary_metrics m;
    m.no_diagnosis = class_metrics_from_json(j.at("no_diagnosis"));
    m.diagnosis = class_metrics_from_json(j.at("diagnosis"));
    m.macro_f1 = j.at("macro_f1").get<double>();
    m.weighted_f1 = j.at("weighted_f1").get<double>();
    m.warnings = j.value("warnings", std::vector<std::string>{});
    return m;
}

/// Per-fold and mean metrics of one trained configuration.
struct metrics_report {
    std::string disease;
    std::string model_kind;
    std::vector<binary_metrics> folds;
    binary_metrics mean;

    [[nodiscard]] nlohmann::json to_json() const {
        nlohmann::json j;
        j["disease"] = disease;
        j["model"] = model_kind;
        j["mean"] = speechbio::to_json(mean);
        j["folds"] = nlohmann::json::array();
        for (const auto &f : folds) {
            j["folds"].push_back(speechbio::to_json(f));
        }
        return j;
    }

    static metrics_report from_json(const nlohmann::json &j) {
        metrics_report r;
        r.disease = j.at("disease").get<std::string>();
        r.model_kind = j.at("model").get<std::string>();
        r.mean = metrics_from_json(j.at("mean"));
        for (const auto &f : j.at("folds")) {
            r.folds.push_back(metrics_from_json(f));
        }
        return r;
    }
};

inline std::string model_label(const std::string &kind) {
    if (kind == "baseline") {
        return "Hand-crafted features only";
    }
    if (kind == "fusion") {
        return "Deep-learned + hand-crafted features";
    }
    return kind;
}

enum class report_format { text, csv };

namespace detail {

inline std::string fixed2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline std::string exact(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace detail

/**
 * Results table: one column group per report (anxiety groups first, then
 * depression), rows no-diagnosis / diagnosis / overall. In every row the
 * highest F1 within a disease is flagged; the overall row shows macro-F1 and
 * weighted-F1 side by side and flags by macro-F1.
 */
inline std::string format_report(std::vector<metrics_report> reports, report_format fmt) {
    if (reports.empty()) {
        throw empty_input_error{ "report: no metrics reports" };
    }
    std::stable_sort(reports.begin(), reports.end(), [](const metrics_report &a, const metrics_report &b) {
        if (a.disease != b.disease) {
            return a.disease < b.disease;
        }
        return a.model_kind < b.model_kind;
    });
    enum row_kind { no_dx, dx, overall };
    auto f1_of = [](const metrics_report &r, int row) {
        return row == no_dx ? r.mean.no_diagnosis.f1 : row == dx ? r.mean.diagnosis.f1 : r.mean.macro_f1;
    };
    auto flagged = [&](std::size_t i, int row) {
        for (std::size_t j = 0; j < reports.size(); ++j) {
            if (reports[j].disease == reports[i].disease && f1_of(reports[j], row) > f1_of(reports[i], row)) {
                return false;
            }
        }
        return true;
    };

    std::ostringstream os;
    if (fmt == report_format::csv) {
        os << "disease,model,row,precision,recall,f1,macro_f1,weighted_f1,best\n";
        for (std::size_t i = 0; i < reports.size(); ++i) {
            const auto &r = reports[i];
            for (int row = no_dx; row <= overall; ++row) {
                os << r.disease << "," << r.model_kind << ",";
                if (row == overall) {
                    os << "overall,,," << detail::exact(r.mean.macro_f1) << "," << detail::exact(r.mean.macro_f1) << "," << detail::exact(r.mean.weighted_f1);
                } else {
                    const class_metrics &c = row == no_dx ? r.mean.no_diagnosis : r.mean.diagnosis;
                    os << (row == no_dx ? "no_diagnosis" : "diagnosis") << "," << detail::exact(c.precision) << "," << detail::exact(c.recall) << "," << detail::exact(c.f1) << ",,";
                }
                os << "," << (flagged(i, row) ? 1 : 0) << "\n";
            }
        }
        return os.str();
    }

    constexpr int label_w = 26;
    constexpr int cell_w = 10;
    auto pad = [](std::string s, int w) {
        if (static_cast<int>(s.size()) < w) {
            s.append(static_cast<std::size_t>(w) - s.size(), ' ');
        }
        return s;
    };
    std::string line1 = pad("", label_w);
    std::string line2 = pad("", label_w);
    std::string line3 = pad("", label_w);
    for (const auto &r : reports) {
        line1 += "| " + pad(r.disease, 3 * cell_w - 2);
        line2 += "| " + pad(model_label(r.model_kind), 3 * cell_w - 2);
        line3 += "| " + pad("Precision", cell_w - 2) + pad("Recall", cell_w) + pad("F1", cell_w - 2);
    }
    os << line1 << "\n" << line2 << "\n" << line3 << "\n";
    const char *row_names[] = { "No diagnosis (score < 10)", "Diagnosis (score >= 10)", "Overall (macro / weighted)" };
    for (int row = no_dx; row <= overall; ++row) {
        std::string line = pad(row_names[row], label_w);
        for (std::size_t i = 0; i < reports.size(); ++i) {
            const auto &r = reports[i];
            const std::string mark = flagged(i, row) ? "*" : "";
            if (row == overall) {
                line += "| " + pad(detail::fixed2(r.mean.macro_f1) + mark + " / " + detail::fixed2(r.mean.weighted_f1), 3 * cell_w - 2);
            } else {
                const class_metrics &c = row == no_dx ? r.mean.no_diagnosis : r.mean.diagnosis;
                line += "| " + pad(detail::fixed2(c.precision), cell_w - 2) + pad(detail::fixed2(c.recall), cell_w) + pad(detail::fixed2(c.f1) + mark, cell_w - 2);
            }
        }
        os << line << "\n";
    }
    os << "* highest F1 per disease\n";
    return os.str();
}

}  // namespace speechbio
