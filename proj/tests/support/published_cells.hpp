#pragma once

// The eight class-level cells of the published results table, and prediction
// vectors that realize a given precision/recall pair exactly.

#include <cmath>
#include <string>
#include <vector>

namespace speechbio::test {

struct published_cell {
    std::string disease;
    std::string model;
    int label;  // 0 no diagnosis, 1 diagnosis
    double precision;
    double recall;
    double f1;
};

inline const std::vector<published_cell> &published_cells() {
    static const std::vector<published_cell> cells{
        { "anxiety", "baseline", 0, 0.81, 0.65, 0.72 },
        { "anxiety", "fusion", 0, 0.76, 0.72, 0.73 },
        { "depression", "baseline", 0, 0.73, 0.78, 0.75 },
        { "depression", "fusion", 0, 0.77, 0.83, 0.80 },
        { "anxiety", "baseline", 1, 0.28, 0.41, 0.33 },
        { "anxiety", "fusion", 1, 0.37, 0.42, 0.40 },
        { "depression", "baseline", 1, 0.31, 0.42, 0.35 },
        { "depression", "fusion", 1, 0.48, 0.39, 0.43 },
    };
    return cells;
}

struct labelled_predictions {
    std::vector<int> preds;
    std::vector<int> labels;
};

/**
 * With P = a/100 and R = b/100: tp = a*b, predicted = 100*b, actual = 100*a.
 * `cls` is the class whose precision and recall these are.
 */
inline labelled_predictions realize(double precision, double recall, int cls, std::size_t true_negatives = 500) {
    const auto a = static_cast<std::size_t>(std::llround(precision * 100.0));
    const auto b = static_cast<std::size_t>(std::llround(recall * 100.0));
    const std::size_t tp = a * b;
    const std::size_t fp = 100 * b - tp;
    const std::size_t fn = 100 * a - tp;
    labelled_predictions out;
    auto push = [&](std::size_t n, int label, int pred) {
        for (std::size_t i = 0; i < n; ++i) {
            out.labels.push_back(label == 1 ? cls : 1 - cls);
            out.preds.push_back(pred == 1 ? cls : 1 - cls);
        }
    };
    push(tp, 1, 1);
    push(fp, 0, 1);
    push(fn, 1, 0);
    push(true_negatives, 0, 0);
    return out;
}

/// F1 range over the box of inputs that round to (precision, recall) at two decimals.
inline std::pair<double, double> f1_rounding_range(double precision, double recall) {
    double lo = 1.0;
    double hi = 0.0;
    for (int i = 0; i <= 100; ++i) {
        for (int j = 0; j <= 100; ++j) {
            const double p = precision - 0.005 + 0.01 * i / 100.0;
            const double r = recall - 0.005 + 0.01 * j / 100.0;
            const double f = 2.0 * p * r / (p + r);
            lo = std::min(lo, f);
            hi = std::max(hi, f);
        }
    }
    return { lo, hi };
}

}  // namespace speechbio::test
