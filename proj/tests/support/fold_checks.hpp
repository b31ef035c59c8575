#pragma once

// Random manifests and an independent audit of a fold plan.

#include "speechbio/dataset.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <vector>

namespace speechbio::test {

/// Subjects with 1-4 samples each and arbitrary scores.
inline std::vector<sample_record> random_manifest(rng &r, std::size_t subjects) {
    std::vector<sample_record> out;
    for (std::size_t s = 0; s < subjects; ++s) {
        const std::size_t n = 1 + r.below(4);
        for (std::size_t k = 0; k < n; ++k) {
            sample_record rec;
            rec.subject_id = "sub" + std::to_string(s);
            rec.sample_id = rec.subject_id + "_" + std::to_string(k);
            rec.phq8 = static_cast<int>(r.below(phq8_max + 1));
            rec.gad7 = static_cast<int>(r.below(gad7_max + 1));
            out.push_back(rec);
        }
    }
    // interleave subjects
    r.shuffle(out);
    return out;
}

struct fold_audit {
    std::size_t overlapping_subjects = 0;  // subjects seen in both train and test of some fold
    std::size_t unassigned_samples = 0;
    std::size_t empty_folds = 0;
    int positive_spread = 0;  // max - min positive subjects per fold
};

inline fold_audit audit_folds(const std::vector<sample_record> &records, const fold_plan &plan, disease d) {
    fold_audit a;
    std::map<std::string, int> subject_pos;
    for (const auto &r : records) {
        subject_pos[r.subject_id] = std::max(subject_pos[r.subject_id], r.score(d) >= diagnosis_cutoff ? 1 : 0);
        if (plan.assignment.count(r.subject_id) == 0) {
            ++a.unassigned_samples;
        }
    }
    if (a.unassigned_samples != 0) {
        return a;
    }
    std::vector<int> positives(static_cast<std::size_t>(plan.k), 0);
    for (int f = 0; f < plan.k; ++f) {
        std::set<std::string> train;
        std::set<std::string> test;
        for (const auto i : plan.train_indices(records, f)) {
            train.insert(records[i].subject_id);
        }
        for (const auto i : plan.test_indices(records, f)) {
            test.insert(records[i].subject_id);
        }
        if (test.empty()) {
            ++a.empty_folds;
        }
        for (const auto &s : test) {
            a.overlapping_subjects += train.count(s);
            positives[static_cast<std::size_t>(f)] += subject_pos[s];
        }
    }
    const auto [lo, hi] = std::minmax_element(positives.begin(), positives.end());
    a.positive_spread = *hi - *lo;
    return a;
}

}  // namespace speechbio::test
