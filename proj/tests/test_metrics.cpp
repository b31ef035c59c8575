#include "speechbio/csv.hpp"
#include "speechbio/metrics.hpp"
#include "support/published_cells.hpp"

#include <gtest/gtest.h>

using namespace speechbio;

namespace {

metrics_report report(const std::string &disease, const std::string &kind, double f1_no, double f1_dx) {
    metrics_report r;
    r.disease = disease;
    r.model_kind = kind;
    r.mean.no_diagnosis = { 0.7, 0.7, f1_no, 10 };
    r.mean.diagnosis = { 0.3, 0.3, f1_dx, 5 };
    r.mean.macro_f1 = (f1_no + f1_dx) / 2.0;
    r.mean.weighted_f1 = (10 * f1_no + 5 * f1_dx) / 15.0;
    r.folds = { r.mean };
    return r;
}

}  // namespace

TEST(F1, Examples) {
    EXPECT_NEAR(f1_score(0.28, 0.41), 0.3328, 1e-4);
    EXPECT_EQ(f1_score(0.0, 0.0), 0.0);
}

TEST(Metrics, Perfect) {
    const auto m = compute_metrics({ 0, 1, 1, 0 }, { 0, 1, 1, 0 });
    EXPECT_EQ(m.no_diagnosis.f1, 1.0);
    EXPECT_EQ(m.diagnosis.precision, 1.0);
    EXPECT_EQ(m.macro_f1, 1.0);
    EXPECT_EQ(m.weighted_f1, 1.0);
    EXPECT_TRUE(m.warnings.empty());
}

TEST(Metrics, HandCounted) {
    // labels 1,1,1,0,0 ; preds 1,0,1,1,0
    const auto m = compute_metrics({ 1, 0, 1, 1, 0 }, { 1, 1, 1, 0, 0 });
    EXPECT_DOUBLE_EQ(m.diagnosis.precision, 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(m.diagnosis.recall, 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(m.no_diagnosis.precision, 0.5);
    EXPECT_DOUBLE_EQ(m.no_diagnosis.recall, 0.5);
    EXPECT_EQ(m.diagnosis.support, 3u);
    EXPECT_NEAR(m.weighted_f1, (3 * 2.0 / 3.0 + 2 * 0.5) / 5.0, 1e-15);
}

TEST(Metrics, MacroOfClassF1s) {
    metrics_report r = report("x", "baseline", 0.72, 0.33);
    EXPECT_NEAR(r.mean.macro_f1, 0.525, 1e-12);
}

TEST(Metrics, SingleClassWarns) {
    const auto m = compute_metrics({ 0, 0, 0 }, { 0, 0, 0 });
    EXPECT_EQ(m.diagnosis.precision, 0.0);
    EXPECT_EQ(m.diagnosis.recall, 0.0);
    EXPECT_EQ(m.warnings.size(), 2u);
}

TEST(Metrics, BadInputs) {
    EXPECT_THROW(compute_metrics({}, {}), shape_error);
    EXPECT_THROW(compute_metrics({ 1 }, { 1, 0 }), shape_error);
    EXPECT_THROW(compute_metrics({ 2 }, { 1 }), error);
}

TEST(Metrics, MeanIsArithmetic) {
    const auto a = compute_metrics({ 1, 0, 1, 1 }, { 1, 0, 0, 1 });
    const auto b = compute_metrics({ 0, 0, 1, 1 }, { 1, 0, 1, 1 });
    const auto m = mean_metrics({ a, b });
    EXPECT_DOUBLE_EQ(m.diagnosis.precision, (a.diagnosis.precision + b.diagnosis.precision) / 2.0);
    EXPECT_DOUBLE_EQ(m.macro_f1, (a.macro_f1 + b.macro_f1) / 2.0);
    EXPECT_EQ(m.diagnosis.support, a.diagnosis.support + b.diagnosis.support);
}

TEST(Metrics, RealizedPredictionsHitExactPairs) {
    for (const auto &c : test::published_cells()) {
        const auto lp = test::realize(c.precision, c.recall, c.label);
        const auto m = compute_metrics(lp.preds, lp.labels);
        const auto &k = c.label == 1 ? m.diagnosis : m.no_diagnosis;
        EXPECT_NEAR(k.precision, c.precision, 1e-12);
        EXPECT_NEAR(k.recall, c.recall, 1e-12);
    }
}

TEST(Metrics, PublishedF1sLieInsideRoundingRange) {
    for (const auto &c : test::published_cells()) {
        const auto [lo, hi] = test::f1_rounding_range(c.precision, c.recall);
        EXPECT_GE(c.f1 + 0.005, lo) << c.disease << " " << c.model << " " << c.label;
        EXPECT_LE(c.f1 - 0.005, hi) << c.disease << " " << c.model << " " << c.label;
    }
}

TEST(Metrics, JsonRoundTrip) {
    const auto r = report("depression", "fusion", 0.8, 1.0 / 3.0);
    const auto back = metrics_report::from_json(nlohmann::json::parse(r.to_json().dump()));
    EXPECT_EQ(back.mean.diagnosis.f1, r.mean.diagnosis.f1);
    EXPECT_EQ(back.mean.weighted_f1, r.mean.weighted_f1);
    EXPECT_EQ(back.folds.size(), 1u);
}

TEST(Report, SingleReportSelfFlagged) {
    const auto text = format_report({ report("depression", "baseline", 0.75, 0.35) }, report_format::text);
    EXPECT_NE(text.find("0.75*"), std::string::npos);
    EXPECT_NE(text.find("0.35*"), std::string::npos);
    EXPECT_NE(text.find("Hand-crafted features only"), std::string::npos);
}

TEST(Report, HigherOverallFlagged) {
    auto a = report("depression", "baseline", 0.75, 0.41);  // macro 0.58
    auto b = report("depression", "fusion", 0.80, 0.46);    // macro 0.63
    const auto csv = format_report({ b, a }, report_format::csv);
    EXPECT_NE(csv.find("depression,fusion,overall,,,0.63"), std::string::npos);
    const auto lines = split(csv, '\n');
    for (const auto &l : lines) {
        if (l.rfind("depression,fusion,overall", 0) == 0) {
            EXPECT_EQ(l.back(), '1');
        }
        if (l.rfind("depression,baseline,overall", 0) == 0) {
            EXPECT_EQ(l.back(), '0');
        }
    }
    const auto text = format_report({ a, b }, report_format::text);
    EXPECT_NE(text.find("0.63*"), std::string::npos);
    EXPECT_EQ(text.find("0.58*"), std::string::npos);
}

TEST(Report, FlagsArePerDisease) {
    const auto csv = format_report({ report("anxiety", "baseline", 0.5, 0.2), report("depression", "baseline", 0.9, 0.6) }, report_format::csv);
    std::size_t flagged = 0;
    for (const auto &l : split(csv, '\n')) {
        flagged += !l.empty() && l.back() == '1';
    }
    EXPECT_EQ(flagged, 6u);
}

TEST(Report, CsvRoundTripsNumbersExactly) {
    const auto r = report("anxiety", "fusion", 0.1 + 0.2, 1.0 / 7.0);
    const auto csv = format_report({ r }, report_format::csv);
    const auto lines = split(csv, '\n');
    ASSERT_GE(lines.size(), 4u);
    const auto dx = split(lines[2], ',');
    EXPECT_EQ(parse_double(dx[5]), r.mean.diagnosis.f1);
    const auto overall = split(lines[3], ',');
    EXPECT_EQ(parse_double(overall[6]), r.mean.macro_f1);
    EXPECT_EQ(parse_double(overall[7]), r.mean.weighted_f1);
}

TEST(Report, EmptyRejected) { EXPECT_THROW(format_report({}, report_format::text), empty_input_error); }
