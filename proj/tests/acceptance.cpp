// Acceptance suite: one PASS/FAIL line per primary criterion, details indented.

#include "speechbio/speechbio.hpp"
#include "support/fold_checks.hpp"
#include "support/layer_gradchecks.hpp"
#include "support/mfcc_oracle.hpp"
#include "support/published_cells.hpp"
#include "support/signals.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

using namespace speechbio;
namespace fs = std::filesystem;

namespace {

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0) { return std::chrono::duration<double>(clock_type::now() - t0).count(); }

std::string sci(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2e", v);
    return buf;
}

std::string num(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

struct outcome {
    bool pass = false;
    std::string summary;
    std::vector<std::string> details;
};

outcome gradient_correctness() {
    outcome o;
    const auto t0 = clock_type::now();
    bool ok = true;
    for (const auto &c : test::all_gradchecks()) {
        rng r{ std::hash<std::string>{}(c.name) };
        double worst = 0.0;
        std::size_t values = 0;
        for (int i = 0; i < 100; ++i) {
            const auto res = c.run(r);
            worst = std::max(worst, res.max_rel_error);
            values += res.checked;
        }
        ok = ok && worst < 1e-4;
        o.details.push_back(c.name + ": 100 instances, " + std::to_string(values) + " values, max rel err " + sci(worst));
    }
    const double secs = seconds_since(t0);
    o.pass = ok && secs < 120.0;
    o.summary = "8 layers x 100 instances, max rel err < 1e-4, " + num(secs, 1) + " s";
    return o;
}

outcome adamw_unit_step() {
    nn::parameter p{ "theta", { 1 } };
    p.value[0] = 1.0;
    p.grad[0] = 1.0;
    nn::adamw_step({ &p }, { 1e-3, 0.9, 0.999, 1e-8, 0.01 });
    const double diff = std::abs(p.value[0] - 0.99899);
    return { diff <= 1e-9, "theta' = " + format_double(p.value[0]) + ", |diff| = " + format_double(diff), {} };
}

outcome mfcc_oracle() {
    outcome o;
    double worst = 0.0;
    rng r{ 20240601 };
    for (int s = 0; s < 20; ++s) {
        // 1 s of two random tones plus noise at a random level
        audio_buffer b;
        b.samples.resize(16000);
        const double f1 = r.uniform(60.0, 3000.0);
        const double f2 = r.uniform(200.0, 7000.0);
        const double a1 = r.uniform(0.05, 0.8);
        const double a2 = r.uniform(0.0, 0.3);
        const double noise = r.uniform(0.0, 0.2);
        for (std::size_t i = 0; i < b.samples.size(); ++i) {
            const double t = static_cast<double>(i) / 16000.0;
            b.samples[i] = a1 * std::sin(2 * test::pi * f1 * t) + a2 * std::sin(2 * test::pi * f2 * t) + noise * r.normal();
        }
        const auto ours = mfcc(frame(b));
        const auto ref = test::brute_force_mfcc(b.samples, b.sample_rate);
        double d = 0.0;
        if (ours.coeffs.size() != ref.frames.size()) {
            d = 1e9;
        } else {
            for (std::size_t t = 0; t < ref.frames.size(); ++t) {
                for (std::size_t c = 0; c < mfcc_frame_dim; ++c) {
                    d = std::max(d, std::abs(ours.coeffs[t][c] - ref.frames[t][c]));
                }
            }
            for (std::size_t c = 0; c < mfcc_frame_dim; ++c) {
                d = std::max({ d, std::abs(ours.mean[c] - ref.mean[c]), std::abs(ours.delta_mean[c] - ref.delta_mean[c]), std::abs(ours.delta2_mean[c] - ref.delta2_mean[c]) });
            }
        }
        worst = std::max(worst, d);
    }
    o.pass = worst <= 1e-6;
    o.summary = "20 random 1 s signals, max |diff| = " + format_double(worst);
    return o;
}

outcome acoustic_ground_truth() {
    outcome o;
    bool ok = true;

    const auto tone = test::sine(200.0, 1.0);
    const auto tf = frame(tone);
    const auto track = f0(tf, detect_voiced(tf));
    const double f0_mean = track.f0_mean.value_or(0.0);
    const bool f0_ok = std::abs(f0_mean - 200.0) <= 1.0;
    ok = ok && f0_ok;
    o.details.push_back(std::string{ f0_ok ? "ok  " : "BAD " } + "200 Hz sine f0_mean = " + num(f0_mean));

    const auto jit = test::pulse_cycles({ 0.0099, 0.0101 }, { 1.0 }, 1.0);
    const auto jf = frame(jit);
    const auto jt = f0(jf, detect_voiced(jf));
    const auto pert = jitter_shimmer(jit, jt, jf);
    const double j = pert.jitter_local.value_or(-1.0);
    const bool j_ok = std::abs(j - 0.02) <= 0.003;
    ok = ok && j_ok;
    o.details.push_back(std::string{ j_ok ? "ok  " : "BAD " } + "2% jitter signal: jitter_local = " + num(100.0 * j, 3) + "%");

    const auto speech = [] { return test::sine(180.0, 1.0, 0.5); };
    const auto pat = test::concat({ speech(), test::silence(0.5), speech(), test::silence(1.5), speech(), test::silence(2.5), speech() });
    const auto pf = frame(pat);
    const auto pauses = detect_pauses(detect_voiced(pf), pf);
    int counts[3] = { 0, 0, 0 };
    for (const auto &p : pauses.pauses) {
        ++counts[static_cast<int>(p.kind)];
    }
    const bool p_ok = pauses.pauses.size() == 3 && counts[0] == 1 && counts[1] == 1 && counts[2] == 1;
    ok = ok && p_ok;
    o.details.push_back(std::string{ p_ok ? "ok  " : "BAD " } + "gaps 0.5/1.5/2.5 s: short " + std::to_string(counts[0]) + ", medium " + std::to_string(counts[1]) + ", long " + std::to_string(counts[2]));

    const double db = intensity(frame(test::sine(200.0, 1.0)));
    const bool i_ok = std::abs(db - 96.99) <= 0.05;
    ok = ok && i_ok;
    o.details.push_back(std::string{ i_ok ? "ok  " : "BAD " } + "unit sine intensity = " + num(db, 3) + " dB");

    o.pass = ok;
    o.summary = "f0, jitter, pause classes, intensity";
    return o;
}

outcome fold_disjointness() {
    std::size_t overlaps = 0;
    std::size_t unassigned = 0;
    std::size_t empty = 0;
    int worst_spread = 0;
    for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
        rng r{ seed * 7919 };
        const auto recs = test::random_manifest(r, 5 + r.below(120));
        const auto d = seed % 2 ? disease::depression : disease::anxiety;
        const auto plan = make_folds(recs, 5, seed, d);
        const auto a = test::audit_folds(recs, plan, d);
        overlaps += a.overlapping_subjects;
        unassigned += a.unassigned_samples;
        empty += a.empty_folds;
        worst_spread = std::max(worst_spread, a.positive_spread);
    }
    outcome o;
    o.pass = overlaps == 0 && unassigned == 0 && empty == 0 && worst_spread <= 1;
    o.summary = "1000 plans: " + std::to_string(overlaps) + " overlapping subjects, " + std::to_string(empty) + " empty folds, max positive spread " + std::to_string(worst_spread);
    return o;
}

outcome metric_fidelity() {
    outcome o;
    std::size_t good = 0;
    for (const auto &c : test::published_cells()) {
        const auto lp = test::realize(c.precision, c.recall, c.label);
        const auto m = compute_metrics(lp.preds, lp.labels);
        const auto &k = c.label == 1 ? m.diagnosis : m.no_diagnosis;
        const bool ok = std::abs(k.f1 - c.f1) <= 0.005 + 1e-12;
        good += ok;
        o.details.push_back(std::string{ ok ? "ok  " : "BAD " } + c.disease + "/" + c.model + "/" + (c.label ? "diagnosis" : "no_diagnosis") + ": P " + num(k.precision, 2) + " R " + num(k.recall, 2) + " -> F1 " + num(k.f1) + " vs published " + num(c.f1, 2));
    }
    o.pass = good == test::published_cells().size();
    o.summary = std::to_string(good) + "/8 class-level cells within 0.005";
    return o;
}

struct synth_run {
    double macro_f1 = 0.0;
    double seconds = 0.0;
};

synth_run run_synthetic(const synthetic_params &p, model_kind kind, const train_params &tp, std::uint64_t seed) {
    const auto ds = make_synthetic_dataset(p);
    const fs::path dir = fs::temp_directory_path() / ("speechbio_acceptance_" + std::to_string(seed) + "_" + to_string(kind));
    embedding_index idx;
    if (kind == model_kind::fusion) {
        fs::remove_all(dir);
        write_synthetic_dataset(dir.string(), ds, p);
        idx = load_embedding_index((dir / "embeddings").string());
    }
    const auto plan = make_folds(ds.records, 5, seed);
    const auto t0 = clock_type::now();
    const auto r = train_eval({ &ds.records, &ds.features, kind == model_kind::fusion ? &idx : nullptr, &plan }, disease::depression, kind, tp, seed);
    return { r.report.mean.macro_f1, seconds_since(t0) };
}

outcome learning_sanity() {
    outcome o;
    double sum3 = 0.0;
    double sum0 = 0.0;
    double secs = 0.0;
    std::string s3;
    std::string s0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        synthetic_params p;
        p.subjects = 200;
        p.samples_per_subject = 2;
        p.depression_rate = 0.253;
        p.seed = seed;
        p.embeddings = false;
        p.signal_strength = 3.0;
        const auto a = run_synthetic(p, model_kind::baseline, {}, seed);
        p.signal_strength = 0.0;
        const auto b = run_synthetic(p, model_kind::baseline, {}, seed);
        sum3 += a.macro_f1;
        sum0 += b.macro_f1;
        secs = std::max({ secs, a.seconds, b.seconds });
        s3 += " " + num(a.macro_f1, 3);
        s0 += " " + num(b.macro_f1, 3);
    }
    const double m3 = sum3 / 5.0;
    const double m0 = sum0 / 5.0;
    o.details.push_back("signal 3.0 per seed:" + s3);
    o.details.push_back("signal 0.0 per seed:" + s0);
    o.pass = m3 >= 0.95 && std::abs(m0 - 0.5) <= 0.1 && secs < 300.0;
    o.summary = "mean macro-F1 over seeds 1-5: signal 3.0 -> " + num(m3) + " (>= 0.95), signal 0 -> " + num(m0) + " (0.5 +- 0.1), slowest run " + num(secs, 2) + " s";
    return o;
}

outcome fusion_gain() {
    outcome o;
    double base = 0.0;
    double fus = 0.0;
    train_params tp;
    tp.bilstm_hidden = 8;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        synthetic_params p;
        p.subjects = 200;
        p.seed = seed;
        p.signal_strength = 1.0;
        p.embedding_signal = 1.0;
        const auto b = run_synthetic(p, model_kind::baseline, tp, seed);
        const auto f = run_synthetic(p, model_kind::fusion, tp, seed);
        base += b.macro_f1 / 5.0;
        fus += f.macro_f1 / 5.0;
        o.details.push_back("seed " + std::to_string(seed) + ": baseline " + num(b.macro_f1, 3) + ", fusion " + num(f.macro_f1, 3) + " (" + num(f.seconds, 1) + " s)");
    }
    o.pass = fus >= base + 0.03;
    o.summary = "mean fusion " + num(fus) + " vs baseline " + num(base) + ", gain " + num(fus - base) + " (>= 0.03)";
    return o;
}

std::string slurp(const fs::path &p) {
    std::ifstream in{ p, std::ios::binary };
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

outcome determinism() {
    outcome o;
    synthetic_params p;
    p.subjects = 30;
    p.seed = 11;
    const auto ds = make_synthetic_dataset(p);
    const fs::path root = fs::temp_directory_path() / "speechbio_acceptance_determinism";
    fs::remove_all(root);
    write_synthetic_dataset((root / "data").string(), ds, p);
    const auto idx = load_embedding_index((root / "data" / "embeddings").string());
    const auto plan = make_folds(ds.records, 5, 11);
    train_params tp;
    tp.bilstm_hidden = 4;
    tp.fusion_epochs = 2;
    bool ok = true;
    for (const auto kind : { model_kind::baseline, model_kind::fusion }) {
        std::vector<std::string> reports;
        for (const char *rep : { "a", "b" }) {
            const auto r = train_eval({ &ds.records, &ds.features, &idx, &plan }, disease::depression, kind, tp, 11);
            const auto dir = root / (std::string{ to_string(kind) } + "_" + rep);
            write_run(dir.string(), r, plan, config{});
            reports.push_back(format_report({ r.report }, report_format::csv));
        }
        std::size_t files = 0;
        std::size_t same = 0;
        for (const auto &entry : fs::recursive_directory_iterator(root / (std::string{ to_string(kind) } + "_a"))) {
            if (!entry.is_regular_file()) {
                continue;
            }
            const auto rel = fs::relative(entry.path(), root / (std::string{ to_string(kind) } + "_a"));
            ++files;
            same += slurp(entry.path()) == slurp(root / (std::string{ to_string(kind) } + "_b") / rel);
        }
        const bool k_ok = files > 0 && same == files && reports[0] == reports[1];
        ok = ok && k_ok;
        o.details.push_back(std::string{ to_string(kind) } + ": " + std::to_string(same) + "/" + std::to_string(files) + " run files identical, report " + (reports[0] == reports[1] ? "identical" : "differs"));
    }
    o.pass = ok;
    o.summary = "two identical runs per model kind: checkpoints, predictions, metrics, report";
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<outcome()>>> criteria{
        { "gradient_correctness", gradient_correctness },
        { "adamw_unit_step", adamw_unit_step },
        { "mfcc_oracle", mfcc_oracle },
        { "acoustic_ground_truth", acoustic_ground_truth },
        { "fold_disjointness", fold_disjointness },
        { "metric_fidelity", metric_fidelity },
        { "learning_sanity", learning_sanity },
        { "fusion_gain", fusion_gain },
        { "determinism", determinism },
    };
    int failed = 0;
    for (const auto &[name, run] : criteria) {
        outcome o;
        try {
            o = run();
        } catch (const std::exception &e) {
            o.pass = false;
            o.summary = std::string{ "exception: " } + e.what();
        }
        failed += o.pass ? 0 : 1;
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.summary << "\n";
        for (const auto &d : o.details) {
            std::cout << "       " << d << "\n";
        }
        std::cout.flush();
    }
    std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria passed\n";
    return failed == 0 ? 0 : 1;
}
