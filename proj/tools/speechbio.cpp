// speechbio: feature extraction, fold planning, training, evaluation and
// reporting for speech-based depression/anxiety screening.

#include "speechbio/speechbio.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#ifndef SPEECHBIO_DEFAULT_LEXICON
#define SPEECHBIO_DEFAULT_LEXICON "data/vad_lexicon.csv"
#endif

namespace fs = std::filesystem;
using namespace speechbio;

namespace {

struct global_options {
    std::string config_path;
    std::vector<std::string> overrides;

    [[nodiscard]] config load() const {
        config c = config_path.empty() ? config{} : config::from_file(config_path);
        for (const auto &kv : overrides) {
            c.apply_override(kv);
        }
        return c;
    }
};

void write_text(const std::string &path, const std::string &text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out{ path };
    if (!out) {
        throw error{ "cannot write " + path };
    }
    out << text;
}

int run_extract(const config &c, const std::string &manifest, const std::string &out, std::string lexicon) {
    const auto records = load_manifest(manifest);
    if (lexicon.empty()) {
        lexicon = c.get_string("vad_lexicon", SPEECHBIO_DEFAULT_LEXICON);
    }
    const vad_lexicon lex = vad_lexicon::from_csv(lexicon);
    const auto ap = acoustic_params::from_config(c);
    const auto lp = linguistic_params::from_config(c);
    feature_table t;
    t.names = handcrafted_feature_names();
    std::vector<std::string> order;
    for (const auto &r : records) {
        try {
            const audio_buffer audio = load_wav(r.audio_path);
            t.rows[r.sample_id] = extract_features(audio, read_text_file(r.transcript_path), lex, ap, lp);
        } catch (const std::exception &e) {
            throw error{ "sample " + r.sample_id + ": " + e.what() };
        }
        order.push_back(r.sample_id);
    }
    write_features(out, t, order);
    std::cerr << "extracted " << t.names.size() << " features for " << order.size() << " samples\n";
    return 0;
}

int run_folds(const std::string &manifest, int k, std::uint64_t seed, const std::string &dis, const std::string &out) {
    const auto records = load_manifest(manifest);
    const fold_plan plan = make_folds(records, k, seed, parse_disease(dis));
    save_fold_plan(out, plan);
    std::cerr << "assigned " << plan.assignment.size() << " subjects to " << k << " folds\n";
    return 0;
}

struct train_options {
    std::string disease = "depression";
    std::string model = "baseline";
    std::string manifest;
    std::string features;
    std::string embeddings;
    std::string plan;
    std::string out;
    std::uint64_t seed = 0;
};

int run_train(config c, const train_options &o) {
    c.set("disease", o.disease);
    c.set("model", o.model);
    c.set("seed", std::to_string(o.seed));
    const disease dis = parse_disease(o.disease);
    const model_kind kind = parse_model_kind(o.model);
    const auto records = load_manifest(o.manifest);
    const feature_table features = read_features(o.features);
    const fold_plan plan = load_fold_plan(o.plan);
    std::optional<embedding_index> idx;
    if (kind == model_kind::fusion) {
        if (o.embeddings.empty()) {
            throw config_error{ "--embeddings is required for the fusion model" };
        }
        idx = load_embedding_index(o.embeddings);
    }
    const run_inputs in{ &records, &features, idx ? &*idx : nullptr, &plan };
    const run_result r = train_eval(in, dis, kind, train_params::from_config(c), o.seed, &std::cerr);
    write_run(o.out, r, plan, c);
    std::cout << format_report({ r.report }, report_format::text);
    return 0;
}

int run_evaluate(const std::string &rundir) {
    const metrics_report stored = load_report(rundir);
    const metrics_report again = evaluate_run(rundir);
    std::cout << format_report({ again }, report_format::text);
    if (stored.to_json() != again.to_json()) {
        std::cerr << "error: metrics recomputed from predictions differ from " << (fs::path{ rundir } / "metrics.json").string() << "\n";
        return 1;
    }
    std::cerr << "metrics.json matches the saved predictions\n";
    return 0;
}

int run_report(const std::vector<std::string> &rundirs, const std::string &format, const std::string &out) {
    std::vector<metrics_report> reports;
    for (const auto &d : rundirs) {
        reports.push_back(load_report(d));
    }
    if (format != "text" && format != "csv") {
        throw config_error{ "--format must be text or csv" };
    }
    write_text(out, format_report(reports, format == "csv" ? report_format::csv : report_format::text));
    return 0;
}

struct synth_options {
    std::size_t subjects = 200;
    std::size_t samples = 2;
    double positive_rate = -1.0;
    double signal = 3.0;
    std::uint64_t seed = 0;
    std::string disease = "depression";
    std::string out;
    bool media = false;
    bool no_embeddings = false;
};

int run_synth(const config &c, const synth_options &o, const CLI::App &cmd) {
    synthetic_params p = synthetic_params::from_config(c);
    if (cmd.count("--subjects") != 0) {
        p.subjects = o.subjects;
    }
    if (cmd.count("--samples-per-subject") != 0) {
        p.samples_per_subject = o.samples;
    }
    if (cmd.count("--signal") != 0) {
        p.signal_strength = o.signal;
    }
    p.seed = o.seed;
    p.media = o.media;
    p.embeddings = !o.no_embeddings;
    const disease dis = parse_disease(o.disease);
    if (o.positive_rate >= 0.0) {
        (dis == disease::depression ? p.depression_rate : p.anxiety_rate) = o.positive_rate;
    }
    const auto ds = make_synthetic_dataset(p, dis);
    write_synthetic_dataset(o.out, ds, p);
    std::cerr << "wrote " << ds.records.size() << " samples to " << o.out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{ "Speech biomarker screening for depression and anxiety" };
    app.require_subcommand(1);
    global_options g;
    app.add_option("--config", g.config_path, "key = value configuration file")->check(CLI::ExistingFile);
    app.add_option("--set", g.overrides, "override a configuration key (key=value), repeatable");

    std::string manifest;
    std::string out;

    auto *extract = app.add_subcommand("extract", "hand-crafted acoustic + linguistic features per sample");
    std::string lexicon;
    extract->add_option("--manifest", manifest, "sample manifest CSV")->required()->check(CLI::ExistingFile);
    extract->add_option("--out", out, "feature CSV to write")->required();
    extract->add_option("--lexicon", lexicon, "VAD lexicon CSV (default: config key vad_lexicon)");

    auto *folds = app.add_subcommand("folds", "subject-disjoint stratified fold plan");
    int k = 5;
    std::uint64_t fold_seed = 0;
    std::string fold_disease = "depression";
    folds->add_option("--manifest", manifest, "sample manifest CSV")->required()->check(CLI::ExistingFile);
    folds->add_option("--k", k, "number of folds")->capture_default_str();
    folds->add_option("--seed", fold_seed, "shuffle seed")->capture_default_str();
    folds->add_option("--disease", fold_disease, "label used for stratification")->check(CLI::IsMember({ "depression", "anxiety" }))->capture_default_str();
    folds->add_option("--out", out, "plan JSON to write")->required();

    auto *train = app.add_subcommand("train", "cross-validated training and held-out scoring");
    train_options to;
    train->add_option("--disease", to.disease)->check(CLI::IsMember({ "depression", "anxiety" }))->capture_default_str();
    train->add_option("--model", to.model)->check(CLI::IsMember({ "baseline", "fusion" }))->capture_default_str();
    train->add_option("--manifest", to.manifest)->required()->check(CLI::ExistingFile);
    train->add_option("--features", to.features)->required()->check(CLI::ExistingFile);
    train->add_option("--embeddings", to.embeddings, "directory holding index.csv (fusion only)");
    train->add_option("--plan", to.plan)->required()->check(CLI::ExistingFile);
    train->add_option("--seed", to.seed, "initialization and batching seed")->capture_default_str();
    train->add_option("--out", to.out, "run directory")->required();

    auto *evaluate = app.add_subcommand("evaluate", "recompute metrics from a run's predictions");
    std::string rundir;
    evaluate->add_option("--rundir", rundir)->required()->check(CLI::ExistingDirectory);

    auto *report = app.add_subcommand("report", "results table over run directories");
    std::vector<std::string> rundirs;
    std::string format = "text";
    report->add_option("--rundirs", rundirs)->required()->check(CLI::ExistingDirectory);
    report->add_option("--format", format)->check(CLI::IsMember({ "text", "csv" }))->capture_default_str();
    report->add_option("--out", out, "file to write (default stdout)");

    auto *synth = app.add_subcommand("synth", "seeded synthetic cohort");
    synth_options so;
    synth->add_option("--subjects", so.subjects)->capture_default_str();
    synth->add_option("--samples-per-subject", so.samples)->capture_default_str();
    synth->add_option("--positive-rate", so.positive_rate, "positive fraction for --disease (default 0.253 depression, 0.128 anxiety)");
    synth->add_option("--signal", so.signal, "mean shift of the signal features, in standard deviations")->capture_default_str();
    synth->add_option("--seed", so.seed)->capture_default_str();
    synth->add_option("--disease", so.disease, "disease carried by the embedding signal and --positive-rate")->check(CLI::IsMember({ "depression", "anxiety" }))->capture_default_str();
    synth->add_flag("--media", so.media, "also write WAV recordings and transcripts");
    synth->add_flag("--no-embeddings", so.no_embeddings, "skip embedding files");
    synth->add_option("--out", so.out)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        const config c = g.load();
        if (*extract) {
            return run_extract(c, manifest, out, lexicon);
        }
        if (*folds) {
            return run_folds(manifest, k, fold_seed, fold_disease, out);
        }
        if (*train) {
            return run_train(c, to);
        }
        if (*evaluate) {
            return run_evaluate(rundir);
        }
        if (*report) {
            return run_report(rundirs, format, out);
        }
        if (*synth) {
            return run_synth(c, so, *synth);
        }
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
