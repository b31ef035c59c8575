#pragma once

// Transcript features, one concrete statistic family per linguistic feature
// group:
//   lexical complexity and richness  -> TTR, MATTR-50, Honore's R, Brunet's W
//   syntactic complexity             -> utterance/word length, subordination
//   local coherence                  -> adjacent-utterance TF cosine
//   discourse mapping                -> utterance similarity graph
//   utterance cohesion               -> tense concordance
//   sentiment                        -> valence/arousal/dominance lexicon means
//   word finding difficulty          -> filled pauses, immediate repetitions

#include "speechbio/common.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

namespace speechbio {

class empty_transcript_error : public error {
  public:
    using error::error;
};

class lexicon_error : public error {
  public:
    using error::error;
};

using utterance = std::vector<std::string>;

struct transcript {
    std::string raw_text;
    std::vector<utterance> utterances;

    [[nodiscard]] std::size_t token_count() const {
        std::size_t n = 0;
        for (const auto &u : utterances) {
            n += u.size();
        }
        return n;
    }

    [[nodiscard]] std::vector<std::string> tokens() const {
        std::vector<std::string> out;
        for (const auto &u : utterances) {
            out.insert(out.end(), u.begin(), u.end());
        }
        return out;
    }
};

namespace detail {

inline bool is_word_byte(char c) {
    const auto u = static_cast<unsigned char>(c);
    return std::isalnum(u) || u >= 0x80;
}

inline std::string clean_token(const std::string &raw) {
    std::string t;
    for (const char c : raw) {
        if (is_word_byte(c) || c == '\'') {
            t.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        }
    }
    // apostrophes survive only between word characters
    std::string out;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] == '\'') {
            const bool inner = i > 0 && i + 1 < t.size() && is_word_byte(t[i - 1]) && is_word_byte(t[i + 1]);
            if (!inner) {
                continue;
            }
        }
        out.push_back(t[i]);
    }
    return out;
}

}  // namespace detail

/// Utterances split on . ! ?, tokens on whitespace, lowercased.
inline transcript tokenize(const std::string &raw_text) {
    transcript t;
    t.raw_text = raw_text;
    std::string current;
    const auto flush = [&] {
        utterance u;
        std::string word;
        const auto push_word = [&] {
            auto c = detail::clean_token(word);
            if (!c.empty()) {
                u.push_back(std::move(c));
            }
            word.clear();
        };
        for (const char c : current) {
            if (std::isspace(static_cast<unsigned char>(c))) {
                push_word();
            } else {
                word.push_back(c);
            }
        }
        push_word();
        if (!u.empty()) {
            t.utterances.push_back(std::move(u));
        }
        current.clear();
    };
    for (const char c : raw_text) {
        if (c == '.' || c == '!' || c == '?') {
            flush();
        } else {
            current.push_back(c);
        }
    }
    flush();
    if (t.utterances.empty()) {
        throw empty_transcript_error{ "tokenize: transcript has no tokens" };
    }
    return t;
}

// ---------------------------------------------------------------------------
// Lexical complexity and richness
// ---------------------------------------------------------------------------

struct lexical_richness_result {
    double ttr = 0.0;
    double mattr_50 = 0.0;
    double honore_r = 0.0;
    double brunet_w = 0.0;
};

inline constexpr double honore_cap = 1e4;

inline lexical_richness_result lexical_richness(const transcript &t, std::size_t mattr_window = 50) {
    const auto tokens = t.tokens();
    if (tokens.empty()) {
        throw empty_transcript_error{ "lexical_richness: zero tokens" };
    }
    std::map<std::string, std::size_t> freq;
    for (const auto &w : tokens) {
        ++freq[w];
    }
    const auto n = static_cast<double>(tokens.size());
    const auto v = static_cast<double>(freq.size());
    const auto hapax = static_cast<double>(std::count_if(freq.begin(), freq.end(), [](const auto &kv) { return kv.second == 1; }));

    lexical_richness_result r;
    r.ttr = v / n;
    if (tokens.size() < mattr_window) {
        r.mattr_50 = r.ttr;
    } else {
        std::map<std::string, std::size_t> window;
        for (std::size_t i = 0; i < mattr_window; ++i) {
            ++window[tokens[i]];
        }
        double acc = static_cast<double>(window.size()) / static_cast<double>(mattr_window);
        for (std::size_t i = mattr_window; i < tokens.size(); ++i) {
            ++window[tokens[i]];
            auto it = window.find(tokens[i - mattr_window]);
            if (--it->second == 0) {
                window.erase(it);
            }
            acc += static_cast<double>(window.size()) / static_cast<double>(mattr_window);
        }
        r.mattr_50 = acc / static_cast<double>(tokens.size() - mattr_window + 1);
    }
    r.honore_r = hapax == v ? honore_cap : std::min(honore_cap, 100.0 * std::log(n) / (1.0 - hapax / v));
    r.brunet_w = std::pow(n, std::pow(v, -0.165));
    return r;
}

// ---------------------------------------------------------------------------
// Syntactic complexity
// ---------------------------------------------------------------------------

struct syntactic_result {
    double mean_utterance_len = 0.0;
    double mean_word_len = 0.0;
    double subordination_rate = 0.0;
};

inline const std::vector<std::string> &default_subordinators() {
    static const std::vector<std::string> s{ "because", "although", "while", "since", "that", "which", "who", "if", "when" };
    return s;
}

inline syntactic_result syntactic_complexity(const transcript &t, const std::vector<std::string> &subordinators = default_subordinators()) {
    if (t.utterances.empty()) {
        throw empty_transcript_error{ "syntactic_complexity: no utterances" };
    }
    const std::set<std::string> subs(subordinators.begin(), subordinators.end());
    std::size_t n = 0;
    std::size_t chars = 0;
    std::size_t sub = 0;
    for (const auto &u : t.utterances) {
        for (const auto &w : u) {
            ++n;
            chars += w.size();
            sub += subs.count(w);
        }
    }
    syntactic_result r;
    r.mean_utterance_len = static_cast<double>(n) / static_cast<double>(t.utterances.size());
    r.mean_word_len = n ? static_cast<double>(chars) / static_cast<double>(n) : 0.0;
    r.subordination_rate = n ? static_cast<double>(sub) / static_cast<double>(n) : 0.0;
    return r;
}

// ---------------------------------------------------------------------------
// Coherence and discourse graph
// ---------------------------------------------------------------------------

/// Term-frequency cosine between two utterances.
inline double utterance_cosine(const utterance &a, const utterance &b) {
    std::map<std::string, double> ca;
    std::map<std::string, double> cb;
    for (const auto &w : a) {
        ca[w] += 1.0;
    }
    for (const auto &w : b) {
        cb[w] += 1.0;
    }
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (const auto &[w, c] : ca) {
        na += c * c;
        const auto it = cb.find(w);
        if (it != cb.end()) {
            dot += c * it->second;
        }
    }
    for (const auto &[w, c] : cb) {
        nb += c * c;
    }
    if (na == 0.0 || nb == 0.0) {
        return 0.0;
    }
    return std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
}

struct coherence_result {
    double mean = 0.0;
    double min = 0.0;
    /// Fewer than two utterances; both values are 0.
    bool absent = false;
};

inline coherence_result local_coherence(const transcript &t) {
    coherence_result r;
    if (t.utterances.size() < 2) {
        r.absent = true;
        return r;
    }
    double acc = 0.0;
    double lo = 1.0;
    for (std::size_t i = 1; i < t.utterances.size(); ++i) {
        const double c = utterance_cosine(t.utterances[i - 1], t.utterances[i]);
        acc += c;
        lo = std::min(lo, c);
    }
    r.mean = acc / static_cast<double>(t.utterances.size() - 1);
    r.min = lo;
    return r;
}

struct discourse_result {
    double edge_density = 0.0;
    double largest_component = 0.0;
};

/// Graph over utterances with an edge wherever cosine >= threshold.
inline discourse_result discourse_map(const transcript &t, double threshold = 0.3) {
    const std::size_t u = t.utterances.size();
    if (u == 0) {
        throw empty_transcript_error{ "discourse_map: no utterances" };
    }
    std::vector<std::size_t> parent(u);
    std::iota(parent.begin(), parent.end(), std::size_t{ 0 });
    const auto find = [&](std::size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    std::size_t edges = 0;
    for (std::size_t i = 0; i < u; ++i) {
        for (std::size_t j = i + 1; j < u; ++j) {
            if (utterance_cosine(t.utterances[i], t.utterances[j]) >= threshold) {
                ++edges;
                parent[find(i)] = find(j);
            }
        }
    }
    std::map<std::size_t, std::size_t> sizes;
    for (std::size_t i = 0; i < u; ++i) {
        ++sizes[find(i)];
    }
    std::size_t largest = 0;
    for (const auto &[root, s] : sizes) {
        largest = std::max(largest, s);
    }
    discourse_result r;
    r.edge_density = u < 2 ? 0.0 : static_cast<double>(edges) / (static_cast<double>(u) * static_cast<double>(u - 1) / 2.0);
    r.largest_component = static_cast<double>(largest) / static_cast<double>(u);
    return r;
}

// ---------------------------------------------------------------------------
// Tense concordance
// ---------------------------------------------------------------------------

inline const std::set<std::string> &irregular_past_verbs() {
    static const std::set<std::string> s{ "was", "were", "had", "did", "went", "came", "saw", "said", "made", "took", "got", "gave", "found", "thought", "told", "felt", "became", "left", "knew", "kept", "began", "brought", "bought", "ran", "sat", "stood", "heard", "met", "paid", "slept", "spent", "wrote", "ate", "drove", "spoke", "woke", "won", "lost", "sent", "built", "taught", "caught", "fell", "held", "read", "understood" };
    return s;
}

inline const std::set<std::string> &present_verbs() {
    static const std::set<std::string> s{ "is", "am", "are", "do", "does", "have", "has", "go", "goes", "come", "comes", "see", "sees", "say", "says", "make", "makes", "take", "takes", "get", "gets", "give", "gives", "find", "finds", "think", "thinks", "tell", "tells", "feel", "feels", "become", "becomes", "leave", "leaves", "know", "knows", "keep", "keeps", "walk", "walks", "talk", "talks", "work", "works", "play", "plays", "like", "likes", "love", "loves", "want", "wants", "need", "needs", "try", "tries", "live", "lives", "run", "runs", "sleep", "sleeps", "eat", "eats", "enjoy", "enjoys", "hope", "hopes", "plan", "plans", "look", "looks", "help", "helps", "spend", "spends", "watch", "watches", "read", "reads", "write", "writes", "start", "starts", "stay", "stays" };
    return s;
}

/// Words ending in "ed" that are not past-tense forms.
inline const std::set<std::string> &ed_exceptions() {
    static const std::set<std::string> s{ "need", "feed", "seed", "speed", "bed", "red", "shed", "indeed", "weed", "bleed", "breed", "greed", "proceed", "succeed", "exceed", "hundred", "sacred", "naked", "wicked", "tired", "bored", "excited", "interested", "scared", "married", "worried" };
    return s;
}

enum class tense { none, past, present };

inline tense utterance_tense(const utterance &u) {
    int past = 0;
    int present = 0;
    for (const auto &w : u) {
        const bool ed = w.size() >= 4 && w.compare(w.size() - 2, 2, "ed") == 0 && ed_exceptions().count(w) == 0;
        if (ed || irregular_past_verbs().count(w) != 0) {
            ++past;
        } else if (present_verbs().count(w) != 0) {
            ++present;
        }
    }
    if (past == 0 && present == 0) {
        return tense::none;
    }
    return past >= present ? tense::past : tense::present;  // ties go to past
}

/// Fraction of verb-bearing utterances whose tense matches the majority.
inline double tense_concordance(const transcript &t) {
    int past = 0;
    int present = 0;
    for (const auto &u : t.utterances) {
        switch (utterance_tense(u)) {
            case tense::past: ++past; break;
            case tense::present: ++present; break;
            case tense::none: break;
        }
    }
    const int classified = past + present;
    if (classified <= 1) {
        return 1.0;
    }
    return static_cast<double>(std::max(past, present)) / static_cast<double>(classified);
}

// ---------------------------------------------------------------------------
// Sentiment
// ---------------------------------------------------------------------------

struct vad_score {
    double valence = 0.5;
    double arousal = 0.5;
    double dominance = 0.5;
};

/// Word -> (valence, arousal, dominance), all in [0, 1].
class vad_lexicon {
  public:
    vad_lexicon() = default;

    /// CSV with header `word,valence,arousal,dominance`.
    static vad_lexicon from_csv(const std::string &path) {
        std::ifstream in{ path };
        if (!in) {
            throw lexicon_error{ "cannot open lexicon: " + path };
        }
        vad_lexicon lex;
        std::string line;
        std::size_t row = 0;
        while (std::getline(in, line)) {
            ++row;
            const auto t = trim(line);
            if (row == 1) {
                if (t != "word,valence,arousal,dominance") {
                    throw lexicon_error{ path + ":1: expected header word,valence,arousal,dominance" };
                }
                continue;
            }
            if (t.empty()) {
                continue;
            }
            const auto cells = split(t, ',');
            if (cells.size() != 4 || trim(cells[0]).empty()) {
                throw lexicon_error{ path + ":" + std::to_string(row) + ": expected 4 fields" };
            }
            vad_score s;
            try {
                s.valence = parse_double(trim(cells[1]));
                s.arousal = parse_double(trim(cells[2]));
                s.dominance = parse_double(trim(cells[3]));
            } catch (const error &e) {
                throw lexicon_error{ path + ":" + std::to_string(row) + ": " + e.what() };
            }
            for (const double d : { s.valence, s.arousal, s.dominance }) {
                if (!(d >= 0.0 && d <= 1.0)) {
                    throw lexicon_error{ path + ":" + std::to_string(row) + ": score outside [0, 1]" };
                }
            }
            lex.add(trim(cells[0]), s);
        }
        if (row == 0) {
            throw lexicon_error{ path + ": empty lexicon file" };
        }
        return lex;
    }

    void add(const std::string &word, vad_score s) {
        std::string w;
        for (const char c : word) {
            w.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        }
        entries_[w] = s;
    }

    [[nodiscard]] const vad_score *find(const std::string &word) const {
        const auto it = entries_.find(word);
        return it == entries_.end() ? nullptr : &it->second;
    }

    [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }

  private:
    std::unordered_map<std::string, vad_score> entries_;
};

struct sentiment_result {
    vad_score mean;
    /// No token was in the lexicon; mean is neutral 0.5.
    bool all_oov = false;
};

inline sentiment_result sentiment_vad(const transcript &t, const vad_lexicon &lex) {
    sentiment_result r;
    double v = 0.0;
    double a = 0.0;
    double d = 0.0;
    std::size_t hits = 0;
    for (const auto &u : t.utterances) {
        for (const auto &w : u) {
            if (const auto *s = lex.find(w)) {
                v += s->valence;
                a += s->arousal;
                d += s->dominance;
                ++hits;
            }
        }
    }
    if (hits == 0) {
        r.all_oov = true;
        return r;
    }
    const auto n = static_cast<double>(hits);
    r.mean = { v / n, a / n, d / n };
    return r;
}

// ---------------------------------------------------------------------------
// Word finding difficulty
// ---------------------------------------------------------------------------

inline const std::vector<std::string> &default_filled_pauses() {
    static const std::vector<std::string> s{ "um", "uh", "er", "ah", "hmm", "mm" };
    return s;
}

struct word_finding_result {
    int filled_pause_count = 0;
    double filled_pause_rate_per100 = 0.0;
    int immediate_repetition_count = 0;
};

inline word_finding_result word_finding(const transcript &t, const std::vector<std::string> &filled_pauses = default_filled_pauses()) {
    const auto tokens = t.tokens();
    if (tokens.empty()) {
        throw empty_transcript_error{ "word_finding: zero tokens" };
    }
    const std::set<std::string> fillers(filled_pauses.begin(), filled_pauses.end());
    word_finding_result r;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const bool filler = fillers.count(tokens[i]) != 0;
        if (filler) {
            ++r.filled_pause_count;
        } else if (i > 0 && tokens[i] == tokens[i - 1]) {
            ++r.immediate_repetition_count;
        }
    }
    r.filled_pause_rate_per100 = 100.0 * r.filled_pause_count / static_cast<double>(tokens.size());
    return r;
}

// ---------------------------------------------------------------------------
// Full linguistic vector
// ---------------------------------------------------------------------------

struct linguistic_params {
    std::vector<std::string> subordinators = default_subordinators();
    std::vector<std::string> filled_pauses = default_filled_pauses();
    double discourse_threshold = 0.3;
    std::size_t mattr_window = 50;

    static linguistic_params from_config(const config &c) {
        linguistic_params p;
        p.subordinators = c.get_list("subordinators", p.subordinators);
        p.filled_pauses = c.get_list("filled_pauses", p.filled_pauses);
        p.discourse_threshold = c.get_double("discourse_threshold", p.discourse_threshold);
        p.mattr_window = static_cast<std::size_t>(c.get_int("mattr_window", static_cast<long long>(p.mattr_window)));
        return p;
    }
};

struct linguistic_feature_vector {
    double ttr = 0.0;
    double mattr_50 = 0.0;
    double honore_r = 0.0;
    double brunet_w = 0.0;
    double mean_utterance_len = 0.0;
    double mean_word_len = 0.0;
    double subordination_rate = 0.0;
    double coherence_mean = 0.0;
    double coherence_min = 0.0;
    double discourse_edge_density = 0.0;
    double discourse_largest_component = 0.0;
    double tense_concordance = 0.0;
    double valence_mean = 0.5;
    double arousal_mean = 0.5;
    double dominance_mean = 0.5;
    int filled_pause_count = 0;
    double filled_pause_rate_per100 = 0.0;
    int immediate_repetition_count = 0;

    bool coherence_absent = false;
    bool sentiment_oov = false;

    static const std::vector<std::string> &names() {
        static const std::vector<std::string> n{ "ttr", "mattr_50", "honore_r", "brunet_w", "mean_utterance_len", "mean_word_len", "subordination_rate", "coherence_mean", "coherence_min", "discourse_edge_density", "discourse_largest_component", "tense_concordance", "valence_mean", "arousal_mean", "dominance_mean", "filled_pause_count", "filled_pause_rate_per100", "immediate_repetition_count", "coherence_absent", "sentiment_oov" };
        return n;
    }

    static std::size_t dim() { return names().size(); }

    [[nodiscard]] std::vector<double> values() const {
        return { ttr, mattr_50, honore_r, brunet_w, mean_utterance_len, mean_word_len, subordination_rate, coherence_mean, coherence_min, discourse_edge_density, discourse_largest_component, tense_concordance, valence_mean, arousal_mean, dominance_mean, static_cast<double>(filled_pause_count), filled_pause_rate_per100, static_cast<double>(immediate_repetition_count), coherence_absent ? 1.0 : 0.0, sentiment_oov ? 1.0 : 0.0 };
    }
};

inline linguistic_feature_vector extract_linguistic(const std::string &raw_text, const vad_lexicon &lex, const linguistic_params &p = {}) {
    const auto t = tokenize(raw_text);
    linguistic_feature_vector v;

    const auto lr = lexical_richness(t, p.mattr_window);
    v.ttr = lr.ttr;
    v.mattr_50 = lr.mattr_50;
    v.honore_r = lr.honore_r;
    v.brunet_w = lr.brunet_w;

    const auto sc = syntactic_complexity(t, p.subordinators);
    v.mean_utterance_len = sc.mean_utterance_len;
    v.mean_word_len = sc.mean_word_len;
    v.subordination_rate = sc.subordination_rate;

    const auto co = local_coherence(t);
    v.coherence_mean = co.mean;
    v.coherence_min = co.min;
    v.coherence_absent = co.absent;

    const auto dm = discourse_map(t, p.discourse_threshold);
    v.discourse_edge_density = dm.edge_density;
    v.discourse_largest_component = dm.largest_component;

    v.tense_concordance = tense_concordance(t);

    const auto se = sentiment_vad(t, lex);
    v.valence_mean = se.mean.valence;
    v.arousal_mean = se.mean.arousal;
    v.dominance_mean = se.mean.dominance;
    v.sentiment_oov = se.all_oov;

    const auto wf = word_finding(t, p.filled_pauses);
    v.filled_pause_count = wf.filled_pause_count;
    v.filled_pause_rate_per100 = wf.filled_pause_rate_per100;
    v.immediate_repetition_count = wf.immediate_repetition_count;
    return v;
}

}  // namespace speechbio
