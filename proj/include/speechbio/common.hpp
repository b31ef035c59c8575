#pragma once

// Shared error types, deterministic RNG and the flat key-value config used by
// every stage of the pipeline.

#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <locale>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace speechbio {

/// Base of all errors raised by the library.
class error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Malformed container or header (WAV, checkpoint, embedding file).
class format_error : public error {
  public:
    using error::error;
};

/// Well-formed WAV that uses an encoding we do not decode.
class unsupported_codec_error : public error {
  public:
    using error::error;
};

/// Input is shorter than an operation needs (framing, MFCC deltas, ...).
class too_short_error : public error {
  public:
    using error::error;
};

class empty_input_error : public error {
  public:
    using error::error;
};

/// Shape or dimension mismatch between tensors / layers.
class shape_error : public error {
  public:
    using error::error;
};

class config_error : public error {
  public:
    using error::error;
};

/// Row-addressed CSV / manifest parse failure.
class parse_error : public error {
  public:
    parse_error(const std::string &file, std::size_t row, const std::string &what) :
        error{ file + ":" + std::to_string(row) + ": " + what },
        row_{ row } {}

    [[nodiscard]] std::size_t row() const noexcept { return row_; }

  private:
    std::size_t row_;
};

/**
 * Seeded pseudo random source.
 *
 * Wraps std::mt19937_64 (whose output sequence is fixed by the standard) and
 * derives uniform/normal variates by hand, so the same seed yields the same
 * numbers on every standard library.
 */
class rng {
  public:
    explicit rng(std::uint64_t seed = 0) : engine_{ seed } {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) {
            throw error{ "rng::below: empty range" };
        }
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t x = engine_();
        while (x >= limit) {
            x = engine_();
        }
        return x % n;
    }

    /// Standard normal via Box-Muller (no cached second variate).
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) {
            u1 = uniform();
        }
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    bool bernoulli(double p) { return uniform() < p; }

    template <typename T>
    void shuffle(std::vector<T> &v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

  private:
    std::mt19937_64 engine_;
};

inline std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) {
        ++b;
    }
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) {
        --e;
    }
    return std::string{ s.substr(b, e - b) };
}

inline std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == sep) {
            out.emplace_back(s.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

/// Decimal text that parses back to the same double.
inline std::string format_double(double v) {
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os.precision(17);
    os << v;
    return os.str();
}

inline double parse_double(const std::string &s) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception &) {
        throw error{ "not a number: '" + s + "'" };
    }
    if (pos != s.size()) {
        throw error{ "not a number: '" + s + "'" };
    }
    return v;
}

inline long long parse_int(const std::string &s) {
    std::size_t pos = 0;
    long long v = 0;
    try {
        v = std::stoll(s, &pos);
    } catch (const std::exception &) {
        throw error{ "not an integer: '" + s + "'" };
    }
    if (pos != s.size()) {
        throw error{ "not an integer: '" + s + "'" };
    }
    return v;
}

/**
 * Flat `key = value` configuration.
 *
 * Lines starting with `#` are comments. Later assignments override earlier
 * ones, which is how CLI `--set key=value` overrides are layered on top of a
 * file. Every getter takes the default so the documented defaults live next to
 * their use site.
 */
class config {
  public:
    config() = default;

    static config from_file(const std::string &path) {
        std::ifstream in{ path };
        if (!in) {
            throw config_error{ "cannot open config file: " + path };
        }
        config c;
        std::string line;
        std::size_t row = 0;
        while (std::getline(in, line)) {
            ++row;
            const std::string t = trim(line);
            if (t.empty() || t.front() == '#') {
                continue;
            }
            const auto eq = t.find('=');
            if (eq == std::string::npos) {
                throw parse_error{ path, row, "expected key = value" };
            }
            c.set(trim(std::string_view{ t }.substr(0, eq)), trim(std::string_view{ t }.substr(eq + 1)));
        }
        return c;
    }

    /// Applies a `key=value` override string.
    void apply_override(const std::string &kv) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) {
            throw config_error{ "override must look like key=value: " + kv };
        }
        set(trim(std::string_view{ kv }.substr(0, eq)), trim(std::string_view{ kv }.substr(eq + 1)));
    }

    void set(const std::string &key, const std::string &value) {
        if (key.empty()) {
            throw config_error{ "empty config key" };
        }
        values_[key] = value;
    }

    [[nodiscard]] bool contains(const std::string &key) const { return values_.count(key) != 0; }

    [[nodiscard]] double get_double(const std::string &key, double def) const {
        const auto it = values_.find(key);
        if (it == values_.end()) {
            return def;
        }
        try {
            return parse_double(it->second);
        } catch (const error &) {
            throw config_error{ "config key '" + key + "' is not a number: " + it->second };
        }
    }

    [[nodiscard]] long long get_int(const std::string &key, long long def) const {
        const auto it = values_.find(key);
        if (it == values_.end()) {
            return def;
        }
        try {
            return parse_int(it->second);
        } catch (const error &) {
            throw config_error{ "config key '" + key + "' is not an integer: " + it->second };
        }
    }

    [[nodiscard]] std::string get_string(const std::string &key, const std::string &def) const {
        const auto it = values_.find(key);
        return it == values_.end() ? def : it->second;
    }

    /// Comma separated list value.
    [[nodiscard]] std::vector<std::string> get_list(const std::string &key, const std::vector<std::string> &def) const {
        const auto it = values_.find(key);
        if (it == values_.end()) {
            return def;
        }
        std::vector<std::string> out;
        for (const auto &p : split(it->second, ',')) {
            auto t = trim(p);
            if (!t.empty()) {
                out.push_back(std::move(t));
            }
        }
        return out;
    }

    [[nodiscard]] const std::map<std::string, std::string> &entries() const noexcept { return values_; }

    /// Serializes as sorted `key = value` lines.
    [[nodiscard]] std::string to_string() const {
        std::string out;
        for (const auto &[k, v] : values_) {
            out += k + " = " + v + "\n";
        }
        return out;
    }

  private:
    std::map<std::string, std::string> values_;
};

}  // namespace speechbio
