#pragma once

// Precomputed encoder hidden-state sequences.
//
//   "SBEM"        4 bytes magic
//   u32 version   1
//   u32 rows
//   u32 dim
//   u8  source    0 = audio, 1 = text
//   rows x dim little-endian f32, row-major
//
// An index CSV `sample_id,source,path,rows,dim,valid` lists the files; `valid`
// counts the leading rows that are real frames or tokens (the rest is padding).

#include "speechbio/csv.hpp"
#include "speechbio/tensor.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

namespace speechbio {

inline constexpr std::uint32_t embedding_version = 1;

/// Longest sequence fed to a branch; longer inputs keep their first frames.
inline constexpr std::size_t max_sequence_rows = 4096;

enum class embedding_source : std::uint8_t { audio = 0, text = 1 };

inline const char *to_string(embedding_source s) { return s == embedding_source::audio ? "audio" : "text"; }

inline embedding_source parse_embedding_source(const std::string &s) {
    if (s == "audio") {
        return embedding_source::audio;
    }
    if (s == "text") {
        return embedding_source::text;
    }
    throw format_error{ "unknown embedding source '" + s + "'" };
}

struct embedding_sequence {
    embedding_source source = embedding_source::audio;
    std::size_t rows = 0;
    std::size_t dim = 0;
    std::vector<float> values;  // rows * dim
};

inline std::string encode_embedding(const embedding_sequence &e) {
    if (e.rows == 0 || e.dim == 0 || e.values.size() != e.rows * e.dim) {
        throw shape_error{ "embedding: values do not match rows x dim" };
    }
    std::string out = "SBEM";
    auto put_u32 = [&out](std::uint32_t v) {
        for (int i = 0; i < 4; ++i) {
            out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
        }
    };
    put_u32(embedding_version);
    put_u32(static_cast<std::uint32_t>(e.rows));
    put_u32(static_cast<std::uint32_t>(e.dim));
    out.push_back(static_cast<char>(e.source));
    for (const float f : e.values) {
        std::uint32_t raw = 0;
        std::memcpy(&raw, &f, sizeof raw);
        put_u32(raw);
    }
    return out;
}

inline embedding_sequence decode_embedding(const std::string &bytes, const std::string &what = "embedding") {
    constexpr std::size_t header = 17;
    if (bytes.size() < header || bytes.compare(0, 4, "SBEM") != 0) {
        throw format_error{ what + ": not an SBEM file" };
    }
    auto u32 = [&bytes](std::size_t off) {
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) {
            v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[off + i])) << (8 * i);
        }
        return v;
    };
    if (u32(4) != embedding_version) {
        throw format_error{ what + ": unsupported version " + std::to_string(u32(4)) };
    }
    embedding_sequence e;
    e.rows = u32(8);
    e.dim = u32(12);
    const auto tag = static_cast<unsigned char>(bytes[16]);
    if (tag > 1) {
        throw format_error{ what + ": bad source tag " + std::to_string(tag) };
    }
    e.source = static_cast<embedding_source>(tag);
    if (e.rows == 0 || e.dim == 0) {
        throw format_error{ what + ": empty sequence" };
    }
    if (bytes.size() != header + 4 * e.rows * e.dim) {
        throw format_error{ what + ": payload length does not match rows x dim" };
    }
    e.values.resize(e.rows * e.dim);
    for (std::size_t i = 0; i < e.values.size(); ++i) {
        const std::uint32_t raw = u32(header + 4 * i);
        std::memcpy(&e.values[i], &raw, sizeof raw);
        if (!std::isfinite(e.values[i])) {
            throw format_error{ what + ": non-finite value at element " + std::to_string(i) };
        }
    }
    return e;
}

inline void write_embedding(const std::string &path, const embedding_sequence &e) {
    const std::string bytes = encode_embedding(e);
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out{ tmp, std::ios::binary };
        if (!out) {
            throw error{ "cannot write " + tmp };
        }
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    }
    std::filesystem::rename(tmp, path);
}

inline embedding_sequence read_embedding(const std::string &path) {
    std::ifstream in{ path, std::ios::binary };
    if (!in) {
        throw error{ "cannot read embedding file " + path };
    }
    const std::string bytes{ std::istreambuf_iterator<char>{ in }, std::istreambuf_iterator<char>{} };
    return decode_embedding(bytes, path);
}

struct embedding_entry {
    std::string sample_id;
    embedding_source source = embedding_source::audio;
    std::string path;  // resolved against the index directory
    std::size_t rows = 0;
    std::size_t dim = 0;
    std::size_t valid = 0;
};

struct embedding_index {
    std::map<std::string, embedding_entry> audio;
    std::map<std::string, embedding_entry> text;

    [[nodiscard]] const embedding_entry *find(const std::string &sample_id, embedding_source s) const {
        const auto &m = s == embedding_source::audio ? audio : text;
        const auto it = m.find(sample_id);
        return it == m.end() ? nullptr : &it->second;
    }
};

inline const char *embedding_index_header = "sample_id,source,path,rows,dim,valid";

/// Reads `index.csv` from an embeddings directory.
inline embedding_index load_embedding_index(const std::string &dir) {
    const std::filesystem::path base{ dir };
    const csv_table t = read_csv((base / "index.csv").string());
    if (join(t.header) != embedding_index_header) {
        throw parse_error{ t.path, 1, std::string{ "header must be " } + embedding_index_header };
    }
    embedding_index idx;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto &f = t.rows[r];
        const std::size_t line = t.line_numbers[r];
        embedding_entry e;
        e.sample_id = f[0];
        try {
            e.source = parse_embedding_source(f[1]);
            e.rows = static_cast<std::size_t>(parse_int(f[3]));
            e.dim = static_cast<std::size_t>(parse_int(f[4]));
            e.valid = static_cast<std::size_t>(parse_int(f[5]));
        } catch (const error &ex) {
            throw parse_error{ t.path, line, ex.what() };
        }
        if (e.sample_id.empty() || e.rows == 0 || e.dim == 0 || e.valid == 0 || e.valid > e.rows) {
            throw parse_error{ t.path, line, "need a sample_id and 1 <= valid <= rows, dim >= 1" };
        }
        const std::filesystem::path p{ f[2] };
        e.path = p.is_absolute() ? p.string() : (base / p).string();
        auto &m = e.source == embedding_source::audio ? idx.audio : idx.text;
        if (!m.emplace(e.sample_id, e).second) {
            throw parse_error{ t.path, line, "duplicate " + f[1] + " entry for " + e.sample_id };
        }
    }
    return idx;
}

inline void write_embedding_index(const std::string &dir, const std::vector<embedding_entry> &entries) {
    std::ofstream out{ (std::filesystem::path{ dir } / "index.csv").string() };
    if (!out) {
        throw error{ "cannot write embedding index in " + dir };
    }
    out << embedding_index_header << "\n";
    for (const auto &e : entries) {
        out << e.sample_id << "," << to_string(e.source) << "," << e.path << "," << e.rows << "," << e.dim << "," << e.valid << "\n";
    }
}

/// Loads the valid rows of an indexed file as a [rows, dim] tensor, capped at max_sequence_rows.
inline nn::tensor load_sequence(const embedding_entry &e) {
    const embedding_sequence s = read_embedding(e.path);
    if (s.rows != e.rows || s.dim != e.dim || s.source != e.source) {
        throw format_error{ e.path + ": file header disagrees with index entry for " + e.sample_id };
    }
    const std::size_t n = std::min(e.valid, max_sequence_rows);
    nn::tensor t = nn::tensor::matrix(n, s.dim);
    for (std::size_t i = 0; i < n * s.dim; ++i) {
        t[i] = static_cast<double>(s.values[i]);
    }
    return t;
}

}  // namespace speechbio
