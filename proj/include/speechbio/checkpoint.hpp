#pragma once

// Binary model checkpoints.
//
//   "SBCK"            4 bytes magic
//   u32 version       currently 1
//   u32 header_len    followed by header_len bytes of `key=value\n` text
//                     (model kind, seed, config echo, layer specs)
//   u32 param_count
//   per parameter:    u32 name_len, name, u32 rank, rank x u32 dims,
//                     product(dims) x f64 values, row-major
//
// All integers and floats are little-endian. Header keys are written sorted,
// so the same model and seed always produce the same bytes.

#include "speechbio/tensor.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace speechbio::nn {

inline constexpr std::uint32_t checkpoint_version = 1;

struct checkpoint {
    std::uint32_t version = checkpoint_version;
    std::map<std::string, std::string> header;
    std::vector<std::pair<std::string, tensor>> tensors;
};

namespace detail {

inline void put_u32(std::string &out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) {
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
}

inline void put_f64(std::string &out, double d) {
    std::uint64_t raw = 0;
    std::memcpy(&raw, &d, sizeof raw);
    for (int i = 0; i < 8; ++i) {
        out.push_back(static_cast<char>((raw >> (8 * i)) & 0xff));
    }
}

class byte_reader {
  public:
    explicit byte_reader(const std::string &bytes) : bytes_{ bytes } {}

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) {
            v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
        }
        pos_ += 4;
        return v;
    }

    double f64() {
        need(8);
        std::uint64_t raw = 0;
        for (int i = 0; i < 8; ++i) {
            raw |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
        }
        pos_ += 8;
        double d = 0.0;
        std::memcpy(&d, &raw, sizeof d);
        return d;
    }

    std::string bytes(std::size_t n) {
        need(n);
        std::string s = bytes_.substr(pos_, n);
        pos_ += n;
        return s;
    }

    [[nodiscard]] bool at_end() const noexcept { return pos_ == bytes_.size(); }

  private:
    void need(std::size_t n) const {
        if (bytes_.size() - pos_ < n) {
            throw format_error{ "checkpoint: truncated file" };
        }
    }

    const std::string &bytes_;
    std::size_t pos_ = 0;
};

}  // namespace detail

inline std::string encode_checkpoint(const std::map<std::string, std::string> &header, const parameter_list &params) {
    std::string out = "SBCK";
    detail::put_u32(out, checkpoint_version);
    std::string text;
    for (const auto &[k, v] : header) {
        if (k.find_first_of("=\n") != std::string::npos || v.find('\n') != std::string::npos) {
            throw format_error{ "checkpoint: header entries may not contain '=' in keys or newlines" };
        }
        text += k + "=" + v + "\n";
    }
    detail::put_u32(out, static_cast<std::uint32_t>(text.size()));
    out += text;
    detail::put_u32(out, static_cast<std::uint32_t>(params.size()));
    for (const auto *p : params) {
        detail::put_u32(out, static_cast<std::uint32_t>(p->name.size()));
        out += p->name;
        const auto &shape = p->value.shape();
        detail::put_u32(out, static_cast<std::uint32_t>(shape.size()));
        for (const auto d : shape) {
            detail::put_u32(out, static_cast<std::uint32_t>(d));
        }
        for (const double v : p->value.raw()) {
            detail::put_f64(out, v);
        }
    }
    return out;
}

inline checkpoint decode_checkpoint(const std::string &bytes) {
    if (bytes.size() < 4 || bytes.compare(0, 4, "SBCK") != 0) {
        throw format_error{ "checkpoint: bad magic" };
    }
    const std::string body = bytes.substr(4);
    detail::byte_reader r{ body };
    checkpoint ck;
    ck.version = r.u32();
    if (ck.version != checkpoint_version) {
        throw format_error{ "checkpoint: unsupported version " + std::to_string(ck.version) };
    }
    const std::string text = r.bytes(r.u32());
    std::istringstream lines{ text };
    std::string line;
    while (std::getline(lines, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw format_error{ "checkpoint: malformed header line" };
        }
        ck.header[line.substr(0, eq)] = line.substr(eq + 1);
    }
    const std::uint32_t count = r.u32();
    for (std::uint32_t i = 0; i < count; ++i) {
        std::string name = r.bytes(r.u32());
        const std::uint32_t rank = r.u32();
        if (rank == 0 || rank > 8) {
            throw format_error{ "checkpoint: bad rank for " + name };
        }
        std::vector<std::size_t> shape(rank);
        for (auto &d : shape) {
            d = r.u32();
            if (d == 0) {
                throw format_error{ "checkpoint: zero dimension in " + name };
            }
        }
        std::vector<double> data(tensor::element_count(shape));
        for (auto &v : data) {
            v = r.f64();
        }
        ck.tensors.emplace_back(std::move(name), tensor{ std::move(shape), std::move(data) });
    }
    if (!r.at_end()) {
        throw format_error{ "checkpoint: trailing bytes" };
    }
    return ck;
}

/// Copies stored values into `params`, matching by position, name and shape.
inline void load_parameters(const checkpoint &ck, const parameter_list &params) {
    if (ck.tensors.size() != params.size()) {
        throw format_error{ "checkpoint: holds " + std::to_string(ck.tensors.size()) + " tensors, model has " + std::to_string(params.size()) };
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        const auto &[name, t] = ck.tensors[i];
        if (name != params[i]->name || !t.same_shape(params[i]->value)) {
            throw format_error{ "checkpoint: tensor " + std::to_string(i) + " is " + name + shape_string(t.shape()) + ", model expects " + params[i]->name + shape_string(params[i]->value.shape()) };
        }
        params[i]->value = t;
    }
}

inline void write_file(const std::string &path, const std::string &bytes) {
    std::ofstream out{ path, std::ios::binary };
    if (!out) {
        throw error{ "cannot write file: " + path };
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

inline std::string read_file(const std::string &path) {
    std::ifstream in{ path, std::ios::binary };
    if (!in) {
        throw error{ "cannot read file: " + path };
    }
    return { std::istreambuf_iterator<char>{ in }, std::istreambuf_iterator<char>{} };
}

}  // namespace speechbio::nn
