#pragma once

// Dataset persistence.
//
// Binary layout (all integers and floats little-endian):
//   "SIC1"                    4 bytes magic
//   version                   u16 (currently 1)
//   n_samples                 u64
//   memory                    u16
//   x                         n_samples * (f64 re, f64 im)
//   y                         n_samples * (f64 re, f64 im)
//   digest                    32 bytes
//
// CSV import: one row per sample "x_re,x_im,y_re,y_im", optional header row.

#include <sic/digest.hpp>
#include <sic/errors.hpp>
#include <sic/txchain.hpp>

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace sic {

inline constexpr char kDatasetMagic[4] = {'S', 'I', 'C', '1'};
inline constexpr std::uint16_t kDatasetVersion = 1;
inline constexpr std::size_t kDatasetHeaderBytes = 4 + 2 + 8 + 2;

namespace detail {

template <class T>
void put_le(std::string& out, T value) {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint16_t>>;
    const auto bits = std::bit_cast<U>(value);
    for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

template <class T>
T get_le(const char* p) {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint16_t>>;
    U bits = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) bits |= static_cast<U>(static_cast<unsigned char>(p[i])) << (8 * i);
    return std::bit_cast<T>(bits);
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path.string() + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Writes through a sibling temp file and renames, so a failed write leaves no partial output.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot open '" + path.string() + "' for writing");
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) {
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw ConfigError("write to '" + path.string() + "' failed");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw ConfigError("cannot move output into '" + path.string() + "'");
    }
}

} // namespace detail

inline std::string encode_dataset(const Dataset& d) {
    if (d.x.size() != d.y.size()) throw ContractError("dataset x/y length mismatch");
    if (d.memory < 1 || d.memory > 0xFFFF) throw ContractError("dataset memory out of range");
    std::string out;
    out.reserve(kDatasetHeaderBytes + 32 * d.x.size() + 32);
    out.append(kDatasetMagic, 4);
    detail::put_le<std::uint16_t>(out, kDatasetVersion);
    detail::put_le<std::uint64_t>(out, d.x.size());
    detail::put_le<std::uint16_t>(out, static_cast<std::uint16_t>(d.memory));
    for (const auto* seq : {&d.x, &d.y})
        for (auto v : *seq) {
            detail::put_le<double>(out, v.real());
            detail::put_le<double>(out, v.imag());
        }
    out.append(reinterpret_cast<const char*>(d.provenance.digest.data()), d.provenance.digest.size());
    return out;
}

inline Dataset decode_dataset(std::string_view bytes, const std::string& source = "buffer") {
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kDatasetMagic, 4) != 0)
        throw ParseError(ParseErrorKind::bad_magic, source + " is not an SIC1 dataset");
    if (bytes.size() < kDatasetHeaderBytes) throw ParseError(ParseErrorKind::truncated, source + ": header incomplete");
    const char* p = bytes.data();
    const auto version = detail::get_le<std::uint16_t>(p + 4);
    if (version != kDatasetVersion)
        throw ParseError(ParseErrorKind::bad_version, source + ": version " + std::to_string(version));
    const auto n = detail::get_le<std::uint64_t>(p + 6);
    const auto memory = detail::get_le<std::uint16_t>(p + 14);

    const std::size_t payload = bytes.size() - kDatasetHeaderBytes;
    if (n > (payload / 32)) {
        throw ParseError(ParseErrorKind::truncated,
                         source + ": header declares " + std::to_string(n) + " samples but payload holds fewer");
    }
    const std::size_t expected = 32 * static_cast<std::size_t>(n) + 32;
    if (payload < expected) throw ParseError(ParseErrorKind::truncated, source + ": digest missing");
    if (payload != expected)
        throw ParseError(ParseErrorKind::count_mismatch, source + ": " + std::to_string(payload - expected) +
                                                             " trailing bytes beyond declared sample count");
    if (memory < 1 || n < memory)
        throw ParseError(ParseErrorKind::count_mismatch,
                         source + ": n_samples " + std::to_string(n) + " smaller than memory " + std::to_string(memory));

    Dataset d;
    d.memory = memory;
    d.x.resize(n);
    d.y.resize(n);
    const char* q = p + kDatasetHeaderBytes;
    for (auto* seq : {&d.x, &d.y})
        for (auto& v : *seq) {
            v = Cx{detail::get_le<double>(q), detail::get_le<double>(q + 8)};
            q += 16;
        }
    std::memcpy(d.provenance.digest.data(), q, 32);
    d.provenance.kind = ProvenanceKind::file;
    d.provenance.source = source;
    return d;
}

inline void write_dataset(const Dataset& d, const std::filesystem::path& path) {
    detail::write_file_atomic(path, encode_dataset(d));
}

inline Dataset read_dataset(const std::filesystem::path& path) {
    return decode_dataset(detail::read_file(path), path.string());
}

inline Dataset parse_csv_dataset(std::string_view text, int memory, const std::string& source = "csv") {
    Dataset d;
    d.memory = memory;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

        double vals[4];
        int count = 0;
        bool numeric = true;
        std::size_t cur = 0;
        while (cur <= line.size()) {
            auto comma = line.find(',', cur);
            if (comma == std::string_view::npos) comma = line.size();
            auto field = line.substr(cur, comma - cur);
            while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
            while (!field.empty() && (field.back() == ' ' || field.back() == '\t')) field.remove_suffix(1);
            if (!field.empty() && field.front() == '+') field.remove_prefix(1);
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
            if (ec != std::errc{} || ptr != field.data() + field.size() || field.empty()) numeric = false;
            if (count < 4) vals[count] = v;
            ++count;
            cur = comma + 1;
        }
        if (!numeric) {
            if (line_no == 1 && d.x.empty()) continue; // header
            throw ParseError(ParseErrorKind::bad_csv, source + ": line " + std::to_string(line_no) + " is not numeric");
        }
        if (count != 4)
            throw ParseError(ParseErrorKind::bad_csv, source + ": line " + std::to_string(line_no) + " has " +
                                                          std::to_string(count) + " fields, expected 4");
        d.x.emplace_back(vals[0], vals[1]);
        d.y.emplace_back(vals[2], vals[3]);
    }
    if (d.x.size() < static_cast<std::size_t>(std::max(memory, 1)))
        throw ParseError(ParseErrorKind::count_mismatch,
                         source + ": " + std::to_string(d.x.size()) + " rows, fewer than memory " + std::to_string(memory));
    d.provenance.kind = ProvenanceKind::imported;
    d.provenance.digest = sha256(text);
    d.provenance.source = source;
    return d;
}

inline Dataset import_csv(const std::filesystem::path& path, int memory) {
    return parse_csv_dataset(detail::read_file(path), memory, path.filename().string());
}

} // namespace sic
