#pragma once

// CSV and metadata serialization. Requires nlohmann_json.

#include "jdr/error.hpp"
#include "jdr/linalg.hpp"
#include "jdr/predictor.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

namespace jdr::io {

using Json = nlohmann::ordered_json;

/// Shortest decimal string that reads back to the same double.
inline std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline double parse_double(std::string_view field, const std::string& where) {
    field = trim(field);
    if (!field.empty() && field.front() == '+') field.remove_prefix(1);
    double v = 0.0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    require(res.ec == std::errc() && res.ptr == field.data() + field.size(), ErrorKind::Io,
            "cannot parse '" + std::string(field) + "' as a number at " + where);
    return v;
}

inline Index parse_index(std::string_view field, const std::string& where) {
    field = trim(field);
    long long v = 0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    require(res.ec == std::errc() && res.ptr == field.data() + field.size(), ErrorKind::Io,
            "cannot parse '" + std::string(field) + "' as an index at " + where);
    return static_cast<Index>(v);
}

inline std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

/// Non-blank lines of a file, the first dropped when `header` is set.
inline std::vector<std::string> read_lines(const std::filesystem::path& path, bool header) {
    std::ifstream in(path);
    require(static_cast<bool>(in), ErrorKind::Io, "cannot open " + path.string());
    std::vector<std::string> lines;
    std::string line;
    bool skipped = !header;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        if (!skipped) {
            skipped = true;
            continue;
        }
        lines.push_back(line);
    }
    return lines;
}

inline std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(out), ErrorKind::Io, "cannot write " + path.string());
    return out;
}

}  // namespace detail

inline Matrix read_matrix_csv(const std::filesystem::path& path, bool header = false) {
    const auto lines = detail::read_lines(path, header);
    require(!lines.empty(), ErrorKind::Io, path.string() + " has no data rows");
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto fields = detail::split(lines[i]);
        std::vector<double> row;
        row.reserve(fields.size());
        for (std::size_t j = 0; j < fields.size(); ++j)
            row.push_back(detail::parse_double(fields[j], path.string() + " row " + std::to_string(i) +
                                                              " col " + std::to_string(j)));
        if (!rows.empty() && row.size() != rows.front().size())
            fail(ErrorKind::DimensionMismatch, path.string() + ": row " + std::to_string(i) + " has " +
                                                   std::to_string(row.size()) + " fields, expected " +
                                                   std::to_string(rows.front().size()));
        rows.push_back(std::move(row));
    }
    Matrix M(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
    for (Index i = 0; i < M.rows(); ++i)
        for (Index j = 0; j < M.cols(); ++j) M(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    return M;
}

/// A vector stored either as one column or as one row.
inline Vector read_vector_csv(const std::filesystem::path& path, bool header = false) {
    const Matrix M = read_matrix_csv(path, header);
    require(M.rows() == 1 || M.cols() == 1, ErrorKind::DimensionMismatch,
            path.string() + " is not a single row or column");
    return M.cols() == 1 ? Vector(M.col(0)) : Vector(M.row(0).transpose());
}

inline void write_matrix_csv(const std::filesystem::path& path, const Matrix& M) {
    auto out = detail::open_out(path);
    for (Index i = 0; i < M.rows(); ++i) {
        for (Index j = 0; j < M.cols(); ++j) {
            if (j) out << ',';
            out << format_double(M(i, j));
        }
        out << '\n';
    }
}

/// One value per line.
inline void write_vector_column(const std::filesystem::path& path, const Vector& v) {
    auto out = detail::open_out(path);
    for (Index i = 0; i < v.size(); ++i) out << format_double(v(i)) << '\n';
}

/// All values on one comma-separated line.
inline void write_vector_row(const std::filesystem::path& path, const Vector& v) {
    auto out = detail::open_out(path);
    for (Index i = 0; i < v.size(); ++i) out << (i ? "," : "") << format_double(v(i));
    out << '\n';
}

inline std::vector<Index> read_index_list(const std::filesystem::path& path, bool header = false) {
    std::vector<Index> out;
    for (const auto& line : detail::read_lines(path, header)) out.push_back(detail::parse_index(line, path.string()));
    return out;
}

inline void write_index_list(const std::filesystem::path& path, const std::vector<Index>& idx) {
    auto out = detail::open_out(path);
    for (Index i : idx) out << i << '\n';
}

/// Rows of (i, j, y).
inline std::vector<Observation> read_triples(const std::filesystem::path& path, bool header = false) {
    std::vector<Observation> out;
    const auto lines = detail::read_lines(path, header);
    for (std::size_t t = 0; t < lines.size(); ++t) {
        const auto f = detail::split(lines[t]);
        const std::string where = path.string() + " row " + std::to_string(t);
        require(f.size() == 3, ErrorKind::DimensionMismatch, where + ": expected i,j,y");
        out.push_back({detail::parse_index(f[0], where), detail::parse_index(f[1], where),
                       detail::parse_double(f[2], where)});
    }
    return out;
}

inline void write_triples(const std::filesystem::path& path, const std::vector<Observation>& obs) {
    auto out = detail::open_out(path);
    for (const auto& o : obs) out << o.i << ',' << o.j << ',' << format_double(o.y) << '\n';
}

/// Rows of (i, j).
inline std::vector<Query> read_pairs(const std::filesystem::path& path, bool header = false) {
    std::vector<Query> out;
    const auto lines = detail::read_lines(path, header);
    for (std::size_t t = 0; t < lines.size(); ++t) {
        const auto f = detail::split(lines[t]);
        const std::string where = path.string() + " row " + std::to_string(t);
        require(f.size() >= 2, ErrorKind::DimensionMismatch, where + ": expected i,j");
        out.emplace_back(detail::parse_index(f[0], where), detail::parse_index(f[1], where));
    }
    return out;
}

inline void write_pairs(const std::filesystem::path& path, const std::vector<Query>& pairs) {
    auto out = detail::open_out(path);
    for (const auto& [i, j] : pairs) out << i << ',' << j << '\n';
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    auto out = detail::open_out(path);
    out << text;
}

/// Pretty-printed, key order as inserted. Callers add "version".
inline void write_json(const std::filesystem::path& path, const Json& j) {
    write_text(path, j.dump(2) + "\n");
}

inline Json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    require(static_cast<bool>(in), ErrorKind::Io, "cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::Io, path.string() + ": " + e.what());
    }
}

}  // namespace jdr::io
