#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dragan/data/dataset.hpp"

namespace dragan {

namespace detail {

inline std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    std::string out(s.substr(b, e - b + 1));
    if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
    return out;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    bool quoted = false;
    for (char ch : line) {
        if (ch == '"') quoted = !quoted;
        if (ch == ',' && !quoted) {
            cells.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    cells.push_back(trim(cur));
    return cells;
}

inline std::optional<double> parse_double(const std::string& s) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (first != last && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || !std::isfinite(v)) return std::nullopt;
    return v;
}

/// Shortest text that parses back to the same double.
inline std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

}  // namespace detail

/// Reads a comma-delimited file with one header row. The label column is the
/// last one unless `label_column` names another. The rarer raw label becomes
/// 1; on equal counts the lexicographically larger raw label becomes 1.
inline Dataset load_csv(const std::filesystem::path& path, const std::string& label_column = {}) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");

    std::string line;
    if (!std::getline(in, line)) throw ParseError("'" + path.string() + "': missing header row", 1, 0);
    auto header = detail::split_csv_line(line);
    std::size_t label_idx = header.size() - 1;
    if (!label_column.empty()) {
        auto it = std::find(header.begin(), header.end(), label_column);
        if (it == header.end()) throw ParseError("label column '" + label_column + "' not in header", 1, 0);
        label_idx = static_cast<std::size_t>(it - header.begin());
    }
    if (header.size() < 2) throw ParseError("'" + path.string() + "': need at least one feature and a label", 1, 0);

    Dataset ds;
    ds.name = path.stem().string();
    for (std::size_t c = 0; c < header.size(); ++c)
        if (c != label_idx) ds.feature_names.push_back(header[c]);

    std::vector<std::string> raw_labels;
    std::vector<double> values;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        auto cells = detail::split_csv_line(line);
        if (cells.size() != header.size())
            throw ParseError("'" + path.string() + "' line " + std::to_string(line_no) + ": expected " +
                                 std::to_string(header.size()) + " cells, got " + std::to_string(cells.size()),
                             line_no, 0);
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (c == label_idx) {
                raw_labels.push_back(cells[c]);
                continue;
            }
            auto v = detail::parse_double(cells[c]);
            if (!v)
                throw ParseError("'" + path.string() + "' line " + std::to_string(line_no) + ", column " +
                                     std::to_string(c + 1) + " ('" + header[c] + "'): cannot parse '" + cells[c] +
                                     "' as a finite number",
                                 line_no, c + 1);
            values.push_back(*v);
        }
    }

    std::map<std::string, std::size_t> counts;
    for (const auto& l : raw_labels) ++counts[l];
    if (counts.size() > 2)
        throw LabelError("'" + path.string() + "': label column has " + std::to_string(counts.size()) +
                         " distinct values, expected 2");
    if (counts.size() < 2) throw DegenerateDatasetError("'" + path.string() + "': only one class present");

    auto a = counts.begin();
    auto b = std::next(a);  // b is lexicographically larger
    const std::string& positive = (a->second < b->second) ? a->first : b->first;

    const std::size_t d = header.size() - 1;
    ds.features = Matrix(raw_labels.size(), d, std::move(values));
    ds.labels.reserve(raw_labels.size());
    for (const auto& l : raw_labels) ds.labels.push_back(l == positive ? 1 : 0);
    ds.validate();
    return ds;
}

/// Writes features plus a final `label` column of 0/1 values.
inline void write_csv(const Dataset& ds, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    for (std::size_t c = 0; c < ds.dims(); ++c)
        out << (c < ds.feature_names.size() ? ds.feature_names[c] : "x" + std::to_string(c)) << ',';
    out << "label\n";
    for (std::size_t r = 0; r < ds.size(); ++r) {
        for (std::size_t c = 0; c < ds.dims(); ++c) out << detail::format_double(ds.features(r, c)) << ',';
        out << ds.labels[r] << '\n';
    }
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace dragan
