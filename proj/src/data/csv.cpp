#include "hnmvts/data.hpp"

#include "hnmvts/error.hpp"

#include <charconv>
#include <fstream>

#include <fmt/format.h>

namespace hnmvts {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    s = s.substr(first, last - first + 1);
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    return std::string(s);
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        fields.push_back(trim(std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos
                                                                                              : comma - start)));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return fields;
}

std::optional<double> parse_number(const std::string& s) {
    double v = 0;
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end) return std::nullopt;
    return v;
}

bool timestamp_increasing(const std::string& prev, const std::string& cur) {
    auto a = parse_number(prev);
    auto b = parse_number(cur);
    if (a && b) return *b > *a;
    // ISO-8601 style stamps order lexicographically.
    return cur > prev;
}

} // namespace

SeriesTable load_csv(const std::filesystem::path& path, const std::optional<std::string>& timestamp_column) {
    std::ifstream in(path);
    if (!in) throw LoadError(fmt::format("{}: cannot open file", path.string()));

    std::string line;
    if (!std::getline(in, line)) throw LoadError(fmt::format("{}: empty file", path.string()));
    if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    const std::vector<std::string> header = split_fields(line);

    std::optional<std::size_t> ts_index;
    if (timestamp_column) {
        for (std::size_t c = 0; c < header.size(); ++c)
            if (header[c] == *timestamp_column) ts_index = c;
        if (!ts_index) {
            throw LoadError(fmt::format("{}: timestamp column '{}' not in header", path.string(), *timestamp_column));
        }
    }

    SeriesTable table;
    for (std::size_t c = 0; c < header.size(); ++c)
        if (c != ts_index) table.channel_names.push_back(header[c]);
    if (table.channel_names.empty()) throw LoadError(fmt::format("{}: no value columns", path.string()));

    std::vector<Real> values;
    std::string prev_stamp;
    std::size_t row = 0;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != header.size()) {
            throw LoadError(fmt::format("{}: line {} has {} fields, header has {}", path.string(), line_no,
                                        fields.size(), header.size()));
        }
        for (std::size_t c = 0; c < fields.size(); ++c) {
            if (fields[c].empty()) {
                throw LoadError(fmt::format("{}: missing value at line {}, column '{}'", path.string(), line_no,
                                            header[c]));
            }
            if (c == ts_index) {
                if (row > 0 && !timestamp_increasing(prev_stamp, fields[c])) {
                    throw LoadError(fmt::format("{}: timestamp '{}' at line {} does not increase after '{}'",
                                                path.string(), fields[c], line_no, prev_stamp));
                }
                prev_stamp = fields[c];
                continue;
            }
            auto v = parse_number(fields[c]);
            if (!v) {
                throw LoadError(fmt::format("{}: non-numeric value '{}' at line {}, column '{}'", path.string(),
                                            fields[c], line_no, header[c]));
            }
            values.push_back(static_cast<Real>(*v));
        }
        ++row;
    }
    if (row < 2) throw LoadError(fmt::format("{}: need at least 2 data rows, found {}", path.string(), row));

    table.values = Tensor({row, table.channel_names.size()}, std::move(values));
    try {
        validate(table);
    } catch (const std::exception& e) {
        throw LoadError(fmt::format("{}: {}", path.string(), e.what()));
    }
    return table;
}

void write_csv(const std::filesystem::path& path, const SeriesTable& table) {
    std::ofstream out(path);
    if (!out) throw LoadError(fmt::format("{}: cannot open for writing", path.string()));
    for (std::size_t c = 0; c < table.channels(); ++c) out << (c ? "," : "") << table.channel_names[c];
    out << '\n';
    for (std::size_t r = 0; r < table.length(); ++r) {
        for (std::size_t c = 0; c < table.channels(); ++c) out << (c ? "," : "") << fmt::format("{}", table.at(r, c));
        out << '\n';
    }
}

} // namespace hnmvts
