#pragma once

// Small CSV helpers shared by the fixture readers. Not part of the public API.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace dsm::detail {

inline std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r' || s[b] == '\n')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r' || s[e - 1] == '\n')) --e;
    return std::string(s.substr(b, e - b));
}

inline std::vector<std::string> split(std::string_view line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        auto pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(trim(line.substr(start)));
            return out;
        }
        out.push_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
}

/// Non-empty lines with their 1-based line numbers.
std::vector<std::pair<std::size_t, std::string>> read_lines(const std::string& text);

std::string read_file(const std::string& path);

/// Strict numeric parsing; returns false on trailing garbage or empty input.
bool parse_double(const std::string& s, double& out);
bool parse_int(const std::string& s, int& out);

} // namespace dsm::detail
