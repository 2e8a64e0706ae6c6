// config.hpp — Minimal INI reader for scenario files.
//
// Grammar: [section] headers, key = value pairs, blank lines, and comments
// starting with '#' or ';' (full-line or trailing). Values are plain text;
// there is no quoting or escaping. Keys must be unique within their section
// and appear after a section header. Typed access parses on demand and every
// failure is a ConfigError carrying the offending line number.
#pragma once

#include <map>
#include <string>
#include <vector>

namespace dispersim {

class Config {
public:
    static Config parse_file(const std::string& path);
    static Config parse_string(const std::string& text, const std::string& origin = "<string>");

    bool has(const std::string& section, const std::string& key) const;

    std::string get_string(const std::string& section, const std::string& key) const;
    std::string get_string_or(const std::string& section, const std::string& key,
                              const std::string& fallback) const;
    double get_number(const std::string& section, const std::string& key) const;
    double get_number_or(const std::string& section, const std::string& key,
                         double fallback) const;
    bool get_bool(const std::string& section, const std::string& key) const;
    bool get_bool_or(const std::string& section, const std::string& key, bool fallback) const;

    // Comma- or whitespace-separated numbers; the empty string is an error.
    std::vector<double> get_number_list(const std::string& section,
                                        const std::string& key) const;
    std::vector<double> get_number_list_or(const std::string& section, const std::string& key,
                                           const std::vector<double>& fallback) const;
    std::vector<std::string> get_string_list(const std::string& section,
                                             const std::string& key) const;

    std::vector<std::string> sections() const;
    std::vector<std::string> keys(const std::string& section) const;
    int line_of(const std::string& section, const std::string& key) const; // -1 if absent
    const std::string& origin() const { return origin_; }

private:
    struct Entry {
        std::string value;
        int line{-1};
    };

    const Entry& require(const std::string& section, const std::string& key) const;

    std::map<std::string, std::map<std::string, Entry>> data_;
    std::string origin_{"<empty>"};
};

} // namespace dispersim
