#include "dispersim/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "dispersim/errors.hpp"

namespace dispersim {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::string strip_comment(const std::string& s) {
    const std::size_t pos = s.find_first_of("#;");
    return pos == std::string::npos ? s : s.substr(0, pos);
}

bool valid_name(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') return false;
    }
    return true;
}

double parse_double(const std::string& raw, int line) {
    const std::string s = trim(raw);
    if (s.empty()) throw ConfigError("expected a number, got an empty value", line);
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size()) {
        throw ConfigError("malformed number '" + s + "'", line);
    }
    return v;
}

} // namespace

Config Config::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file '" + path + "'");
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_string(buffer.str(), path);
}

Config Config::parse_string(const std::string& text, const std::string& origin) {
    Config cfg;
    cfg.origin_ = origin;

    std::istringstream in(text);
    std::string raw;
    std::string section;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(strip_comment(raw));
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ConfigError("unterminated section header", line_no);
            }
            section = trim(line.substr(1, line.size() - 2));
            if (!valid_name(section)) {
                throw ConfigError("invalid section name '" + section + "'", line_no);
            }
            cfg.data_[section]; // a section may legitimately stay empty
            continue;
        }

        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("expected 'key = value', got '" + line + "'", line_no);
        }
        if (section.empty()) {
            throw ConfigError("key before any [section] header", line_no);
        }
        const std::string key = trim(line.substr(0, eq));
        if (!valid_name(key)) {
            throw ConfigError("invalid key name '" + key + "'", line_no);
        }
        auto& entries = cfg.data_[section];
        if (entries.count(key)) {
            throw ConfigError("duplicate key '" + key + "' in [" + section + "] (first at line " +
                                  std::to_string(entries[key].line) + ")",
                              line_no);
        }
        entries[key] = Entry{trim(line.substr(eq + 1)), line_no};
    }
    return cfg;
}

bool Config::has(const std::string& section, const std::string& key) const {
    const auto sec = data_.find(section);
    return sec != data_.end() && sec->second.count(key) > 0;
}

const Config::Entry& Config::require(const std::string& section, const std::string& key) const {
    const auto sec = data_.find(section);
    if (sec == data_.end()) {
        throw ConfigError("missing section [" + section + "] in " + origin_);
    }
    const auto entry = sec->second.find(key);
    if (entry == sec->second.end()) {
        throw ConfigError("missing key '" + key + "' in [" + section + "] of " + origin_);
    }
    return entry->second;
}

std::string Config::get_string(const std::string& section, const std::string& key) const {
    return require(section, key).value;
}

std::string Config::get_string_or(const std::string& section, const std::string& key,
                                  const std::string& fallback) const {
    return has(section, key) ? get_string(section, key) : fallback;
}

double Config::get_number(const std::string& section, const std::string& key) const {
    const Entry& e = require(section, key);
    return parse_double(e.value, e.line);
}

double Config::get_number_or(const std::string& section, const std::string& key,
                             double fallback) const {
    return has(section, key) ? get_number(section, key) : fallback;
}

bool Config::get_bool(const std::string& section, const std::string& key) const {
    const Entry& e = require(section, key);
    std::string v = e.value;
    for (char& c : v) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("expected a boolean, got '" + e.value + "'", e.line);
}

bool Config::get_bool_or(const std::string& section, const std::string& key,
                         bool fallback) const {
    return has(section, key) ? get_bool(section, key) : fallback;
}

std::vector<std::string> Config::get_string_list(const std::string& section,
                                                 const std::string& key) const {
    const Entry& e = require(section, key);
    std::vector<std::string> out;
    std::string token;
    for (char c : e.value) {
        if (c == ',' || std::isspace(static_cast<unsigned char>(c))) {
            if (!token.empty()) out.push_back(token);
            token.clear();
        } else {
            token.push_back(c);
        }
    }
    if (!token.empty()) out.push_back(token);
    if (out.empty()) {
        throw ConfigError("expected a list, got an empty value", e.line);
    }
    return out;
}

std::vector<double> Config::get_number_list(const std::string& section,
                                            const std::string& key) const {
    const Entry& e = require(section, key);
    std::vector<double> out;
    for (const std::string& token : get_string_list(section, key)) {
        out.push_back(parse_double(token, e.line));
    }
    return out;
}

std::vector<double> Config::get_number_list_or(const std::string& section, const std::string& key,
                                               const std::vector<double>& fallback) const {
    return has(section, key) ? get_number_list(section, key) : fallback;
}

std::vector<std::string> Config::sections() const {
    std::vector<std::string> out;
    for (const auto& [name, entries] : data_) out.push_back(name);
    return out;
}

std::vector<std::string> Config::keys(const std::string& section) const {
    std::vector<std::string> out;
    const auto sec = data_.find(section);
    if (sec != data_.end()) {
        for (const auto& [key, entry] : sec->second) out.push_back(key);
    }
    return out;
}

int Config::line_of(const std::string& section, const std::string& key) const {
    const auto sec = data_.find(section);
    if (sec == data_.end()) return -1;
    const auto entry = sec->second.find(key);
    return entry == sec->second.end() ? -1 : entry->second.line;
}

} // namespace dispersim
