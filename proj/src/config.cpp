#include "avp/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "avp/errors.hpp"

namespace avp {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

} // namespace

std::string KeyValueConfig::get(const std::string& key, const std::string& fallback) const {
    auto it = top.find(key);
    return it == top.end() ? fallback : it->second;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
    auto it = top.find(key);
    return it == top.end() ? fallback : to_double(it->second, key);
}

long long KeyValueConfig::get_int(const std::string& key, long long fallback) const {
    auto it = top.find(key);
    return it == top.end() ? fallback : to_int(it->second, key);
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
    auto it = top.find(key);
    return it == top.end() ? fallback : to_bool(it->second, key);
}

double to_double(const std::string& value, const std::string& context) {
    const char* begin = value.c_str();
    char* end = nullptr;
    double parsed = std::strtod(begin, &end);
    if (end == begin || *end != '\0') {
        throw DataError("cannot parse '" + value + "' as a number for " + context);
    }
    return parsed;
}

long long to_int(const std::string& value, const std::string& context) {
    const char* begin = value.c_str();
    char* end = nullptr;
    long long parsed = std::strtoll(begin, &end, 10);
    if (end == begin || *end != '\0') {
        throw DataError("cannot parse '" + value + "' as an integer for " + context);
    }
    return parsed;
}

bool to_bool(const std::string& value, const std::string& context) {
    std::string v = value;
    std::transform(v.begin(), v.end(), v.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw DataError("cannot parse '" + value + "' as a boolean for " + context);
}

KeyValueConfig parse_config_text(const std::string& text, const std::string& origin) {
    KeyValueConfig cfg;
    std::map<std::string, std::string>* current = &cfg.top;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']') {
                throw DataError(origin + ":" + std::to_string(line_no) + ": unterminated section header");
            }
            cfg.sections.emplace_back(trim(t.substr(1, t.size() - 2)), std::map<std::string, std::string>{});
            current = &cfg.sections.back().second;
            continue;
        }
        std::size_t eq = t.find('=');
        if (eq == std::string::npos) {
            throw DataError(origin + ":" + std::to_string(line_no) + ": expected 'key = value'");
        }
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (key.empty()) {
            throw DataError(origin + ":" + std::to_string(line_no) + ": empty key");
        }
        (*current)[key] = value;
    }
    return cfg;
}

KeyValueConfig parse_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open config file: " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path);
}

} // namespace avp
