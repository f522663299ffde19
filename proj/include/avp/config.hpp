#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace avp {

// Parsed key-value config file with optional repeatable [sections].
//
// Format:
//   key = value          top-level entry
//   [name]               starts a section; following keys belong to it
//   # or ; comment
//
// Sections with the same name may repeat (e.g. several [obstacle] blocks);
// they are kept in file order.
struct KeyValueConfig {
    std::map<std::string, std::string> top;
    std::vector<std::pair<std::string, std::map<std::string, std::string>>> sections;

    bool has(const std::string& key) const { return top.count(key) > 0; }
    std::string get(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    long long get_int(const std::string& key, long long fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
};

KeyValueConfig parse_config_file(const std::string& path);
KeyValueConfig parse_config_text(const std::string& text, const std::string& origin = "<string>");

double to_double(const std::string& value, const std::string& context);
long long to_int(const std::string& value, const std::string& context);
bool to_bool(const std::string& value, const std::string& context);

} // namespace avp
