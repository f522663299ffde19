#include "avp/manifest.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "avp/errors.hpp"

#include <json.hpp>

namespace avp {

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 0x00000100000001b3ULL;
    }
    return hash;
}

std::string fnv1a64_hex(const std::string& bytes) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
    return buf;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open file: " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write file: " + path);
    }
    out << content;
}

std::string checksum_file(const std::string& path) {
    return "fnv1a64:" + fnv1a64_hex(read_file(path));
}

void Manifest::add_input(const std::string& path) {
    inputs.emplace_back(path, checksum_file(path));
}

void Manifest::add_output(const std::string& path) {
    outputs.emplace_back(path, checksum_file(path));
}

std::string Manifest::to_json() const {
    nlohmann::json j;
    j["command"] = command;
    j["config_hash"] = config_hash;
    auto entries = [](const std::vector<std::pair<std::string, std::string>>& list) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& [path, checksum] : list) {
            arr.push_back({{"path", path}, {"checksum", checksum}});
        }
        return arr;
    };
    j["inputs"] = entries(inputs);
    j["outputs"] = entries(outputs);
    return j.dump(2) + "\n";
}

void Manifest::write(const std::string& path) const {
    write_file(path, to_json());
}

} // namespace avp
