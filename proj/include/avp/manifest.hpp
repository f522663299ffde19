#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace avp {

// FNV-1a 64-bit over a byte string.
std::uint64_t fnv1a64(const std::string& bytes);
std::string fnv1a64_hex(const std::string& bytes);
std::string checksum_file(const std::string& path);  // "fnv1a64:<16 hex digits>"

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

// Per-run manifest: the command, its resolved-config hash, and checksummed
// inputs/outputs. Serialized as JSON next to the run's artifacts.
struct Manifest {
    std::string command;
    std::string config_hash;
    std::vector<std::pair<std::string, std::string>> inputs;   // path, checksum
    std::vector<std::pair<std::string, std::string>> outputs;  // path, checksum

    void add_input(const std::string& path);
    void add_output(const std::string& path);
    std::string to_json() const;
    void write(const std::string& path) const;
};

} // namespace avp
