#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace hedgen {

// FNV-1a 64-bit. Used for reproducibility manifests and seed derivation,
// not for anything security sensitive.
inline std::uint64_t fnv1a64(std::string_view data, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex_digest(std::string_view data);
std::string file_digest(const std::string& path);

// Stage seeds are derived from one root seed so stages can be re-run
// independently without sharing RNG state.
std::uint64_t derive_seed(std::uint64_t root_seed, std::string_view stage_name);

}  // namespace hedgen
