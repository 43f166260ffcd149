#include "hedgen/digest.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "hedgen/error.hpp"

namespace hedgen {

std::string hex_digest(std::string_view data) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(data)));
    return std::string(buf);
}

std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file for digest: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return hex_digest(ss.str());
}

std::uint64_t derive_seed(std::uint64_t root_seed, std::string_view stage_name) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%llu/", static_cast<unsigned long long>(root_seed));
    return fnv1a64(stage_name, fnv1a64(buf));
}

}  // namespace hedgen
