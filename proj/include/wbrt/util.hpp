#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

namespace wbrt {

using json = nlohmann::json;

inline constexpr const char* kToolVersion = "0.1.0";

// Rounds to 9 significant digits; non-finite values pass through.
double r9(double x);

std::string read_file(const std::filesystem::path& p);

// Writes to a sibling temp file and renames it over the target.
void write_file_atomic(const std::filesystem::path& p, const std::string& bytes);

std::string dump(const json& j);
void write_json(const std::filesystem::path& p, const json& j);
json read_json(const std::filesystem::path& p);

std::string sha256_hex(const std::string& bytes);

// FNV-1a, used to derive per-label sub-seeds.
std::uint64_t fnv1a(const std::string& s);
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

// Uniform double in [0, 1) from a 64-bit draw.
inline double unit_double(std::uint64_t x) { return static_cast<double>(x >> 11) * 0x1.0p-53; }

}  // namespace wbrt
