#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace elastuq {

// Error taxonomy mapped to CLI exit codes: ConfigError -> 2, AssetError -> 3,
// SolveError -> 4, anything else -> 1.
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

class AssetError : public std::runtime_error {
public:
  explicit AssetError(const std::string& msg) : std::runtime_error(msg) {}
};

class SolveError : public std::runtime_error {
public:
  SolveError(const std::string& msg, std::vector<double> history)
      : std::runtime_error(msg), residual_history(std::move(history)) {}
  std::vector<double> residual_history;
};

inline std::uint64_t fnv1a(const void* data, std::size_t n,
                           std::uint64_t h = 0xcbf29ce484222325ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::uint64_t fnv1a(const std::string& s) { return fnv1a(s.data(), s.size()); }

// Fixed scientific formatting so that report files are byte-stable.
std::string format_sci(double v, int digits = 12);

}  // namespace elastuq
