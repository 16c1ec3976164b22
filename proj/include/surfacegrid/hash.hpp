#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace surfacegrid {

// FNV-1a, 64 bit. Content fingerprints only; not a security hash.
class Fnv1a {
 public:
  void update(std::span<const std::uint8_t> bytes) {
    for (auto b : bytes) {
      state_ ^= b;
      state_ *= 0x100000001B3ULL;
    }
  }
  void update(std::string_view text) {
    update(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
  }
  std::uint64_t digest() const { return state_; }

 private:
  std::uint64_t state_ = 0xCBF29CE484222325ULL;
};

std::string to_hex(std::uint64_t value);
std::uint64_t hash_text(std::string_view text);
std::uint64_t hash_file(const std::string& path);

}  // namespace surfacegrid
