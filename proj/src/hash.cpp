#include "surfacegrid/hash.hpp"

#include <cstdio>
#include <fstream>
#include <vector>

#include "surfacegrid/error.hpp"

namespace surfacegrid {

std::string to_hex(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

std::uint64_t hash_text(std::string_view text) {
  Fnv1a h;
  h.update(text);
  return h.digest();
}

std::uint64_t hash_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  Fnv1a h;
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    const auto got = in.gcount();
    if (got > 0)
      h.update(std::span(reinterpret_cast<const std::uint8_t*>(buf.data()), static_cast<std::size_t>(got)));
  }
  if (in.bad()) throw IoError("read failed: " + path);
  return h.digest();
}

}  // namespace surfacegrid
