#include "phagraph/hash.hpp"

#include <fstream>

#include "phagraph/common.hpp"

namespace phagraph {

std::uint64_t hash_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file for hashing: " + path);
  Fnv1a h;
  char buf[1 << 14];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i)
      h.add_byte(static_cast<unsigned char>(buf[i]));
  }
  return h.value();
}

std::string hash_hex(std::uint64_t value) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[value & 0xf];
    value >>= 4;
  }
  return out;
}

}  // namespace phagraph
