#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace phagraph {

// 64-bit FNV-1a, used for reproducibility hashes in run metadata. Not a
// cryptographic hash.
class Fnv1a {
 public:
  void add_byte(unsigned char b) {
    value_ ^= b;
    value_ *= 0x100000001b3ULL;
  }

  void add(std::string_view s) {
    for (unsigned char c : s) add_byte(c);
    add_byte(0xff);  // length delimiter
  }

  void add(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) add_byte(static_cast<unsigned char>(v >> (8 * i)));
  }

  std::uint64_t value() const { return value_; }

 private:
  std::uint64_t value_ = 0xcbf29ce484222325ULL;
};

std::uint64_t hash_file(const std::string& path);
std::string hash_hex(std::uint64_t value);

}  // namespace phagraph
