#include "qintent/fingerprint.hpp"

#include <cstdio>

namespace qintent {

Fingerprint& Fingerprint::add(std::string_view bytes) {
  for (unsigned char c : bytes) {
    state_ ^= c;
    state_ *= 0x100000001b3ULL;
  }
  return *this;
}

Fingerprint& Fingerprint::add(std::uint64_t value) {
  for (int i = 0; i < 8; ++i) {
    state_ ^= (value >> (8 * i)) & 0xff;
    state_ *= 0x100000001b3ULL;
  }
  return *this;
}

Fingerprint& Fingerprint::add_field(std::string_view key, std::string_view value) {
  add(key);
  add("=");
  add(value);
  return add("\n");
}

std::string Fingerprint::hex() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(state_));
  return buf;
}

std::string fingerprint_of(std::string_view bytes) { return Fingerprint().add(bytes).hex(); }

}  // namespace qintent
