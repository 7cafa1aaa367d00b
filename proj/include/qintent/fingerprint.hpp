#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace qintent {

/// Incremental 64-bit FNV-1a. Used for config fingerprints and checkpoint hashes;
/// not a cryptographic digest.
class Fingerprint {
 public:
  Fingerprint& add(std::string_view bytes);
  Fingerprint& add(std::uint64_t value);
  Fingerprint& add_field(std::string_view key, std::string_view value);
  std::uint64_t value() const { return state_; }
  std::string hex() const;

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

std::string fingerprint_of(std::string_view bytes);

}  // namespace qintent
