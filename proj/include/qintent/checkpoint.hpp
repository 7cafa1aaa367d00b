#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "qintent/models.hpp"

namespace qintent {

/// Parameter snapshot plus provenance. Values are written with 17 significant
/// digits, which round-trips every double.
struct Checkpoint {
  ModelSpec spec;
  std::uint64_t seed = 0;
  std::size_t epoch = 0;
  std::map<std::string, double> metrics;
  std::vector<std::pair<std::string, nn::Tensor>> params;

  static Checkpoint capture(const IntentModel& model, std::size_t epoch,
                            std::map<std::string, double> metrics = {});
  /// Builds a model from `spec` and loads the stored values into it.
  std::unique_ptr<IntentModel> restore() const;
  std::string serialize() const;
  /// Fingerprint of the serialized text.
  std::string hash() const;
};

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& in);
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace qintent
