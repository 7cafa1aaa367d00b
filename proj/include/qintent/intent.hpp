#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace qintent {

enum class Intent : std::size_t { Informational = 0, Transactional = 1, Navigational = 2 };

inline constexpr std::size_t kNumIntents = 3;
inline constexpr std::array<Intent, kNumIntents> kAllIntents = {
    Intent::Informational, Intent::Transactional, Intent::Navigational};

constexpr std::size_t index_of(Intent c) { return static_cast<std::size_t>(c); }
std::string_view intent_name(Intent c);

/// Set of intents assigned to one query; never empty.
class MultiHotLabel {
 public:
  /// Throws InvariantError when no bit is set.
  explicit MultiHotLabel(std::array<bool, kNumIntents> bits);
  static MultiHotLabel single(Intent c);
  /// Returns nullopt for the all-zero triple.
  static std::optional<MultiHotLabel> from_bits(std::array<bool, kNumIntents> bits);

  bool has(Intent c) const { return bits_[index_of(c)]; }
  const std::array<bool, kNumIntents>& bits() const { return bits_; }
  std::size_t count() const;
  MultiHotLabel operator|(const MultiHotLabel& other) const;
  bool operator==(const MultiHotLabel&) const = default;

 private:
  std::array<bool, kNumIntents> bits_;
};

/// Nonnegative weights over (I, T, N) summing to one.
class IntentDistribution {
 public:
  static constexpr double kSumTolerance = 1e-9;

  /// Throws InvariantError if a weight is negative or the sum is off by more than 1e-9.
  explicit IntentDistribution(std::array<double, kNumIntents> weights);
  static IntentDistribution uniform_over(const MultiHotLabel& label);

  double operator[](Intent c) const { return w_[index_of(c)]; }
  double operator[](std::size_t i) const { return w_[i]; }
  const std::array<double, kNumIntents>& weights() const { return w_; }
  std::size_t support_size() const;
  /// Bit set wherever the weight is positive.
  MultiHotLabel support() const;
  bool operator==(const IntentDistribution&) const = default;

 private:
  std::array<double, kNumIntents> w_;
};

MultiHotLabel parse_bits(std::string_view text);
std::string format_bits(const MultiHotLabel& label);
/// "i,t,n" with six decimals.
std::string format_weights(const IntentDistribution& d, int decimals = 6);
IntentDistribution parse_weights(std::string_view text);

}  // namespace qintent
