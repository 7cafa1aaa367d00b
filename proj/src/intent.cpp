#include "qintent/intent.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

#include "qintent/error.hpp"

namespace qintent {

std::string_view intent_name(Intent c) {
  switch (c) {
    case Intent::Informational: return "informational";
    case Intent::Transactional: return "transactional";
    case Intent::Navigational: return "navigational";
  }
  return "?";
}

MultiHotLabel::MultiHotLabel(std::array<bool, kNumIntents> bits) : bits_(bits) {
  if (!bits[0] && !bits[1] && !bits[2]) throw InvariantError("multi-hot label has no bit set");
}

MultiHotLabel MultiHotLabel::single(Intent c) {
  std::array<bool, kNumIntents> b{};
  b[index_of(c)] = true;
  return MultiHotLabel(b);
}

std::optional<MultiHotLabel> MultiHotLabel::from_bits(std::array<bool, kNumIntents> bits) {
  if (!bits[0] && !bits[1] && !bits[2]) return std::nullopt;
  return MultiHotLabel(bits);
}

std::size_t MultiHotLabel::count() const {
  return static_cast<std::size_t>(bits_[0]) + bits_[1] + bits_[2];
}

MultiHotLabel MultiHotLabel::operator|(const MultiHotLabel& other) const {
  return MultiHotLabel({bits_[0] || other.bits_[0], bits_[1] || other.bits_[1],
                        bits_[2] || other.bits_[2]});
}

IntentDistribution::IntentDistribution(std::array<double, kNumIntents> weights) : w_(weights) {
  double sum = 0;
  for (double w : w_) {
    if (!(w >= 0) || !std::isfinite(w)) throw InvariantError("intent weight must be finite and >= 0");
    sum += w;
  }
  if (std::abs(sum - 1.0) > kSumTolerance)
    throw InvariantError("intent weights must sum to 1 (got " + std::to_string(sum) + ")");
}

IntentDistribution IntentDistribution::uniform_over(const MultiHotLabel& label) {
  const double w = 1.0 / static_cast<double>(label.count());
  std::array<double, kNumIntents> out{};
  for (std::size_t i = 0; i < kNumIntents; ++i) out[i] = label.bits()[i] ? w : 0.0;
  return IntentDistribution(out);
}

std::size_t IntentDistribution::support_size() const {
  return static_cast<std::size_t>(w_[0] > 0) + (w_[1] > 0) + (w_[2] > 0);
}

MultiHotLabel IntentDistribution::support() const {
  return MultiHotLabel({w_[0] > 0, w_[1] > 0, w_[2] > 0});
}

namespace {

std::array<std::string_view, kNumIntents> split3(std::string_view text) {
  std::array<std::string_view, kNumIntents> parts;
  std::size_t start = 0;
  for (std::size_t i = 0; i < kNumIntents; ++i) {
    const std::size_t comma = text.find(',', start);
    if ((i < 2) == (comma == std::string_view::npos))
      throw FormatError("expected three comma-separated values: '" + std::string(text) + "'");
    parts[i] = text.substr(start, i < 2 ? comma - start : std::string_view::npos);
    start = comma + 1;
  }
  return parts;
}

}  // namespace

MultiHotLabel parse_bits(std::string_view text) {
  std::array<bool, kNumIntents> bits{};
  const auto parts = split3(text);
  for (std::size_t i = 0; i < kNumIntents; ++i) {
    if (parts[i] == "1") bits[i] = true;
    else if (parts[i] != "0") throw FormatError("bit must be 0 or 1: '" + std::string(text) + "'");
  }
  return MultiHotLabel(bits);
}

std::string format_bits(const MultiHotLabel& label) {
  std::string s;
  for (std::size_t i = 0; i < kNumIntents; ++i) {
    if (i) s += ',';
    s += label.bits()[i] ? '1' : '0';
  }
  return s;
}

std::string format_weights(const IntentDistribution& d, int decimals) {
  std::string s;
  char buf[64];
  for (std::size_t i = 0; i < kNumIntents; ++i) {
    std::snprintf(buf, sizeof buf, "%.*f", decimals, d[i]);
    if (i) s += ',';
    s += buf;
  }
  return s;
}

IntentDistribution parse_weights(std::string_view text) {
  std::array<double, kNumIntents> w{};
  const auto parts = split3(text);
  for (std::size_t i = 0; i < kNumIntents; ++i) {
    const auto* end = parts[i].data() + parts[i].size();
    auto [ptr, ec] = std::from_chars(parts[i].data(), end, w[i]);
    if (ec != std::errc() || ptr != end)
      throw FormatError("bad weight '" + std::string(parts[i]) + "'");
  }
  // Six-decimal files store 1/3 as 0.333333; renormalize before validating.
  const double sum = w[0] + w[1] + w[2];
  if (std::abs(sum - 1.0) > 1e-5) throw FormatError("weights do not sum to 1: '" + std::string(text) + "'");
  for (double& x : w) x /= sum;
  return IntentDistribution(w);
}

}  // namespace qintent
