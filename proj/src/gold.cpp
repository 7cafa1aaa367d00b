#include "qintent/gold.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "qintent/corpus.hpp"
#include "qintent/error.hpp"

namespace qintent {

std::string_view mode_name(AnnotationMode m) {
  return m == AnnotationMode::MultiIntent ? "multi" : "single";
}

AnnotationMode parse_mode(std::string_view text) {
  if (text == "multi" || text == "multi-intent") return AnnotationMode::MultiIntent;
  if (text == "single" || text == "single-intent") return AnnotationMode::SingleIntent;
  throw FormatError("unknown annotation mode '" + std::string(text) + "'");
}

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return out;
}

bool parse_id(std::string_view s, std::int64_t& out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

void check_triple(std::span<const AnnotationRecord> labels) {
  if (labels.size() != 3)
    throw InvariantError("aggregation needs exactly 3 annotations, got " + std::to_string(labels.size()));
  std::set<std::string> annotators;
  for (const auto& r : labels) {
    if (r.query_id != labels[0].query_id) throw InvariantError("annotations belong to different queries");
    if (!annotators.insert(r.annotator_id).second)
      throw InvariantError("duplicate annotator '" + r.annotator_id + "'");
    if (r.mode == AnnotationMode::SingleIntent && r.label.count() != 1)
      throw InvariantError("single-intent annotation with more than one intent");
  }
}

std::string trimmed(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  return std::string(s);
}

}  // namespace

std::vector<AnnotationRecord> read_annotations(std::istream& in) {
  std::vector<AnnotationRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto f = split_tabs(line);
    auto fail = [&](const std::string& what) {
      throw FormatError("annotation line " + std::to_string(line_no) + ": " + what);
    };
    if (f.size() != 4) fail("expected query_id<TAB>annotator<TAB>i,t,n<TAB>mode");
    AnnotationRecord r;
    if (!parse_id(f[0], r.query_id)) fail("bad query id");
    r.annotator_id = trimmed(f[1]);
    if (r.annotator_id.empty()) fail("empty annotator id");
    try {
      r.label = parse_bits(f[2]);
      r.mode = parse_mode(trimmed(f[3]));
    } catch (const Error& e) {
      fail(e.what());
    }
    if (r.mode == AnnotationMode::SingleIntent && r.label.count() != 1)
      throw InvariantError("annotation line " + std::to_string(line_no) +
                           ": single-intent record must set exactly one intent");
    out.push_back(std::move(r));
  }
  return out;
}

void write_annotation(std::ostream& out, const AnnotationRecord& r) {
  out << r.query_id << '\t' << r.annotator_id << '\t' << format_bits(r.label) << '\t'
      << mode_name(r.mode) << '\n';
}

std::optional<IntentDistribution> aggregate_gt2(std::span<const AnnotationRecord> labels) {
  check_triple(labels);
  std::array<bool, kNumIntents> kept{};
  for (std::size_t c = 0; c < kNumIntents; ++c) {
    int votes = 0;
    for (const auto& r : labels) votes += r.label.bits()[c];
    kept[c] = votes >= 2;
  }
  const auto label = MultiHotLabel::from_bits(kept);
  if (!label) return std::nullopt;
  return IntentDistribution::uniform_over(*label);
}

std::optional<IntentDistribution> aggregate_gt3(std::span<const AnnotationRecord> labels) {
  check_triple(labels);
  const auto& first = labels[0].label;
  for (const auto& r : labels)
    if (!(r.label == first)) return std::nullopt;
  if (first.count() != 1) return std::nullopt;
  return IntentDistribution::uniform_over(first);
}

std::array<std::size_t, kNumIntents> GoldSet::counts() const {
  std::array<std::size_t, kNumIntents> c{};
  for (const auto& e : entries)
    for (std::size_t i = 0; i < kNumIntents; ++i) c[i] += e.target[i] > 0;
  return c;
}

std::optional<GoldEntry> GoldSet::find(std::int64_t query_id) const {
  auto it = std::lower_bound(entries.begin(), entries.end(), query_id,
                             [](const GoldEntry& e, std::int64_t id) { return e.query_id < id; });
  if (it == entries.end() || it->query_id != query_id) return std::nullopt;
  return *it;
}

std::map<std::int64_t, std::string> read_query_texts(std::istream& in) {
  std::map<std::int64_t, std::string> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    std::int64_t id = 0;
    if (tab == std::string::npos || !parse_id(std::string_view(line).substr(0, tab), id))
      throw FormatError("query line " + std::to_string(line_no) + ": expected query_id<TAB>text");
    out[id] = line.substr(tab + 1);
  }
  return out;
}

GoldBuild build_gold(const std::vector<AnnotationRecord>& records,
                     const std::map<std::int64_t, std::string>& texts) {
  GoldBuild out;
  out.gt2.name = "GT-2";
  out.gt3.name = "GT-3";
  std::map<std::int64_t, std::vector<AnnotationRecord>> by_query;
  for (const auto& r : records) by_query[r.query_id].push_back(r);
  for (const auto& [id, recs] : by_query) {
    std::vector<std::string> tokens;
    if (auto it = texts.find(id); it != texts.end())
      if (auto t = tokenize(it->second)) tokens = std::move(*t);
    std::optional<IntentDistribution> gt2, gt3;
    try {
      gt2 = aggregate_gt2(recs);
      gt3 = aggregate_gt3(recs);
    } catch (const InvariantError& e) {
      out.validation[id] = e.what();
      continue;
    }
    if (gt2) out.gt2.entries.push_back({id, tokens, *gt2});
    else out.gt2.excluded[id] = "no class with two votes";
    if (gt3) out.gt3.entries.push_back({id, tokens, *gt3});
    else out.gt3.excluded[id] = "annotators disagree";
  }
  return out;
}

std::string format_gold_summary(const GoldBuild& build) {
  std::ostringstream os;
  os << "dataset\tentries\tinfo\tinformational\ttransactional\tnavigational\n";
  auto row = [&](const GoldSet& g, const char* info) {
    const auto c = g.counts();
    os << g.name << '\t' << g.entries.size() << '\t' << info << '\t' << c[0] << '\t' << c[1] << '\t'
       << c[2] << '\n';
  };
  row(build.gt2, "multi-intent, 2 agreements");
  row(build.gt3, "single-intent, 3 agreements");
  return os.str();
}

void write_gold(std::ostream& out, const GoldSet& gold) {
  for (const auto& e : gold.entries) out << join_tokens(e.tokens) << '\t' << format_weights(e.target) << '\n';
}

GoldSet read_gold(std::istream& in, std::string name) {
  GoldSet g;
  g.name = std::move(name);
  std::string line;
  std::size_t line_no = 0;
  std::int64_t next_id = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.rfind('\t');
    if (tab == std::string::npos)
      throw FormatError("gold line " + std::to_string(line_no) + ": expected tokens<TAB>i,t,n");
    GoldEntry e;
    e.query_id = next_id++;
    if (auto t = tokenize(std::string_view(line).substr(0, tab))) e.tokens = std::move(*t);
    try {
      e.target = parse_weights(std::string_view(line).substr(tab + 1));
    } catch (const Error& err) {
      throw FormatError("gold line " + std::to_string(line_no) + ": " + err.what());
    }
    g.entries.push_back(std::move(e));
  }
  return g;
}

}  // namespace qintent
