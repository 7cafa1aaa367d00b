#include "qintent/corpus.hpp"

#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "qintent/error.hpp"

namespace qintent {

namespace {

constexpr std::size_t kColumns = 6;

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

bool is_punct(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u < 0x80 && ((u >= 0x21 && u <= 0x2f) || (u >= 0x3a && u <= 0x40) ||
                      (u >= 0x5b && u <= 0x60) || (u >= 0x7b && u <= 0x7e));
}

char to_lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

template <typename T>
bool parse_int(std::string_view s, T& out) {
  s = trim(s);
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::optional<QueryRecord> parse_fields(const std::vector<std::string>& f) {
  if (f.size() != kColumns) return std::nullopt;
  QueryRecord r;
  if (!parse_int(f[0], r.id_group) || !parse_int(f[1], r.id_keyword)) return std::nullopt;
  auto date = Date::parse(trim(f[2]));
  if (!date) return std::nullopt;
  r.date = *date;
  if (!parse_int(f[3], r.impressions) || !parse_int(f[4], r.clicks)) return std::nullopt;
  const auto kw = trim(f[5]);
  if (kw.empty()) return std::nullopt;
  r.keyword = std::string(kw);
  return r;
}

bool looks_numeric(std::string_view s) {
  s = trim(s);
  if (s.empty()) return false;
  for (char c : s)
    if (c < '0' || c > '9') return false;
  return true;
}

}  // namespace

std::optional<Date> Date::parse(std::string_view s) {
  if (s.size() != 8 || !looks_numeric(s)) return std::nullopt;
  Date d;
  parse_int(s.substr(0, 4), d.year);
  parse_int(s.substr(4, 2), d.month);
  parse_int(s.substr(6, 2), d.day);
  static constexpr int kDays[] = {31, 29, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > kDays[d.month - 1]) return std::nullopt;
  const bool leap = (d.year % 4 == 0 && d.year % 100 != 0) || d.year % 400 == 0;
  if (d.month == 2 && d.day == 29 && !leap) return std::nullopt;
  return d;
}

std::string Date::str() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d%02d%02d", year, month, day);
  return buf;
}

std::string serialize_record(const QueryRecord& r, char delimiter) {
  std::string kw = r.keyword;
  if (kw.find(delimiter) != std::string::npos || kw.find('"') != std::string::npos) {
    std::string quoted = "\"";
    for (char c : kw) {
      if (c == '"') quoted += '"';
      quoted += c;
    }
    kw = quoted + '"';
  }
  const std::string d(1, delimiter);
  return std::to_string(r.id_group) + d + std::to_string(r.id_keyword) + d + r.date.str() + d +
         std::to_string(r.impressions) + d + std::to_string(r.clicks) + d + kw;
}

std::vector<std::string> split_row(std::string_view line, char delimiter) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  bool field_start = true;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"' && field_start) {
      quoted = true;
      field_start = false;
    } else if (c == delimiter) {
      out.push_back(std::move(field));
      field.clear();
      field_start = true;
    } else {
      field += c;
      field_start = false;
    }
  }
  out.push_back(std::move(field));
  return out;
}

CsvReader::CsvReader(std::istream& in, char delimiter, std::ostream* reject_log)
    : in_(in), delim_(delimiter), rejects_(reject_log) {
  if (!in_) throw IoError("unreadable record source");
}

std::optional<QueryRecord> CsvReader::next() {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_no_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto fields = split_row(line, delim_);
    if (line_no_ == 1 || (!header_seen_ && emitted_ == 0 && skipped_ == 0)) {
      if (!looks_numeric(fields.front())) {
        header_seen_ = true;
        continue;
      }
    }
    if (auto rec = parse_fields(fields)) {
      ++emitted_;
      return rec;
    }
    ++skipped_;
    if (rejects_) *rejects_ << line << '\n';
  }
  if (in_.bad()) throw IoError("read error at line " + std::to_string(line_no_));
  return std::nullopt;
}

std::vector<QueryRecord> parse_csv(std::istream& in, char delimiter, std::size_t* skipped,
                                   std::ostream* reject_log) {
  CsvReader reader(in, delimiter, reject_log);
  std::vector<QueryRecord> out;
  while (auto r = reader.next()) out.push_back(std::move(*r));
  if (skipped) *skipped = reader.skipped();
  return out;
}

std::optional<std::vector<std::string>> tokenize(std::string_view keyword) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < keyword.size()) {
    while (i < keyword.size() && is_space(keyword[i])) ++i;
    std::size_t j = i;
    while (j < keyword.size() && !is_space(keyword[j])) ++j;
    std::string_view raw = keyword.substr(i, j - i);
    i = j;
    std::size_t lo = 0, hi = raw.size();
    while (lo < hi && is_punct(raw[lo])) ++lo;
    while (hi > lo && is_punct(raw[hi - 1])) --hi;
    if (lo == hi) continue;
    std::string tok;
    if (lo > 0 && raw[lo - 1] == '.') tok += '.';
    for (std::size_t k = lo; k < hi; ++k) tok += to_lower(raw[k]);
    tokens.push_back(std::move(tok));
  }
  if (tokens.empty()) return std::nullopt;
  return tokens;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

std::size_t CorpusSlice::dropped() const {
  std::size_t n = 0;
  for (const auto& [_, c] : filter_log) n += c;
  return n;
}

CorpusSlice slice_first_n(RecordStream& records, std::size_t n) {
  if (n == 0) throw InvariantError("slice size must be >= 1");
  CorpusSlice slice;
  slice.name = "first-" + std::to_string(n);
  while (slice.input_size < n) {
    auto r = records.next();
    if (!r) break;
    const std::size_t index = slice.input_size++;
    if (auto tokens = tokenize(r->keyword))
      slice.records.push_back({index, std::move(*tokens)});
    else
      ++slice.filter_log[std::string(drop_reason::kUnusable)];
  }
  return slice;
}

SidecarLanguageDetector::SidecarLanguageDetector(std::istream& sidecar) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(sidecar, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto tab = line.find('\t');
    std::size_t index = 0;
    if (tab == std::string::npos || !parse_int(std::string_view(line).substr(0, tab), index))
      throw FormatError("sidecar line " + std::to_string(line_no) + ": expected index<TAB>lang");
    langs_[index] = std::string(trim(std::string_view(line).substr(tab + 1)));
  }
}

std::optional<std::string> SidecarLanguageDetector::operator()(std::size_t index,
                                                               const QueryRecord&) const {
  auto it = langs_.find(index);
  if (it == langs_.end() || it->second.empty()) return std::nullopt;
  return it->second;
}

CorpusSlice slice_by_language(RecordStream& records, const LanguageDetector& detector,
                              const std::string& lang) {
  CorpusSlice slice;
  slice.name = "lang-" + lang;
  while (auto r = records.next()) {
    const std::size_t index = slice.input_size++;
    std::optional<std::string> detected;
    try {
      detected = detector(index, *r);
    } catch (const std::exception&) {
      detected.reset();
    }
    if (!detected) {
      ++slice.filter_log[std::string(drop_reason::kLangError)];
      continue;
    }
    if (*detected != lang) {
      ++slice.filter_log[std::string(drop_reason::kLangMismatch)];
      continue;
    }
    if (auto tokens = tokenize(r->keyword))
      slice.records.push_back({index, std::move(*tokens)});
    else
      ++slice.filter_log[std::string(drop_reason::kUnusable)];
  }
  return slice;
}

void write_manifest(std::ostream& out, const CorpusSlice& slice) {
  out << "# qintent-corpus 1\n";
  out << "# name=" << slice.name << '\n';
  out << "# input=" << slice.input_size << '\n';
  out << "# kept=" << slice.records.size() << '\n';
  for (const auto& [reason, count] : slice.filter_log) out << "# drop." << reason << '=' << count << '\n';
  out << "---\n";
  for (const auto& q : slice.records) out << q.record_index << '\t' << join_tokens(q.tokens) << '\n';
}

CorpusSlice read_manifest(std::istream& in) {
  CorpusSlice slice;
  std::string line;
  std::size_t line_no = 0;
  std::optional<std::size_t> kept;
  bool body = false;
  auto fail = [&](const std::string& what) {
    throw FormatError("manifest line " + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!body) {
      if (line == "---") {
        body = true;
        continue;
      }
      if (line.rfind("# ", 0) != 0) fail("expected header entry");
      const std::string_view entry = std::string_view(line).substr(2);
      const auto eq = entry.find('=');
      if (eq == std::string_view::npos) continue;  // format banner
      const auto key = entry.substr(0, eq);
      const auto value = entry.substr(eq + 1);
      std::size_t n = 0;
      if (key == "name") {
        slice.name = std::string(value);
      } else if (key == "input") {
        if (!parse_int(value, slice.input_size)) fail("bad input count");
      } else if (key == "kept") {
        if (!parse_int(value, n)) fail("bad kept count");
        kept = n;
      } else if (key.rfind("drop.", 0) == 0) {
        if (!parse_int(value, n)) fail("bad drop count");
        slice.filter_log[std::string(key.substr(5))] = n;
      }
      continue;
    }
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    TokenizedQuery q;
    if (tab == std::string::npos || !parse_int(std::string_view(line).substr(0, tab), q.record_index))
      fail("expected record_index<TAB>tokens");
    auto tokens = tokenize(std::string_view(line).substr(tab + 1));
    if (!tokens) fail("empty query");
    q.tokens = std::move(*tokens);
    slice.records.push_back(std::move(q));
  }
  if (!body) throw FormatError("manifest has no body separator");
  if (kept && *kept != slice.records.size())
    throw FormatError("manifest kept=" + std::to_string(*kept) + " but body has " +
                      std::to_string(slice.records.size()) + " rows");
  if (!slice.reconciles()) throw FormatError("manifest counts do not reconcile");
  return slice;
}

}  // namespace qintent
