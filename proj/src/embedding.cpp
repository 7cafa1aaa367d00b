#include "qintent/embedding.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "qintent/corpus.hpp"
#include "qintent/error.hpp"

namespace qintent {

std::string_view distance_name(DistanceKind k) {
  switch (k) {
    case DistanceKind::SquaredL2: return "squared-l2";
    case DistanceKind::L1: return "l1";
    case DistanceKind::Cosine: return "cosine";
  }
  return "?";
}

DistanceKind parse_distance(std::string_view name) {
  if (name == "squared-l2" || name == "l2" || name == "sql2") return DistanceKind::SquaredL2;
  if (name == "l1") return DistanceKind::L1;
  if (name == "cosine" || name == "cos") return DistanceKind::Cosine;
  throw InvariantError("unknown distance '" + std::string(name) + "'");
}

EmbeddingTable EmbeddingTable::pretrained(std::size_t dim) {
  if (dim == 0) throw InvariantError("embedding dimension must be positive");
  return EmbeddingTable(dim, EmbeddingKind::Pretrained);
}

EmbeddingTable EmbeddingTable::one_hot(std::vector<std::string> vocabulary) {
  if (vocabulary.empty()) throw InvariantError("one-hot vocabulary is empty");
  EmbeddingTable t(vocabulary.size(), EmbeddingKind::OneHot);
  t.words_ = std::move(vocabulary);
  for (std::size_t i = 0; i < t.words_.size(); ++i) {
    if (!t.index_.emplace(t.words_[i], i).second)
      throw InvariantError("duplicate one-hot word '" + t.words_[i] + "'");
  }
  return t;
}

bool EmbeddingTable::contains(std::string_view word) const {
  return index_.find(std::string(word)) != index_.end();
}

std::optional<std::size_t> EmbeddingTable::index_of(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool EmbeddingTable::lookup(std::string_view word, std::span<double> out) const {
  const auto idx = index_of(word);
  if (!idx) return false;
  if (out.size() != dim_) throw ShapeError("lookup buffer has wrong length");
  if (kind_ == EmbeddingKind::OneHot) {
    std::fill(out.begin(), out.end(), 0.0);
    out[*idx] = 1.0;
  } else {
    const auto r = row(*idx);
    std::copy(r.begin(), r.end(), out.begin());
  }
  return true;
}

std::optional<std::vector<double>> EmbeddingTable::vector(std::string_view word) const {
  std::vector<double> v(dim_);
  if (!lookup(word, v)) return std::nullopt;
  return v;
}

std::span<const double> EmbeddingTable::row(std::size_t index) const {
  if (kind_ == EmbeddingKind::OneHot) return {};
  return std::span<const double>(data_).subspan(index * dim_, dim_);
}

bool EmbeddingTable::add(std::string word, std::span<const double> values) {
  if (kind_ != EmbeddingKind::Pretrained) throw InvariantError("cannot add vectors to a one-hot table");
  if (values.size() != dim_) throw ShapeError("vector length " + std::to_string(values.size()) +
                                              " != table dimension " + std::to_string(dim_));
  if (index_.count(word)) return false;
  index_.emplace(word, words_.size());
  words_.push_back(std::move(word));
  data_.insert(data_.end(), values.begin(), values.end());
  return true;
}

namespace {

std::vector<std::string_view> split_spaces(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

bool parse_size(std::string_view s, std::size_t& out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

}  // namespace

EmbeddingTable load_pretrained(std::istream& in, std::optional<std::size_t> expected_dim,
                               LoadReport* report) {
  if (!in) throw IoError("unreadable embedding source");
  LoadReport rep;
  std::optional<EmbeddingTable> table;
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto parts = split_spaces(line);
    if (parts.empty()) continue;
    if (!table && line_no == 1 && parts.size() == 2) {
      std::size_t count = 0, dim = 0;
      if (parse_size(parts[0], count) && parse_size(parts[1], dim)) {
        if (expected_dim && *expected_dim != dim)
          throw FormatError("embedding header declares dimension " + std::to_string(dim) +
                            ", expected " + std::to_string(*expected_dim));
        rep.had_header = true;
        table = EmbeddingTable::pretrained(dim);
        continue;
      }
    }
    const std::size_t dim = parts.size() - 1;
    if (dim == 0) throw FormatError("embedding line " + std::to_string(line_no) + " has no values");
    if (!table) {
      if (expected_dim && *expected_dim != dim)
        throw FormatError("embedding dimension mismatch at line " + std::to_string(line_no) +
                          ": file has " + std::to_string(dim) + ", expected " +
                          std::to_string(*expected_dim));
      table = EmbeddingTable::pretrained(dim);
    } else if (dim != table->dim()) {
      throw FormatError("embedding line " + std::to_string(line_no) + " has " +
                        std::to_string(dim) + " values, expected " + std::to_string(table->dim()));
    }
    values.resize(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      const auto tok = parts[i + 1];
      auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), values[i]);
      if (ec != std::errc() || p != tok.data() + tok.size())
        throw FormatError("embedding line " + std::to_string(line_no) + ": non-numeric component '" +
                          std::string(tok) + "'");
    }
    ++rep.lines;
    if (!table->add(std::string(parts[0]), values)) ++rep.duplicates;
  }
  if (in.bad()) throw IoError("read error in embedding source");
  if (!table) throw FormatError("embedding source is empty");
  if (report) *report = rep;
  return std::move(*table);
}

EmbeddingTable load_pretrained_file(const std::string& path, std::optional<std::size_t> expected_dim,
                                    LoadReport* report) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open embedding file '" + path + "'");
  return load_pretrained(in, expected_dim, report);
}

EmbeddingTable build_one_hot(const CorpusSlice& slice) {
  std::vector<std::string> vocab;
  std::unordered_map<std::string, std::size_t> seen;
  for (const auto& q : slice.records)
    for (const auto& t : q.tokens)
      if (seen.emplace(t, vocab.size()).second) vocab.push_back(t);
  if (vocab.empty()) throw InvariantError("cannot build a one-hot table from an empty slice");
  return EmbeddingTable::one_hot(std::move(vocab));
}

void write_one_hot_vocab(std::ostream& out, const EmbeddingTable& table) {
  for (std::size_t i = 0; i < table.words().size(); ++i) out << table.words()[i] << '\t' << i << '\n';
}

EmbeddingTable read_one_hot_vocab(std::istream& in) {
  std::vector<std::string> vocab;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    std::size_t idx = 0;
    if (tab == std::string::npos || !parse_size(std::string_view(line).substr(tab + 1), idx) ||
        idx != vocab.size())
      throw FormatError("vocab line " + std::to_string(line_no) + ": expected word<TAB>" +
                        std::to_string(vocab.size()));
    vocab.push_back(line.substr(0, tab));
  }
  return EmbeddingTable::one_hot(std::move(vocab));
}

double distance(std::span<const double> u, std::span<const double> v, DistanceKind kind) {
  if (u.size() != v.size())
    throw ShapeError("distance between vectors of length " + std::to_string(u.size()) + " and " +
                     std::to_string(v.size()));
  switch (kind) {
    case DistanceKind::SquaredL2: {
      double s = 0;
      for (std::size_t i = 0; i < u.size(); ++i) s += (u[i] - v[i]) * (u[i] - v[i]);
      return s;
    }
    case DistanceKind::L1: {
      double s = 0;
      for (std::size_t i = 0; i < u.size(); ++i) s += std::abs(u[i] - v[i]);
      return s;
    }
    case DistanceKind::Cosine: {
      double dot = 0, nu = 0, nv = 0;
      for (std::size_t i = 0; i < u.size(); ++i) {
        dot += u[i] * v[i];
        nu += u[i] * u[i];
        nv += v[i] * v[i];
      }
      if (nu == 0 || nv == 0) throw InvariantError("cosine distance of a zero vector");
      const double cos = std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0);
      return 1.0 - cos;
    }
  }
  return 0;
}

SimilarWords similar_words(std::string_view word, const std::vector<std::string>& candidates,
                           const EmbeddingTable& emb, DistanceKind kind, double threshold) {
  SimilarWords out;
  const auto query = emb.vector(word);
  if (!query) {
    out.query_word_oov = true;
    return out;
  }
  auto is_zero = [](std::span<const double> x) {
    return std::all_of(x.begin(), x.end(), [](double e) { return e == 0.0; });
  };
  const bool query_zero = is_zero(*query);
  std::vector<double> buf(emb.dim());
  for (const auto& c : candidates) {
    if (c == word) {
      out.matches.emplace_back(c, 0.0);
      continue;
    }
    if (!emb.lookup(c, buf)) continue;
    if (kind == DistanceKind::Cosine && (query_zero || is_zero(buf))) continue;
    const double d = distance(*query, buf, kind);
    if (d < threshold) out.matches.emplace_back(c, d);
  }
  std::sort(out.matches.begin(), out.matches.end());
  out.matches.erase(std::unique(out.matches.begin(), out.matches.end()), out.matches.end());
  return out;
}

}  // namespace qintent
