#include "qintent/annotate.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <filesystem>
#include <sstream>

#include "qintent/error.hpp"

namespace qintent {

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
    if (tab == std::string_view::npos) return out;
    start = tab + 1;
  }
}

template <class T>
bool parse_int(std::string_view s, T& out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

}  // namespace

AnnotationStore::AnnotationStore(std::map<std::int64_t, std::vector<std::string>> queries,
                                 std::map<std::string, AnnotationMode> annotators,
                                 std::string log_path)
    : queries_(std::move(queries)), annotators_(std::move(annotators)), log_path_(std::move(log_path)) {
  if (annotators_.empty()) throw InvariantError("annotation store needs at least one annotator");
  replay();
  log_.open(log_path_, std::ios::binary | std::ios::app);
  if (!log_) throw IoError("cannot open annotation log '" + log_path_ + "'");
}

void AnnotationStore::replay() {
  std::ifstream in(log_path_, std::ios::binary);
  if (!in) return;
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  in.close();
  std::size_t complete = content.size();
  if (!content.empty() && content.back() != '\n') {
    // Torn write: the submission was never acknowledged.
    complete = content.rfind('\n');
    complete = complete == std::string::npos ? 0 : complete + 1;
    ++replay_discarded_;
    std::filesystem::resize_file(log_path_, complete);
  }
  std::string_view rest(content.data(), complete);
  while (!rest.empty()) {
    const auto nl = rest.find('\n');
    std::string_view line = rest.substr(0, nl);
    rest.remove_prefix(nl + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const auto f = split_tabs(line);
    std::uint64_t ts = 0;
    std::int64_t qid = 0;
    if (f.size() != 5 || !parse_int(f[0], ts) || !parse_int(f[2], qid)) {
      ++replay_discarded_;
      continue;
    }
    const std::string annotator(f[1]);
    std::array<bool, kNumIntents> bits{};
    try {
      bits = parse_bits(f[3]).bits();
    } catch (const Error&) {
      ++replay_discarded_;
      continue;
    }
    if (validate(annotator, qid, bits) || mode_name(annotators_.at(annotator)) != f[4]) {
      ++replay_discarded_;
      continue;
    }
    accepted_.push_back({qid, annotator, MultiHotLabel(bits), annotators_.at(annotator)});
    seen_.emplace(annotator, qid);
    clock_ = std::max(clock_, ts);
  }
}

std::optional<SubmitResult> AnnotationStore::validate(const std::string& annotator, std::int64_t query_id,
                                                      const std::array<bool, kNumIntents>& bits) const {
  auto a = annotators_.find(annotator);
  if (a == annotators_.end())
    return SubmitResult{SubmitStatus::UnknownAnnotator, "unknown annotator '" + annotator + "'"};
  if (!queries_.count(query_id))
    return SubmitResult{SubmitStatus::UnknownQuery, "unknown query " + std::to_string(query_id)};
  const auto n = std::count(bits.begin(), bits.end(), true);
  if (n == 0) return SubmitResult{SubmitStatus::InvalidLabel, "label sets no intent"};
  if (a->second == AnnotationMode::SingleIntent && n != 1)
    return SubmitResult{SubmitStatus::InvalidLabel, "single-intent annotator must set exactly one intent"};
  if (seen_.count({annotator, query_id}))
    return SubmitResult{SubmitStatus::Duplicate,
                        "query " + std::to_string(query_id) + " already labeled by '" + annotator + "'"};
  return std::nullopt;
}

std::optional<AnnotationTask> AnnotationStore::next_task(const std::string& annotator) const {
  std::shared_lock lock(mutex_);
  auto a = annotators_.find(annotator);
  if (a == annotators_.end()) throw InvariantError("unknown annotator '" + annotator + "'");
  for (const auto& [id, tokens] : queries_)
    if (!seen_.count({annotator, id})) return AnnotationTask{id, tokens, a->second};
  return std::nullopt;
}

SubmitResult AnnotationStore::submit(const std::string& annotator, std::int64_t query_id,
                                     const std::array<bool, kNumIntents>& bits) {
  std::unique_lock lock(mutex_);
  if (auto err = validate(annotator, query_id, bits)) return *err;
  const auto now = static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::milliseconds>(
                                                  std::chrono::system_clock::now().time_since_epoch())
                                                  .count());
  clock_ = std::max(clock_ + 1, now);
  const AnnotationMode mode = annotators_.at(annotator);
  const MultiHotLabel label(bits);
  log_ << clock_ << '\t' << annotator << '\t' << query_id << '\t' << format_bits(label) << '\t'
       << mode_name(mode) << '\n';
  log_.flush();
  if (!log_) throw IoError("append to annotation log '" + log_path_ + "' failed");
  accepted_.push_back({query_id, annotator, label, mode});
  seen_.emplace(annotator, query_id);
  return {SubmitStatus::Accepted, "ok"};
}

bool AnnotationStore::has_annotator(const std::string& annotator) const {
  return annotators_.count(annotator) > 0;
}

std::vector<AnnotationRecord> AnnotationStore::records() const {
  std::shared_lock lock(mutex_);
  auto out = accepted_;
  std::sort(out.begin(), out.end(), [](const AnnotationRecord& a, const AnnotationRecord& b) {
    return a.query_id != b.query_id ? a.query_id < b.query_id : a.annotator_id < b.annotator_id;
  });
  return out;
}

std::string AnnotationStore::export_annotations() const {
  std::ostringstream os;
  for (const auto& r : records()) write_annotation(os, r);
  return os.str();
}

Progress AnnotationStore::progress() const {
  const auto recs = records();
  Progress p;
  p.labeled = recs.size();
  p.total = queries_.size() * annotators_.size();
  std::size_t i = 0;
  while (i < recs.size()) {
    std::size_t j = i;
    while (j < recs.size() && recs[j].query_id == recs[i].query_id) ++j;
    if (j - i == 3) {
      const std::span<const AnnotationRecord> group(recs.data() + i, 3);
      try {
        p.gt2_count += aggregate_gt2(group).has_value();
        p.gt3_count += aggregate_gt3(group).has_value();
      } catch (const InvariantError&) {
      }
    }
    i = j;
  }
  return p;
}

std::map<std::string, AnnotationMode> read_annotators(std::istream& in) {
  std::map<std::string, AnnotationMode> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0)
      throw FormatError("annotator line " + std::to_string(line_no) + ": expected annotator<TAB>mode");
    if (!out.emplace(line.substr(0, tab), parse_mode(line.substr(tab + 1))).second)
      throw FormatError("annotator line " + std::to_string(line_no) + ": duplicate annotator");
  }
  return out;
}

}  // namespace qintent
