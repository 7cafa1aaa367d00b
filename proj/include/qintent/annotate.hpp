#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <variant>
#include <vector>

#include "qintent/gold.hpp"

namespace qintent {

struct AnnotationTask {
  std::int64_t query_id = 0;
  std::vector<std::string> tokens;
  AnnotationMode mode = AnnotationMode::MultiIntent;
};

enum class SubmitStatus { Accepted, UnknownAnnotator, UnknownQuery, InvalidLabel, Duplicate };

struct SubmitResult {
  SubmitStatus status;
  std::string message;
};

struct Progress {
  std::size_t labeled = 0;  // acknowledged submissions
  std::size_t total = 0;    // queries x annotators
  std::size_t gt2_count = 0;
  std::size_t gt3_count = 0;
};

/// Task queue and append-only label log behind the annotation service.
///
/// Every acknowledged submission is one line
/// `ts<TAB>annotator<TAB>query_id<TAB>i,t,n<TAB>mode`, flushed before the call
/// returns. Opening an existing log replays it; a torn final line (no newline)
/// is discarded, and so are lines that fail validation.
class AnnotationStore {
 public:
  AnnotationStore(std::map<std::int64_t, std::vector<std::string>> queries,
                  std::map<std::string, AnnotationMode> annotators, std::string log_path);

  /// Lowest-id query this annotator has not labeled; nullopt when done.
  /// Throws InvariantError for an unregistered annotator.
  std::optional<AnnotationTask> next_task(const std::string& annotator) const;
  SubmitResult submit(const std::string& annotator, std::int64_t query_id,
                      const std::array<bool, kNumIntents>& bits);

  bool has_annotator(const std::string& annotator) const;
  /// Gold-module annotation file, sorted by (query_id, annotator).
  std::string export_annotations() const;
  /// Aggregates queries with exactly three labels.
  Progress progress() const;
  std::vector<AnnotationRecord> records() const;
  std::size_t replay_discarded() const { return replay_discarded_; }

 private:
  std::optional<SubmitResult> validate(const std::string& annotator, std::int64_t query_id,
                                       const std::array<bool, kNumIntents>& bits) const;
  void replay();

  std::map<std::int64_t, std::vector<std::string>> queries_;
  std::map<std::string, AnnotationMode> annotators_;
  std::string log_path_;
  std::ofstream log_;
  mutable std::shared_mutex mutex_;
  std::vector<AnnotationRecord> accepted_;
  std::set<std::pair<std::string, std::int64_t>> seen_;
  std::size_t replay_discarded_ = 0;
  std::uint64_t clock_ = 0;
};

/// Loads `annotator<TAB>mode` lines.
std::map<std::string, AnnotationMode> read_annotators(std::istream& in);

/// HTTP+JSON front end:
///   GET  /api/task?annotator=ID   -> {query_id, tokens, mode} | {done: true}; 404 unknown
///   POST /api/label               -> 200 / 404 / 409 duplicate / 422 invalid
///   GET  /api/export              -> annotation file body
///   GET  /api/progress            -> {labeled, total, gt2_count, gt3_count}
/// plus static files under `/` when a directory is given.
class AnnotationServer {
 public:
  AnnotationServer(AnnotationStore& store, std::string static_dir = {});
  ~AnnotationServer();
  AnnotationServer(const AnnotationServer&) = delete;
  AnnotationServer& operator=(const AnnotationServer&) = delete;

  /// Binds and serves on a background thread; returns the bound port
  /// (pass 0 for an ephemeral one).
  int start(const std::string& host, int port);
  /// Serves on the calling thread until stop().
  bool listen(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace qintent
