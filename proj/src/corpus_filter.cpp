#include "qintent/corpus.hpp"
#include "qintent/embedding.hpp"
#include "qintent/weak_label.hpp"

namespace qintent {

CorpusSlice filter_trainable(const CorpusSlice& slice, const Labeler& labeler,
                             const EmbeddingTable& emb, OovPolicy policy) {
  CorpusSlice out;
  out.name = slice.name;
  // Drop counts accumulate on top of the upstream slice's log.
  out.input_size = slice.input_size;
  out.filter_log = slice.filter_log;
  for (const auto& q : slice.records) {
    if (!labeler.label(q.tokens)) {
      ++out.filter_log[std::string(drop_reason::kNoLabel)];
      continue;
    }
    std::size_t embedded = 0;
    for (const auto& t : q.tokens) embedded += emb.contains(t);
    const bool keep = policy == OovPolicy::AllTokens ? embedded > 0 : embedded == q.tokens.size();
    if (!keep) {
      ++out.filter_log[std::string(drop_reason::kNoEmbedding)];
      continue;
    }
    out.records.push_back(q);
  }
  return out;
}

}  // namespace qintent
