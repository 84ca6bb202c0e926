#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "ssr/encoder.hpp"
#include "ssr/sampler.hpp"

// Exact flat embedding index, cross-modal product-to-product search, and
// MRR / Recall@K evaluation. Exhaustive scan only; approximate indexes would
// break the oracle equality tests.
namespace ssr::retrieval {

struct EmptyCatalog : std::runtime_error {
  explicit EmptyCatalog(const std::string& what) : std::runtime_error(what) {}
};
struct EmptyTestSet : std::runtime_error {
  explicit EmptyTestSet(const std::string& what) : std::runtime_error(what) {}
};
struct EmptyList : std::runtime_error {
  explicit EmptyList(const std::string& what) : std::runtime_error(what) {}
};

// Which trigger embedding queries which recall embedding.
enum class RetrievalMode { TT, VV, MM, VM, TM };

RetrievalMode mode_from_string(const std::string& s);  // tt|vv|mm|vm|tm
std::string mode_name(RetrievalMode mode);
char trigger_modality(RetrievalMode mode);  // 'm' | 'v' | 't'
char recall_modality(RetrievalMode mode);

class EmbeddingIndex {
 public:
  EmbeddingIndex(std::vector<std::string> ids, std::vector<double> vectors,
                 std::size_t dim);

  std::size_t size() const { return ids_.size(); }
  std::size_t dim() const { return dim_; }
  const std::vector<std::string>& ids() const { return ids_; }
  const double* vector(std::size_t i) const { return vectors_.data() + i * dim_; }

 private:
  std::vector<std::string> ids_;
  std::vector<double> vectors_;  // flat row-major
  std::size_t dim_;
};

struct SearchHit {
  std::string item_id;
  double score = 0.0;
};

struct EvalReport {
  RetrievalMode mode = RetrievalMode::MM;
  double mrr = 0.0;
  std::map<std::size_t, double> recall_at;  // K in {1,5,10,20}
  std::size_t num_queries = 0;
};

// Index over the chosen modality ('m'|'v'|'t') embedding of every item.
EmbeddingIndex build_index(const std::vector<ProductFeatures>& items,
                           const encoder::EncoderParams& theta, char modality);

// Top-k by dot product descending, ties by ascending item_id, exhaustive scan.
std::vector<SearchHit> search(const EmbeddingIndex& index,
                              const std::vector<double>& query, std::size_t k);

double mrr(const std::vector<std::size_t>& ranks);
double recall_at_k(const std::vector<std::size_t>& ranks, std::size_t k);

// 1-based rank of target_id when querying the index; a tied target takes the
// worst position within its tie group.
std::size_t rank_of(const EmbeddingIndex& index, const std::vector<double>& query,
                    const std::string& target_id);

// Candidate pool = recall items of the pair set plus optional distractors;
// each pair queries with the trigger's mode-side embedding against the pool
// indexed on the mode's recall side.
EvalReport evaluate(const std::vector<sampler::TrainingPair>& pairs,
                    const std::map<std::string, ProductFeatures>& features,
                    const encoder::EncoderParams& theta, RetrievalMode mode,
                    const std::vector<std::string>& distractor_ids = {});

}  // namespace ssr::retrieval
