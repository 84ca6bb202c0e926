#include "ssr/retrieval.hpp"

#include <algorithm>
#include <set>

#include "ssr/kernels.hpp"

namespace ssr::retrieval {

RetrievalMode mode_from_string(const std::string& s) {
  if (s == "tt") return RetrievalMode::TT;
  if (s == "vv") return RetrievalMode::VV;
  if (s == "mm") return RetrievalMode::MM;
  if (s == "vm") return RetrievalMode::VM;
  if (s == "tm") return RetrievalMode::TM;
  throw std::invalid_argument("unknown retrieval mode: " + s);
}

std::string mode_name(RetrievalMode mode) {
  switch (mode) {
    case RetrievalMode::TT: return "tt";
    case RetrievalMode::VV: return "vv";
    case RetrievalMode::MM: return "mm";
    case RetrievalMode::VM: return "vm";
    case RetrievalMode::TM: return "tm";
  }
  return "?";
}

char trigger_modality(RetrievalMode mode) {
  switch (mode) {
    case RetrievalMode::TT: return 't';
    case RetrievalMode::VV: return 'v';
    case RetrievalMode::MM: return 'm';
    case RetrievalMode::VM: return 'v';
    case RetrievalMode::TM: return 't';
  }
  return 'm';
}

char recall_modality(RetrievalMode mode) {
  switch (mode) {
    case RetrievalMode::TT: return 't';
    case RetrievalMode::VV: return 'v';
    default: return 'm';
  }
}

EmbeddingIndex::EmbeddingIndex(std::vector<std::string> ids,
                               std::vector<double> vectors, std::size_t dim)
    : ids_(std::move(ids)), vectors_(std::move(vectors)), dim_(dim) {
  if (ids_.empty()) throw EmptyCatalog("index needs at least one item");
  if (vectors_.size() != ids_.size() * dim_)
    throw autodiff::ShapeMismatch("index: vector buffer size mismatch");
  std::set<std::string> unique(ids_.begin(), ids_.end());
  if (unique.size() != ids_.size())
    throw std::invalid_argument("index: duplicate item ids");
}

namespace {

std::vector<double> modality_embedding(const ProductFeatures& f,
                                       const encoder::EncoderParams& theta,
                                       char modality) {
  switch (modality) {
    case 'm': return encoder::encode_plain(f, theta, encoder::MaskMode::Full);
    case 'v': return encoder::encode_plain(f, theta, encoder::MaskMode::ImageOnly);
    case 't': return encoder::encode_plain(f, theta, encoder::MaskMode::TextOnly);
    default: throw std::invalid_argument("unknown modality");
  }
}

}  // namespace

EmbeddingIndex build_index(const std::vector<ProductFeatures>& items,
                           const encoder::EncoderParams& theta, char modality) {
  if (items.empty()) throw EmptyCatalog("build_index: empty catalog");
  std::vector<std::string> ids;
  std::vector<double> vectors;
  ids.reserve(items.size());
  for (const auto& f : items) {
    ids.push_back(f.item_id);
    auto e = modality_embedding(f, theta, modality);
    vectors.insert(vectors.end(), e.begin(), e.end());
  }
  std::size_t dim = vectors.size() / items.size();
  return EmbeddingIndex(std::move(ids), std::move(vectors), dim);
}

std::vector<SearchHit> search(const EmbeddingIndex& index,
                              const std::vector<double>& query, std::size_t k) {
  if (query.size() != index.dim())
    throw autodiff::ShapeMismatch("search: query dimension mismatch");
  std::vector<double> scores(index.size());
  kernels::dot_scan(query.data(), index.vector(0), index.size(), index.dim(),
                    scores.data());
  std::vector<std::size_t> order(index.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return index.ids()[a] < index.ids()[b];
  });
  std::size_t take = std::min(k, order.size());
  std::vector<SearchHit> hits;
  hits.reserve(take);
  for (std::size_t i = 0; i < take; ++i)
    hits.push_back({index.ids()[order[i]], scores[order[i]]});
  return hits;
}

double mrr(const std::vector<std::size_t>& ranks) {
  if (ranks.empty()) throw EmptyList("mrr: empty rank list");
  double acc = 0.0;
  for (std::size_t r : ranks) acc += 1.0 / static_cast<double>(r);
  return acc / static_cast<double>(ranks.size());
}

double recall_at_k(const std::vector<std::size_t>& ranks, std::size_t k) {
  if (ranks.empty()) throw EmptyList("recall_at_k: empty rank list");
  std::size_t hits = 0;
  for (std::size_t r : ranks)
    if (r <= k) ++hits;
  return static_cast<double>(hits) / static_cast<double>(ranks.size());
}

std::size_t rank_of(const EmbeddingIndex& index, const std::vector<double>& query,
                    const std::string& target_id) {
  if (query.size() != index.dim())
    throw autodiff::ShapeMismatch("rank_of: query dimension mismatch");
  std::vector<double> scores(index.size());
  kernels::dot_scan(query.data(), index.vector(0), index.size(), index.dim(),
                    scores.data());
  double target = 0.0;
  bool found = false;
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index.ids()[i] == target_id) {
      target = scores[i];
      found = true;
      break;
    }
  }
  if (!found) throw std::invalid_argument("rank_of: target not in index");
  // pessimistic ties: worst position within the tie group
  std::size_t rank = 0;
  for (double s : scores)
    if (s >= target) ++rank;
  return rank;
}

EvalReport evaluate(const std::vector<sampler::TrainingPair>& pairs,
                    const std::map<std::string, ProductFeatures>& features,
                    const encoder::EncoderParams& theta, RetrievalMode mode,
                    const std::vector<std::string>& distractor_ids) {
  if (pairs.empty()) throw EmptyTestSet("evaluate: no pairs");
  std::set<std::string> pool_ids;
  for (const auto& p : pairs) pool_ids.insert(p.recall);
  for (const auto& id : distractor_ids) pool_ids.insert(id);
  std::vector<ProductFeatures> pool;
  for (const auto& id : pool_ids) pool.push_back(features.at(id));
  EmbeddingIndex index = build_index(pool, theta, recall_modality(mode));

  char tmod = trigger_modality(mode);
  std::vector<std::size_t> ranks;
  ranks.reserve(pairs.size());
  for (const auto& p : pairs) {
    auto q = modality_embedding(features.at(p.trigger), theta, tmod);
    ranks.push_back(rank_of(index, q, p.recall));
  }

  EvalReport report;
  report.mode = mode;
  report.mrr = mrr(ranks);
  for (std::size_t k : {1, 5, 10, 20}) report.recall_at[k] = recall_at_k(ranks, k);
  report.num_queries = ranks.size();
  return report;
}

}  // namespace ssr::retrieval
