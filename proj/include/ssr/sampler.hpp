#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "ssr/clickgraph.hpp"
#include "ssr/features.hpp"

// Constrained weighted sampling of trigger-recall positive pairs from the
// click graph: admissible queries only, top-k items per query, all unordered
// pairs among them, filtered by sub-category / reference-embedding similarity
// / core-keyword overlap.
namespace ssr::sampler {

struct SamplerConfig {
  std::size_t k_per_query = 4;
  double sim_threshold = 0.7;
  std::set<std::string> core_vocab;
  std::size_t min_query_words = 2;

  // Ablation switches; all constraints enabled by default.
  bool enforce_query_admissible = true;
  bool enforce_same_subcategory = true;
  bool enforce_similarity = true;
  bool enforce_keyword_overlap = true;

  void validate() const;
};

struct TrainingPair {
  std::string trigger;
  std::string recall;
  std::string source_query;
  std::string sub_category_id;

  friend auto operator<=>(const TrainingPair&, const TrainingPair&) = default;
};

// Pluggable reference embeddings for the pairwise similarity constraint.
// Outputs must be unit-normalized (or zero) and deterministic per item.
class ReferenceEmbedder {
 public:
  virtual ~ReferenceEmbedder() = default;
  virtual std::vector<double> image_embed(const clickgraph::ItemNode& item) const = 0;
  virtual std::vector<double> text_embed(const clickgraph::ItemNode& item) const = 0;
};

// Reference embeddings from raw token features: the normalized mean of a
// product's image tokens and of its text tokens (excluding the [CLS] slot).
class RawFeatureEmbedder : public ReferenceEmbedder {
 public:
  explicit RawFeatureEmbedder(const std::map<std::string, ProductFeatures>* features)
      : features_(features) {}
  std::vector<double> image_embed(const clickgraph::ItemNode& item) const override;
  std::vector<double> text_embed(const clickgraph::ItemNode& item) const override;

 private:
  const std::map<std::string, ProductFeatures>* features_;
};

// Lowercased words of text present in vocab.
std::set<std::string> core_keywords(const std::string& text,
                                    const std::set<std::string>& vocab);

// Word set an item contributes to the keyword-overlap filter: title + keywords.
std::set<std::string> item_core_keywords(const clickgraph::ItemNode& item,
                                         const std::set<std::string>& vocab);

// Word count >= min_query_words and at least one core keyword.
bool query_admissible(const clickgraph::QueryNode& query, const SamplerConfig& config);

// Same sub-category, image and text reference similarity >= threshold, and at
// least one shared core keyword over title + keywords.
bool pair_admissible(const clickgraph::ItemNode& a, const clickgraph::ItemNode& b,
                     const ReferenceEmbedder& ref, const SamplerConfig& config);

// For each admissible query: top-k items, all unordered pairs, keep the
// admissible ones with trigger = higher-weight item (tie: lower item_id).
// Output deduplicated on (trigger, recall) and sorted.
std::vector<TrainingPair> sample_pairs(const clickgraph::ClickGraph& graph,
                                       const ReferenceEmbedder& ref,
                                       const SamplerConfig& config);

}  // namespace ssr::sampler
