#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "ssr/encoder.hpp"
#include "ssr/loss.hpp"
#include "ssr/sampler.hpp"

// Batch composition (uniform sub-category, pairwise-distinct style groups)
// and the fine-tuning loop: AdamLike/SGD steps on the contrastive loss unit,
// per-epoch validation MRR, early stopping, best-epoch parameters.
namespace ssr::trainer {

struct EmptyTrainingSet : std::runtime_error {
  explicit EmptyTrainingSet(const std::string& what) : std::runtime_error(what) {}
};

enum class Optimizer { SGD, AdamLike };

struct TrainConfig {
  double learning_rate = 3e-4;
  std::size_t batch_size = 16;
  std::size_t max_epochs = 5;
  std::size_t early_stop_patience = 1;  // epochs without val MRR improvement
  Optimizer optimizer = Optimizer::AdamLike;
  std::uint64_t seed = 0;
  std::size_t d_h = 16;
  std::size_t d_out = 8;

  void validate() const;  // lr >= 0, batch_size >= 2 (in-batch negatives)
};

struct BatchPlan {
  std::vector<std::vector<sampler::TrainingPair>> batches;
  std::size_t dropped_pairs = 0;
};

using StyleOf = std::function<std::string(const sampler::TrainingPair&)>;

// Group id per pair: ground-truth style_id when the features carry one,
// otherwise connected components of the trigger-recall pair graph.
StyleOf style_groups(const std::vector<sampler::TrainingPair>& pairs,
                     const std::map<std::string, ProductFeatures>& features);

// Pairs grouped by sub-category, shuffled by seed, greedily packed into
// batches of <= batch_size with pairwise-distinct style groups. Batches that
// end up smaller than 2 pairs are dropped (counted), since the losses need
// in-batch negatives.
BatchPlan make_batches(const std::vector<sampler::TrainingPair>& pairs,
                       const StyleOf& style_of, std::size_t batch_size,
                       std::uint64_t seed);

struct BatchLogRow {
  std::size_t epoch = 0;
  std::size_t batch = 0;
  loss::LossBreakdown losses;
  double val_mrr = 0.0;  // epoch-level metric, filled after the epoch
};

struct EpochRecord {
  std::size_t epoch = 0;
  double val_mrr = 0.0;
  double mean_total_loss = 0.0;
};

struct FitResult {
  encoder::EncoderParams params;  // from the best validation epoch
  std::vector<EpochRecord> history;
  std::vector<BatchLogRow> log;
  std::size_t best_epoch = 0;
  std::size_t dropped_pairs = 0;
};

FitResult fit(const std::vector<sampler::TrainingPair>& pairs,
              const std::map<std::string, ProductFeatures>& features,
              const TrainConfig& config, const loss::LossConfig& loss_config);

enum class BaselineMode { VV, TT };

// Same loop, but single-modality embeddings on both sides and the plain
// hinge objective; validation MRR is measured in the matching mode.
FitResult fit_baseline(const std::vector<sampler::TrainingPair>& pairs,
                       const std::map<std::string, ProductFeatures>& features,
                       const TrainConfig& config, BaselineMode mode,
                       double margin = 0.3);

// Deterministic 10% validation split by FNV-1a hash of trigger_id.
bool is_validation_pair(const sampler::TrainingPair& pair);

}  // namespace ssr::trainer
