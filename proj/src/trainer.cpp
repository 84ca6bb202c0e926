#include "ssr/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <set>

#include "ssr/retrieval.hpp"

namespace ssr::trainer {

using autodiff::Tape;
using autodiff::Value;

void TrainConfig::validate() const {
  // zero is allowed so no-op training runs stay expressible
  if (learning_rate < 0.0)
    throw std::invalid_argument("learning_rate must be >= 0");
  if (batch_size < 2)
    throw std::invalid_argument("batch_size must be >= 2 for in-batch negatives");
  if (max_epochs == 0 || early_stop_patience == 0)
    throw std::invalid_argument("max_epochs and early_stop_patience must be positive");
  if (d_h == 0 || d_out == 0)
    throw std::invalid_argument("hidden/output dimensions must be positive");
}

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// union-find over item ids
class UnionFind {
 public:
  std::string find(const std::string& x) {
    auto it = parent_.find(x);
    if (it == parent_.end()) {
      parent_[x] = x;
      return x;
    }
    if (it->second == x) return x;
    std::string root = find(it->second);
    parent_[x] = root;
    return root;
  }
  void unite(const std::string& a, const std::string& b) {
    std::string ra = find(a), rb = find(b);
    if (ra != rb) parent_[std::max(ra, rb)] = std::min(ra, rb);
  }

 private:
  std::map<std::string, std::string> parent_;
};

struct AdamState {
  std::vector<double> m, v;
  std::size_t t = 0;
};

void apply_step(std::vector<double>& params, const std::vector<double>& grads,
                const TrainConfig& cfg, AdamState& adam) {
  if (cfg.optimizer == Optimizer::SGD) {
    for (std::size_t i = 0; i < params.size(); ++i)
      params[i] -= cfg.learning_rate * grads[i];
    return;
  }
  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  if (adam.m.empty()) {
    adam.m.assign(params.size(), 0.0);
    adam.v.assign(params.size(), 0.0);
  }
  ++adam.t;
  double bc1 = 1.0 - std::pow(beta1, static_cast<double>(adam.t));
  double bc2 = 1.0 - std::pow(beta2, static_cast<double>(adam.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    adam.m[i] = beta1 * adam.m[i] + (1.0 - beta1) * grads[i];
    adam.v[i] = beta2 * adam.v[i] + (1.0 - beta2) * grads[i] * grads[i];
    double mhat = adam.m[i] / bc1;
    double vhat = adam.v[i] / bc2;
    params[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + eps);
  }
}

std::size_t infer_d_in(const std::map<std::string, ProductFeatures>& features) {
  for (const auto& [id, f] : features) {
    if (f.image_tokens.size() > 0) return f.image_tokens.cols();
    if (f.text_tokens.size() > 0) return f.text_tokens.cols();
  }
  throw EmptyTrainingSet("no features with tokens");
}

struct Split {
  std::vector<sampler::TrainingPair> train, val;
};

Split split_pairs(const std::vector<sampler::TrainingPair>& pairs) {
  Split s;
  for (const auto& p : pairs)
    (is_validation_pair(p) ? s.val : s.train).push_back(p);
  if (s.train.empty()) {
    s.train = pairs;
  }
  if (s.val.empty()) s.val = s.train;  // tiny datasets: validate on train
  return s;
}

// shared training loop; batch_loss builds the batch objective on the tape and
// returns (loss root, breakdown extractor runs after backward)
using BatchLossFn = std::function<loss::LossBreakdown(
    Tape&, const encoder::EncoderOnTape&,
    const std::vector<sampler::TrainingPair>&, Value& root)>;

FitResult run_fit(const std::vector<sampler::TrainingPair>& pairs,
                  const std::map<std::string, ProductFeatures>& features,
                  const TrainConfig& config, const BatchLossFn& batch_loss,
                  retrieval::RetrievalMode val_mode) {
  config.validate();
  if (pairs.empty()) throw EmptyTrainingSet("fit: no training pairs");
  for (const auto& p : pairs) {
    if (!features.contains(p.trigger) || !features.contains(p.recall))
      throw EmptyTrainingSet("fit: pair references item without features: " +
                             p.trigger + "/" + p.recall);
  }

  Split split = split_pairs(pairs);
  StyleOf style_of = style_groups(split.train, features);
  BatchPlan plan = make_batches(split.train, style_of, config.batch_size,
                                config.seed);
  if (plan.batches.empty())
    throw EmptyTrainingSet("fit: no batches satisfy the composition rule");

  std::size_t d_in = infer_d_in(features);
  encoder::EncoderParams params =
      encoder::EncoderParams::init(d_in, config.d_h, config.d_out, config.seed);
  std::vector<double> flat = params.flatten();
  AdamState adam;

  FitResult result;
  result.dropped_pairs = plan.dropped_pairs;
  double best_mrr = -1.0;
  std::size_t since_best = 0;

  for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
    double loss_sum = 0.0;
    std::size_t first_row = result.log.size();
    for (std::size_t b = 0; b < plan.batches.size(); ++b) {
      params = encoder::EncoderParams::unflatten(d_in, config.d_h,
                                                 config.d_out, flat);
      Tape tape;
      encoder::EncoderOnTape theta = encoder::EncoderOnTape::attach(tape, params);
      Value root;
      loss::LossBreakdown breakdown =
          batch_loss(tape, theta, plan.batches[b], root);
      tape.backward(root);
      apply_step(flat, theta.collect_grads(tape), config, adam);
      loss_sum += breakdown.total;
      result.log.push_back({epoch, b, breakdown, 0.0});
    }
    params = encoder::EncoderParams::unflatten(d_in, config.d_h, config.d_out,
                                               flat);
    double val_mrr =
        retrieval::evaluate(split.val, features, params, val_mode).mrr;
    for (std::size_t r = first_row; r < result.log.size(); ++r)
      result.log[r].val_mrr = val_mrr;
    result.history.push_back(
        {epoch, val_mrr, loss_sum / static_cast<double>(plan.batches.size())});

    if (val_mrr > best_mrr) {
      best_mrr = val_mrr;
      result.best_epoch = epoch;
      result.params = params;
      since_best = 0;
    } else {
      ++since_best;
      if (since_best >= config.early_stop_patience) break;
    }
  }
  return result;
}

}  // namespace

bool is_validation_pair(const sampler::TrainingPair& pair) {
  return fnv1a(pair.trigger) % 10 == 0;
}

StyleOf style_groups(const std::vector<sampler::TrainingPair>& pairs,
                     const std::map<std::string, ProductFeatures>& features) {
  bool all_labeled = true;
  for (const auto& p : pairs) {
    auto ti = features.find(p.trigger);
    if (ti == features.end() || !ti->second.style_id) {
      all_labeled = false;
      break;
    }
  }
  if (all_labeled) {
    std::map<std::string, std::string> styles;
    for (const auto& p : pairs)
      styles[p.trigger] = *features.at(p.trigger).style_id;
    return [styles](const sampler::TrainingPair& p) {
      return styles.at(p.trigger);
    };
  }
  auto uf = std::make_shared<UnionFind>();
  for (const auto& p : pairs) uf->unite(p.trigger, p.recall);
  return [uf](const sampler::TrainingPair& p) { return uf->find(p.trigger); };
}

BatchPlan make_batches(const std::vector<sampler::TrainingPair>& pairs,
                       const StyleOf& style_of, std::size_t batch_size,
                       std::uint64_t seed) {
  std::map<std::string, std::vector<sampler::TrainingPair>> by_subcat;
  for (const auto& p : pairs) by_subcat[p.sub_category_id].push_back(p);

  std::mt19937_64 rng(seed);
  BatchPlan plan;
  for (auto& [subcat, group] : by_subcat) {
    // Fisher-Yates with explicit draws, stable across standard libraries
    for (std::size_t i = group.size(); i > 1; --i)
      std::swap(group[i - 1], group[rng() % i]);

    std::vector<std::vector<sampler::TrainingPair>> open;
    std::vector<std::set<std::string>> used_styles;
    for (const auto& p : group) {
      std::string style = style_of(p);
      bool placed = false;
      for (std::size_t b = 0; b < open.size(); ++b) {
        if (open[b].size() < batch_size && !used_styles[b].contains(style)) {
          open[b].push_back(p);
          used_styles[b].insert(style);
          placed = true;
          break;
        }
      }
      if (!placed) {
        open.push_back({p});
        used_styles.push_back({style});
      }
    }
    for (auto& batch : open) {
      if (batch.size() >= 2)
        plan.batches.push_back(std::move(batch));
      else
        plan.dropped_pairs += batch.size();
    }
  }
  return plan;
}

FitResult fit(const std::vector<sampler::TrainingPair>& pairs,
              const std::map<std::string, ProductFeatures>& features,
              const TrainConfig& config, const loss::LossConfig& loss_config) {
  loss_config.validate();
  BatchLossFn batch_loss = [&features, &loss_config](
                               Tape& tape, const encoder::EncoderOnTape& theta,
                               const std::vector<sampler::TrainingPair>& batch,
                               Value& root) {
    std::vector<encoder::EmbeddingTriple> triggers, recalls;
    for (const auto& p : batch) {
      triggers.push_back(encoder::embed_triple(tape, features.at(p.trigger), theta));
      recalls.push_back(encoder::embed_triple(tape, features.at(p.recall), theta));
    }
    loss::SimilarityMatrices sims =
        loss::similarity_matrices(tape, triggers, recalls);
    loss::LossValues values = loss::total_loss(
        tape, sims, loss::LabelMatrix::identity(batch.size()), loss_config);
    root = values.total;
    return values.breakdown(tape);
  };
  return run_fit(pairs, features, config, batch_loss, retrieval::RetrievalMode::MM);
}

FitResult fit_baseline(const std::vector<sampler::TrainingPair>& pairs,
                       const std::map<std::string, ProductFeatures>& features,
                       const TrainConfig& config, BaselineMode mode,
                       double margin) {
  encoder::MaskMode mask = mode == BaselineMode::VV
                               ? encoder::MaskMode::ImageOnly
                               : encoder::MaskMode::TextOnly;
  retrieval::RetrievalMode val_mode = mode == BaselineMode::VV
                                          ? retrieval::RetrievalMode::VV
                                          : retrieval::RetrievalMode::TT;
  BatchLossFn batch_loss = [&features, mask, margin](
                               Tape& tape, const encoder::EncoderOnTape& theta,
                               const std::vector<sampler::TrainingPair>& batch,
                               Value& root) {
    std::vector<Value> triggers, recalls;
    for (const auto& p : batch) {
      triggers.push_back(encoder::encode(tape, features.at(p.trigger), theta, mask));
      recalls.push_back(encoder::encode(tape, features.at(p.recall), theta, mask));
    }
    root = loss::baseline_hinge_loss(tape, triggers, recalls, margin);
    double v = tape.value(root).data[0];
    return loss::LossBreakdown{0.0, 0.0, 0.0, v};
  };
  return run_fit(pairs, features, config, batch_loss, val_mode);
}

}  // namespace ssr::trainer
