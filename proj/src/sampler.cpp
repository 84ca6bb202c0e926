#include "ssr/sampler.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace ssr {

namespace text {

std::vector<std::string> tokenize(const std::string& s) {
  std::vector<std::string> words;
  std::string cur;
  for (char ch : s) {
    unsigned char c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (std::isspace(c)) {
      if (!cur.empty()) {
        words.push_back(cur);
        cur.clear();
      }
    }
    // punctuation is stripped
  }
  if (!cur.empty()) words.push_back(cur);
  return words;
}

}  // namespace text

namespace sampler {

namespace {

std::vector<double> normalized_token_mean(const autodiff::Array& tokens,
                                          std::size_t skip_rows) {
  std::size_t n = tokens.rows(), d = tokens.cols();
  std::vector<double> mean(d, 0.0);
  if (n <= skip_rows) return mean;
  for (std::size_t i = skip_rows; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) mean[j] += tokens.at(i, j);
  double inv = 1.0 / static_cast<double>(n - skip_rows);
  double norm = 0.0;
  for (double& x : mean) {
    x *= inv;
    norm += x * x;
  }
  norm = std::sqrt(norm);
  if (norm < autodiff::Tape::kNormEps) {
    std::fill(mean.begin(), mean.end(), 0.0);
    return mean;
  }
  for (double& x : mean) x /= norm;
  return mean;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

}  // namespace

void SamplerConfig::validate() const {
  if (sim_threshold < 0.0 || sim_threshold > 1.0)
    throw std::invalid_argument("sim_threshold must be in [0,1]");
  if (core_vocab.empty())
    throw std::invalid_argument("core_vocab must be non-empty");
  if (k_per_query == 0 || min_query_words == 0)
    throw std::invalid_argument("k_per_query and min_query_words must be positive");
}

std::vector<double> RawFeatureEmbedder::image_embed(
    const clickgraph::ItemNode& item) const {
  return normalized_token_mean(features_->at(item.item_id).image_tokens, 0);
}

std::vector<double> RawFeatureEmbedder::text_embed(
    const clickgraph::ItemNode& item) const {
  // row 0 is the [CLS] placeholder, not data
  return normalized_token_mean(features_->at(item.item_id).text_tokens, 1);
}

std::set<std::string> core_keywords(const std::string& s,
                                    const std::set<std::string>& vocab) {
  std::set<std::string> out;
  for (const auto& w : text::tokenize(s))
    if (vocab.contains(w)) out.insert(w);
  return out;
}

std::set<std::string> item_core_keywords(const clickgraph::ItemNode& item,
                                         const std::set<std::string>& vocab) {
  std::set<std::string> out = core_keywords(item.title, vocab);
  for (const auto& kw : item.keywords)
    for (const auto& w : text::tokenize(kw))
      if (vocab.contains(w)) out.insert(w);
  return out;
}

bool query_admissible(const clickgraph::QueryNode& query,
                      const SamplerConfig& config) {
  auto words = text::tokenize(query.text);
  if (words.size() < config.min_query_words) return false;
  return !core_keywords(query.text, config.core_vocab).empty();
}

bool pair_admissible(const clickgraph::ItemNode& a, const clickgraph::ItemNode& b,
                     const ReferenceEmbedder& ref, const SamplerConfig& config) {
  if (config.enforce_same_subcategory &&
      a.sub_category_id != b.sub_category_id)
    return false;
  if (config.enforce_similarity) {
    if (dot(ref.image_embed(a), ref.image_embed(b)) < config.sim_threshold)
      return false;
    if (dot(ref.text_embed(a), ref.text_embed(b)) < config.sim_threshold)
      return false;
  }
  if (config.enforce_keyword_overlap) {
    auto ka = item_core_keywords(a, config.core_vocab);
    auto kb = item_core_keywords(b, config.core_vocab);
    bool overlap = std::any_of(ka.begin(), ka.end(),
                               [&](const std::string& w) { return kb.contains(w); });
    if (!overlap) return false;
  }
  return true;
}

std::vector<TrainingPair> sample_pairs(const clickgraph::ClickGraph& graph,
                                       const ReferenceEmbedder& ref,
                                       const SamplerConfig& config) {
  config.validate();
  std::set<std::pair<std::string, std::string>> seen;
  std::vector<TrainingPair> out;
  for (const auto& [qid, query] : graph.queries()) {
    if (config.enforce_query_admissible && !query_admissible(query, config))
      continue;
    auto top = clickgraph::top_items(graph, qid, config.k_per_query);
    for (std::size_t i = 0; i < top.size(); ++i) {
      for (std::size_t j = i + 1; j < top.size(); ++j) {
        const auto& a = graph.item(top[i].item_id);
        const auto& b = graph.item(top[j].item_id);
        if (!pair_admissible(a, b, ref, config)) continue;
        // top is weight-descending with item_id tiebreak, so top[i] is the
        // trigger by the higher-weight-first / lower-id-on-tie rule
        TrainingPair p{top[i].item_id, top[j].item_id, qid, a.sub_category_id};
        if (seen.insert({p.trigger, p.recall}).second) out.push_back(p);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace sampler
}  // namespace ssr
