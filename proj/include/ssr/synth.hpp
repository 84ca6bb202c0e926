#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "ssr/clickgraph.hpp"
#include "ssr/encoder.hpp"
#include "ssr/features.hpp"
#include "ssr/sampler.hpp"

// Synthetic catalogs with latent style ground truth plus click logs from a
// configurable behavior model. Exists to make correctness testable, not to
// be realistic. All randomness flows from one explicit seed through
// mt19937_64 with in-house uniform/normal transforms (see Rng), so runs are
// reproducible bit-for-bit.
namespace ssr::synth {

// mt19937_64 with portable output transforms: uniform doubles take the top
// 53 bits, normals come from Box-Muller.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  double uniform01();
  double normal(double mean = 0.0, double sigma = 1.0);
  std::uint64_t uniform_int(std::uint64_t bound);  // [0, bound)
  bool bernoulli(double p) { return uniform01() < p; }

 private:
  std::mt19937_64 state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

struct StyleSpec {
  std::string style_id;
  std::string sub_category_id;
  autodiff::Array image_prototype;  // n_img x d_in
  autodiff::Array text_prototype;   // n_txt x d_in (row 0 = [CLS] placeholder)
  std::string core_keyword;
};

struct BehaviorModel {
  std::array<double, 5> level_probs{0.6, 0.3, 0.2, 0.15, 0.1};
  double contamination = 0.0;        // off-style click rate in [0,1)
  std::size_t clicks_per_query = 6;
  double ambiguous_fraction = 0.0;   // queries with broad intent / vague text

  void validate() const;
};

struct SynthConfig {
  std::size_t num_styles = 10;
  std::size_t suppliers_per_style = 3;
  std::size_t styles_per_subcat = 5;
  std::size_t n_img = 4;
  std::size_t n_txt = 7;  // 6 words + [CLS]
  std::size_t d_in = 8;
  double image_noise_sigma = 0.05;
  double text_noise_sigma = 0.05;
  // Cross-style cosine within a sub-category is roughly
  // subcat_signal^2 / (subcat_signal^2 + style_signal^2).
  double subcat_signal = 1.0;
  double style_signal = 1.0;
  // Fraction of products whose text gets another style's keyword token and
  // word, modeling misleading titles.
  double keyword_injection_fraction = 0.0;
};

struct SynthCatalog {
  std::vector<ProductFeatures> features;
  std::vector<clickgraph::ItemNode> items;
  std::vector<StyleSpec> styles;
  std::set<std::string> core_vocab;
  encoder::VocabTable word_vectors;
};

struct SynthClickLog {
  std::vector<clickgraph::ClickRecord> records;
  std::vector<clickgraph::QueryNode> queries;
};

SynthCatalog gen_catalog(const SynthConfig& config, std::uint64_t seed);

SynthClickLog gen_clicklog(const SynthCatalog& catalog,
                           const BehaviorModel& behavior,
                           std::size_t num_queries, std::uint64_t seed);

struct SamplingQuality {
  double precision = 1.0;  // 1.0 by convention when yield is 0
  std::size_t yield = 0;
};

SamplingQuality sampling_quality(
    const std::vector<sampler::TrainingPair>& pairs,
    const std::map<std::string, std::string>& style_of_item);

}  // namespace ssr::synth
