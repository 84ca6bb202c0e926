#include "ssr/synth.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

namespace ssr::synth {

using autodiff::Array;

double Rng::uniform01() {
  return static_cast<double>(state_() >> 11) * 0x1.0p-53;
}

double Rng::normal(double mean, double sigma) {
  if (have_spare_) {
    have_spare_ = false;
    return mean + sigma * spare_;
  }
  double u1 = uniform01();
  double u2 = uniform01();
  while (u1 <= 1e-300) u1 = uniform01();
  double r = std::sqrt(-2.0 * std::log(u1));
  double a = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(a);
  have_spare_ = true;
  return mean + sigma * r * std::cos(a);
}

std::uint64_t Rng::uniform_int(std::uint64_t bound) {
  // modulo draw; bias is negligible for desk-scale bounds
  return bound == 0 ? 0 : state_() % bound;
}

void BehaviorModel::validate() const {
  for (double p : level_probs)
    if (p < 0.0 || p > 1.0)
      throw std::invalid_argument("level probabilities must be in [0,1]");
  if (contamination < 0.0 || contamination >= 1.0)
    throw std::invalid_argument("contamination must be in [0,1)");
  if (clicks_per_query == 0)
    throw std::invalid_argument("clicks_per_query must be positive");
  if (ambiguous_fraction < 0.0 || ambiguous_fraction > 1.0)
    throw std::invalid_argument("ambiguous_fraction must be in [0,1]");
}

namespace {

std::string format_id(const char* prefix, std::size_t n, int width) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%0*zu", prefix, width, n);
  return buf;
}

Array noisy_copy(const Array& proto, double sigma, Rng& rng,
                 std::size_t skip_rows) {
  Array out = proto;
  std::size_t cols = out.cols();
  for (std::size_t i = skip_rows; i < out.rows(); ++i)
    for (std::size_t j = 0; j < cols; ++j)
      out.at(i, j) += rng.normal(0.0, sigma);
  return out;
}

}  // namespace

SynthCatalog gen_catalog(const SynthConfig& cfg, std::uint64_t seed) {
  if (cfg.num_styles == 0 || cfg.suppliers_per_style == 0 ||
      cfg.styles_per_subcat == 0 || cfg.d_in == 0 || cfg.n_img == 0 ||
      cfg.n_txt < 2)
    throw std::invalid_argument("gen_catalog: arguments must be positive");
  Rng rng(seed);
  SynthCatalog cat;

  // Keyword word vectors first: one unit vector per style keyword.
  std::vector<std::vector<double>> kw_vecs(cfg.num_styles);
  for (std::size_t s = 0; s < cfg.num_styles; ++s) {
    std::vector<double> v(cfg.d_in);
    double norm = 0.0;
    for (double& x : v) {
      x = rng.normal();
      norm += x * x;
    }
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm > 0 ? norm : 1.0;
    kw_vecs[s] = v;
  }

  std::size_t num_subcats = (cfg.num_styles + cfg.styles_per_subcat - 1) /
                            cfg.styles_per_subcat;
  std::vector<Array> subcat_img(num_subcats), subcat_txt(num_subcats);
  for (std::size_t c = 0; c < num_subcats; ++c) {
    subcat_img[c] = Array::zeros({cfg.n_img, cfg.d_in});
    for (double& x : subcat_img[c].data) x = rng.normal(0.0, cfg.subcat_signal);
    subcat_txt[c] = Array::zeros({cfg.n_txt, cfg.d_in});
    for (double& x : subcat_txt[c].data) x = rng.normal(0.0, cfg.subcat_signal);
    for (std::size_t j = 0; j < cfg.d_in; ++j) subcat_txt[c].at(0, j) = 0.0;
  }

  for (std::size_t s = 0; s < cfg.num_styles; ++s) {
    std::size_t c = s / cfg.styles_per_subcat;
    StyleSpec spec;
    spec.style_id = format_id("st", s, 4);
    spec.sub_category_id = format_id("sc", c, 3);
    spec.core_keyword = format_id("kw", s, 4);
    spec.image_prototype = subcat_img[c];
    for (double& x : spec.image_prototype.data)
      x += rng.normal(0.0, cfg.style_signal);
    spec.text_prototype = subcat_txt[c];
    for (std::size_t i = 1; i < cfg.n_txt; ++i)
      for (std::size_t j = 0; j < cfg.d_in; ++j)
        spec.text_prototype.at(i, j) += rng.normal(0.0, cfg.style_signal);
    // text position 1 carries the style's keyword vector
    for (std::size_t j = 0; j < cfg.d_in; ++j)
      spec.text_prototype.at(1, j) = kw_vecs[s][j];
    cat.core_vocab.insert(spec.core_keyword);
    cat.word_vectors[spec.core_keyword] = kw_vecs[s];
    cat.styles.push_back(std::move(spec));
  }

  std::size_t item_counter = 0;
  for (std::size_t s = 0; s < cfg.num_styles; ++s) {
    const StyleSpec& spec = cat.styles[s];
    for (std::size_t sup = 0; sup < cfg.suppliers_per_style; ++sup) {
      std::string item_id = format_id("i", item_counter++, 5);
      ProductFeatures f;
      f.item_id = item_id;
      f.image_tokens = noisy_copy(spec.image_prototype, cfg.image_noise_sigma, rng, 0);
      f.text_tokens = noisy_copy(spec.text_prototype, cfg.text_noise_sigma, rng, 1);
      f.sub_category_id = spec.sub_category_id;
      f.style_id = spec.style_id;

      clickgraph::ItemNode node;
      node.item_id = item_id;
      node.image_ref = "img://" + item_id;
      node.title = spec.core_keyword + " product " + item_id;
      node.keywords = {spec.core_keyword};
      node.brand = format_id("brand", sup, 3);
      node.sub_category_id = spec.sub_category_id;

      if (cfg.num_styles > 1 && rng.bernoulli(cfg.keyword_injection_fraction)) {
        // misleading title: swap in another style's keyword word and token
        std::size_t other = rng.uniform_int(cfg.num_styles - 1);
        if (other >= s) ++other;
        node.keywords.push_back(cat.styles[other].core_keyword);
        std::size_t pos = 2 + rng.uniform_int(cfg.n_txt - 2);
        for (std::size_t j = 0; j < cfg.d_in; ++j)
          f.text_tokens.at(pos, j) = kw_vecs[other][j];
      }

      cat.features.push_back(std::move(f));
      cat.items.push_back(std::move(node));
    }
  }
  return cat;
}

SynthClickLog gen_clicklog(const SynthCatalog& catalog,
                           const BehaviorModel& behavior,
                           std::size_t num_queries, std::uint64_t seed) {
  if (catalog.items.empty())
    throw std::invalid_argument("gen_clicklog: empty catalog");
  behavior.validate();
  Rng rng(seed);
  SynthClickLog log;

  // item indexes by style and by sub-category
  std::map<std::string, std::vector<std::size_t>> by_style, by_subcat;
  for (std::size_t i = 0; i < catalog.features.size(); ++i) {
    by_style[*catalog.features[i].style_id].push_back(i);
    by_subcat[catalog.features[i].sub_category_id].push_back(i);
  }

  static const char* fillers[] = {"buy", "cheap", "bulk", "new"};
  for (std::size_t q = 0; q < num_queries; ++q) {
    clickgraph::QueryNode query;
    query.query_id = format_id("q", q, 5);
    bool ambiguous = rng.bernoulli(behavior.ambiguous_fraction);
    std::size_t style_idx = rng.uniform_int(catalog.styles.size());
    const StyleSpec& style = catalog.styles[style_idx];
    std::vector<std::size_t> target_items;
    if (ambiguous) {
      // broad intent: vague text, clicks scattered across the sub-category
      query.text = rng.bernoulli(0.5) ? std::string("best deal")
                                      : style.core_keyword;
      target_items = by_subcat.at(style.sub_category_id);
    } else {
      query.text = std::string(fillers[rng.uniform_int(4)]) + " " +
                   style.core_keyword;
      target_items = by_style.at(style.style_id);
    }
    log.queries.push_back(query);

    for (std::size_t e = 0; e < behavior.clicks_per_query; ++e) {
      std::size_t idx;
      if (!ambiguous && rng.bernoulli(behavior.contamination)) {
        idx = rng.uniform_int(catalog.features.size());
      } else {
        idx = target_items[rng.uniform_int(target_items.size())];
      }
      const std::string& item_id = catalog.features[idx].item_id;
      for (std::size_t l = 0; l < 5; ++l) {
        if (rng.bernoulli(behavior.level_probs[l])) {
          log.records.push_back({query.query_id, item_id,
                                 static_cast<clickgraph::ClickLevel>(l), 1});
        }
      }
    }
  }
  return log;
}

SamplingQuality sampling_quality(
    const std::vector<sampler::TrainingPair>& pairs,
    const std::map<std::string, std::string>& style_of_item) {
  SamplingQuality q;
  q.yield = pairs.size();
  if (pairs.empty()) return q;  // precision 1.0 with yield 0 by convention
  std::size_t correct = 0;
  for (const auto& p : pairs)
    if (style_of_item.at(p.trigger) == style_of_item.at(p.recall)) ++correct;
  q.precision = static_cast<double>(correct) / static_cast<double>(pairs.size());
  return q;
}

}  // namespace ssr::synth
