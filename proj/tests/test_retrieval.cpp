#include <cmath>
#include <map>
#include <vector>

#include "doctest.h"
#include "ssr/retrieval.hpp"
#include "test_util.hpp"

using namespace ssr;
using namespace ssr::retrieval;
using autodiff::Array;

namespace {

ProductFeatures product(const std::string& id, std::mt19937_64& g,
                        const std::string& subcat = "sc0") {
  ProductFeatures f;
  f.item_id = id;
  f.image_tokens = testutil::random_array(g, {2, 3});
  f.text_tokens = testutil::random_array(g, {3, 3});
  f.sub_category_id = subcat;
  return f;
}

}  // namespace

TEST_CASE("mode names round-trip") {
  for (const char* name : {"tt", "vv", "mm", "vm", "tm"}) {
    CHECK(mode_name(mode_from_string(name)) == name);
  }
  CHECK_THROWS_AS(mode_from_string("xx"), std::invalid_argument);
  CHECK(trigger_modality(RetrievalMode::VM) == 'v');
  CHECK(recall_modality(RetrievalMode::VM) == 'm');
  CHECK(trigger_modality(RetrievalMode::TT) == 't');
  CHECK(recall_modality(RetrievalMode::MM) == 'm');
}

TEST_CASE("build_index covers every item with its embed_triple vector") {
  auto g = testutil::rng(7);
  auto theta = encoder::EncoderParams::init(3, 4, 3, 2);
  std::vector<ProductFeatures> items{product("i1", g), product("i2", g)};

  auto index = build_index(items, theta, 'm');
  REQUIRE(index.size() == 2);
  CHECK(index.dim() == 3);
  for (std::size_t i = 0; i < items.size(); ++i) {
    auto triple = encoder::embed_triple_plain(items[i], theta);
    for (std::size_t j = 0; j < 3; ++j)
      CHECK(index.vector(i)[j] == triple.m[j]);
  }

  auto single = build_index({items[0]}, theta, 'v');
  CHECK(single.size() == 1);
  CHECK_THROWS_AS(build_index({}, theta, 'm'), EmptyCatalog);
}

TEST_CASE("duplicated items index to identical vectors") {
  auto g = testutil::rng(9);
  auto theta = encoder::EncoderParams::init(3, 4, 3, 2);
  auto a = product("i1", g);
  auto b = a;
  b.item_id = "i2";
  auto index = build_index({a, b}, theta, 'm');
  for (std::size_t j = 0; j < index.dim(); ++j)
    CHECK(index.vector(0)[j] == index.vector(1)[j]);
}

TEST_CASE("search ranks an exact unit match first with score 1") {
  EmbeddingIndex index({"i1", "i2"}, {1.0, 0.0, 0.0, 1.0}, 2);
  auto hits = search(index, {0.0, 1.0}, 2);
  REQUIRE(hits.size() == 2);
  CHECK(hits[0].item_id == "i2");
  CHECK(hits[0].score == 1.0);
  CHECK(hits[1].item_id == "i1");
}

TEST_CASE("orthogonal queries tie at 0 and fall back to item-id order") {
  EmbeddingIndex index({"b", "a", "c"}, {1, 0, 1, 0, 1, 0}, 2);
  auto hits = search(index, {0.0, 1.0}, 3);
  REQUIRE(hits.size() == 3);
  CHECK(hits[0].item_id == "a");
  CHECK(hits[1].item_id == "b");
  CHECK(hits[2].item_id == "c");
  for (const auto& h : hits) CHECK(h.score == 0.0);
}

TEST_CASE("k larger than the catalog returns the full catalog") {
  EmbeddingIndex index({"i1", "i2"}, {1.0, 0.0, 0.0, 1.0}, 2);
  CHECK(search(index, {1.0, 1.0}, 100).size() == 2);
}

TEST_CASE("mrr hand values") {
  CHECK(mrr({1, 1, 1}) == 1.0);
  CHECK(mrr({1, 2, 4}) == doctest::Approx(0.58333333).epsilon(1e-8));
  CHECK(mrr({10}) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK_THROWS_AS(mrr({}), EmptyList);
}

TEST_CASE("recall_at_k hand values and monotonicity") {
  CHECK(recall_at_k({1, 7, 3, 20}, 5) == 0.5);
  CHECK(recall_at_k({1, 7, 3, 20}, 20) == 1.0);
  CHECK(recall_at_k({2}, 1) == 0.0);

  auto g = testutil::rng(13);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<std::size_t> ranks(1 + g() % 20);
    for (auto& r : ranks) r = 1 + g() % 30;
    double prev = 0.0;
    for (std::size_t k = 1; k <= 30; ++k) {
      double cur = recall_at_k(ranks, k);
      CHECK(cur >= prev);
      prev = cur;
    }
    CHECK(prev == 1.0);
  }
}

TEST_CASE("rank_of gives a tied target the worst tie-group position") {
  // three identical vectors: any target is counted behind its equals
  EmbeddingIndex index({"a", "b", "c"}, {1, 0, 1, 0, 1, 0}, 2);
  CHECK(rank_of(index, {1.0, 0.0}, "a") == 3);
  CHECK(rank_of(index, {1.0, 0.0}, "c") == 3);

  EmbeddingIndex distinct({"a", "b"}, {1, 0, 0, 1}, 2);
  CHECK(rank_of(distinct, {1.0, 0.0}, "a") == 1);
  CHECK(rank_of(distinct, {1.0, 0.0}, "b") == 2);
}

TEST_CASE("evaluate forces MRR 1 on a pool of size one") {
  auto g = testutil::rng(19);
  auto theta = encoder::EncoderParams::init(3, 4, 3, 2);
  std::map<std::string, ProductFeatures> features;
  features["i1"] = product("i1", g);
  features["i2"] = product("i2", g);
  std::vector<sampler::TrainingPair> pairs{{"i1", "i2", "q1", "sc0"}};
  auto report = evaluate(pairs, features, theta, RetrievalMode::MM);
  CHECK(report.num_queries == 1);
  CHECK(report.mrr == 1.0);
  CHECK(report.recall_at.at(1) == 1.0);
}

TEST_CASE("evaluate report invariants hold on random data") {
  auto g = testutil::rng(23);
  auto theta = encoder::EncoderParams::init(3, 4, 3, 29);
  std::map<std::string, ProductFeatures> features;
  std::vector<sampler::TrainingPair> pairs;
  for (int i = 0; i < 8; ++i) {
    std::string id = "i" + std::to_string(i);
    features[id] = product(id, g);
  }
  for (int i = 0; i < 4; ++i)
    pairs.push_back({"i" + std::to_string(i), "i" + std::to_string(i + 4),
                     "q" + std::to_string(i), "sc0"});

  for (auto mode : {RetrievalMode::MM, RetrievalMode::VV, RetrievalMode::TT,
                    RetrievalMode::VM, RetrievalMode::TM}) {
    auto report = evaluate(pairs, features, theta, mode);
    CHECK(report.num_queries == 4);
    CHECK(report.mrr >= report.recall_at.at(1));
    CHECK(report.mrr <= 1.0);
    double prev = 0.0;
    for (std::size_t k : {1, 5, 10, 20}) {
      CHECK(report.recall_at.at(k) >= prev);
      prev = report.recall_at.at(k);
    }
  }
  CHECK_THROWS_AS(evaluate({}, features, theta, RetrievalMode::MM), EmptyTestSet);
}

TEST_CASE("distractors can only push ranks down") {
  auto g = testutil::rng(31);
  auto theta = encoder::EncoderParams::init(3, 4, 3, 29);
  std::map<std::string, ProductFeatures> features;
  for (int i = 0; i < 6; ++i) {
    std::string id = "i" + std::to_string(i);
    features[id] = product(id, g);
  }
  std::vector<sampler::TrainingPair> pairs{{"i0", "i1", "q0", "sc0"},
                                           {"i2", "i3", "q1", "sc0"}};
  auto base = evaluate(pairs, features, theta, RetrievalMode::MM);
  auto with = evaluate(pairs, features, theta, RetrievalMode::MM, {"i4", "i5"});
  CHECK(with.mrr <= base.mrr);
}
