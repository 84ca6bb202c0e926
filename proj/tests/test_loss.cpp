#include <algorithm>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "ssr/loss.hpp"
#include "test_util.hpp"

using namespace ssr;
using namespace ssr::loss;
using autodiff::Array;
using autodiff::Tape;
using autodiff::Value;

namespace {

PlainSims uniform_sims(std::size_t n, double v) {
  PlainSims s;
  s.n = n;
  s.mm.assign(n * n, v);
  s.vm.assign(n * n, v);
  s.tm.assign(n * n, v);
  return s;
}

PlainSims random_sims(std::mt19937_64& g, std::size_t n) {
  PlainSims s;
  s.n = n;
  s.mm = testutil::random_vec(g, n * n);
  s.vm = testutil::random_vec(g, n * n);
  s.tm = testutil::random_vec(g, n * n);
  return s;
}

oracles::NaiveMats to_naive(const PlainSims& s) {
  return {s.n, s.mm, s.vm, s.tm};
}

encoder::EmbeddingTriple triple_of(Tape& tape, std::vector<double> v) {
  Value x = tape.input(Array::vec(v));
  return {x, x, x};
}

}  // namespace

TEST_CASE("similarity matrices of an orthonormal basis form the identity") {
  Tape tape;
  std::vector<encoder::EmbeddingTriple> trig{
      triple_of(tape, {1, 0, 0}), triple_of(tape, {0, 1, 0}),
      triple_of(tape, {0, 0, 1})};
  auto s = similarity_matrices(tape, trig, trig);
  CHECK(s.n == 3);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      CHECK(tape.value(s.mm).at(i, j) == (i == j ? 1.0 : 0.0));
}

TEST_CASE("similarity matrices N=1 hand value") {
  Tape tape;
  std::vector<encoder::EmbeddingTriple> trig{triple_of(tape, {1, 0})};
  std::vector<encoder::EmbeddingTriple> rec{
      triple_of(tape, {std::numbers::sqrt2 / 2, std::numbers::sqrt2 / 2})};
  auto s = similarity_matrices(tape, trig, rec);
  CHECK(tape.value(s.mm).data[0] == doctest::Approx(0.70710678).epsilon(1e-8));
}

TEST_CASE("identical triples give identical similarity channels") {
  Tape tape;
  std::vector<encoder::EmbeddingTriple> trig{triple_of(tape, {0.6, 0.8}),
                                             triple_of(tape, {1.0, 0.0})};
  auto s = similarity_matrices(tape, trig, trig);
  CHECK(tape.value(s.mm).data == tape.value(s.vm).data);
  CHECK(tape.value(s.mm).data == tape.value(s.tm).data);
}

TEST_CASE("ppm hand values") {
  LossConfig cfg;
  CHECK(eval_losses(uniform_sims(1, 0.4), cfg).ppm == 0.0);  // N=1 self-cancel

  PlainSims s;
  s.n = 2;
  s.mm = s.vm = s.tm = {0.9, 0.8, 0.2, 0.95};
  CHECK(eval_losses(s, cfg).ppm == doctest::Approx(0.05).epsilon(1e-12));

  CHECK(eval_losses(uniform_sims(2, 1.0), cfg).ppm ==
        doctest::Approx(0.15).epsilon(1e-12));
}

TEST_CASE("pdc hand values under both diagonal conventions") {
  LossConfig cfg;
  PlainSims s;
  s.n = 2;
  s.vm = s.tm = {1.0, 0.0, 0.0, 1.0};
  s.mm = {1.0, 0.0, 0.0, 1.0};

  cfg.include_diagonal_pdc = true;
  CHECK(eval_losses(s, cfg).pdc == doctest::Approx(0.1).epsilon(1e-12));
  cfg.include_diagonal_pdc = false;
  CHECK(eval_losses(s, cfg).pdc == 0.0);

  cfg.include_diagonal_pdc = true;
  CHECK(eval_losses(uniform_sims(2, 1.0), cfg).pdc ==
        doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("pdc with diagonal excluded rejects N=1 batches") {
  LossConfig cfg;
  cfg.include_diagonal_pdc = false;
  CHECK_THROWS_AS(eval_losses(uniform_sims(1, 0.5), cfg), DegenerateBatch);
}

TEST_CASE("plc hand values") {
  LossConfig cfg;
  // identical channels: every squared difference is 0 <= alpha3
  auto g = testutil::rng(3);
  PlainSims same;
  same.n = 3;
  same.mm = testutil::random_vec(g, 9);
  same.vm = same.mm;
  same.tm = same.mm;
  CHECK(eval_losses(same, cfg).plc == 0.0);

  PlainSims s;
  s.n = 1;
  s.vm = {0.9};
  s.mm = {0.8};
  s.tm = {0.8};
  CHECK(eval_losses(s, cfg).plc == doctest::Approx(0.005).epsilon(1e-12));
}

TEST_CASE("plc evaluates exactly top-k terms chosen by sorted s_tm rows") {
  auto g = testutil::rng(8);
  auto s = random_sims(g, 12);
  LossConfig cfg;
  CHECK(eval_losses(s, cfg).plc ==
        doctest::Approx(oracles::naive_plc(to_naive(s), cfg.alpha3, 10))
            .epsilon(1e-12));
}

TEST_CASE("losses match the naive scalar oracles on random matrices") {
  auto g = testutil::rng(17);
  for (std::size_t n : {1, 2, 3, 5, 8}) {
    for (int rep = 0; rep < 10; ++rep) {
      auto s = random_sims(g, n);
      LossConfig cfg;
      auto got = eval_losses(s, cfg);
      auto naive = to_naive(s);
      CHECK(got.ppm == doctest::Approx(oracles::naive_ppm(naive, cfg.alpha1))
                           .epsilon(1e-12));
      CHECK(got.pdc == doctest::Approx(oracles::naive_pdc(naive, cfg.alpha2, true))
                           .epsilon(1e-12));
      CHECK(got.plc ==
            doctest::Approx(oracles::naive_plc(naive, cfg.alpha3, cfg.plc_top_k))
                .epsilon(1e-12));
      CHECK(got.total ==
            doctest::Approx((got.ppm + got.pdc + got.plc) / 3.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("total over the example component values is 0.11833333...") {
  LossConfig cfg;
  double ppm = eval_losses(uniform_sims(2, 1.0), cfg).ppm;   // 0.15
  double pdc = eval_losses(uniform_sims(2, 1.0), cfg).pdc;   // 0.2
  PlainSims plc_ex;
  plc_ex.n = 1;
  plc_ex.vm = {0.9};
  plc_ex.mm = {0.8};
  plc_ex.tm = {0.8};
  double plc = eval_losses(plc_ex, cfg).plc;                 // 0.005
  CHECK((ppm + pdc + plc) / 3.0 ==
        doctest::Approx(0.355 / 3.0).epsilon(1e-12));
  CHECK((ppm + pdc + plc) / 3.0 == doctest::Approx(0.11833333).epsilon(1e-7));
}

TEST_CASE("all components zero at a perfect-alignment fixed point") {
  // diagonal 1 everywhere, off-diagonal low: hinges inactive, channels equal
  PlainSims s;
  s.n = 2;
  s.mm = s.vm = s.tm = {1.0, 0.1, 0.1, 1.0};
  LossConfig cfg;
  cfg.include_diagonal_pdc = false;  // off-diagonal PDC convention
  auto b = eval_losses(s, cfg);
  CHECK(b.ppm == 0.0);
  CHECK(b.pdc == 0.0);
  CHECK(b.plc == 0.0);
  CHECK(b.total == 0.0);
}

TEST_CASE("total is the mean of the enabled components only") {
  auto g = testutil::rng(29);
  auto s = random_sims(g, 4);
  LossConfig all;
  auto base = eval_losses(s, all);

  LossConfig only_ppm = all;
  only_ppm.use_pdc = false;
  only_ppm.use_plc = false;
  CHECK(eval_losses(s, only_ppm).total ==
        doctest::Approx(base.ppm).epsilon(1e-12));

  LossConfig no_plc = all;
  no_plc.use_plc = false;
  CHECK(eval_losses(s, no_plc).total ==
        doctest::Approx((base.ppm + base.pdc) / 2.0).epsilon(1e-12));
}

TEST_CASE("losses are invariant to batch permutation") {
  auto g = testutil::rng(41);
  const std::size_t n = 6;
  auto s = random_sims(g, n);

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), g);

  PlainSims sp;
  sp.n = n;
  sp.mm.resize(n * n);
  sp.vm.resize(n * n);
  sp.tm.resize(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      sp.mm[i * n + j] = s.mm[perm[i] * n + perm[j]];
      sp.vm[i * n + j] = s.vm[perm[i] * n + perm[j]];
      sp.tm[i * n + j] = s.tm[perm[i] * n + perm[j]];
    }

  LossConfig cfg;
  cfg.plc_top_k = 3;  // selection must be permutation-stable too
  auto a = eval_losses(s, cfg);
  auto b = eval_losses(sp, cfg);
  CHECK(a.ppm == doctest::Approx(b.ppm).epsilon(1e-12));
  CHECK(a.pdc == doctest::Approx(b.pdc).epsilon(1e-12));
  CHECK(a.plc == doctest::Approx(b.plc).epsilon(1e-12));
  CHECK(a.total == doctest::Approx(b.total).epsilon(1e-12));
}

TEST_CASE("baseline hinge loss hand values") {
  Tape tape;
  // N=1: no off-diagonal terms
  std::vector<Value> one_t{tape.input(Array::vec({1.0, 0.0}))};
  std::vector<Value> one_r{tape.input(Array::vec({1.0, 0.0}))};
  CHECK(tape.value(baseline_hinge_loss(tape, one_t, one_r, 0.3)).data[0] == 0.0);

  // orthonormal matched pairs: 0.3 + 0 - 1 < 0 everywhere off-diagonal
  std::vector<Value> t2{tape.input(Array::vec({1.0, 0.0})),
                        tape.input(Array::vec({0.0, 1.0}))};
  CHECK(tape.value(baseline_hinge_loss(tape, t2, t2, 0.3)).data[0] == 0.0);

  // all-equal embeddings mirror the single-channel ppm case: 0.15
  std::vector<Value> same{tape.input(Array::vec({0.6, 0.8})),
                          tape.input(Array::vec({0.6, 0.8}))};
  CHECK(tape.value(baseline_hinge_loss(tape, same, same, 0.3)).data[0] ==
        doctest::Approx(0.15).epsilon(1e-12));
}

TEST_CASE("total loss gradients through the graph match finite differences") {
  // fixed seeds chosen away from hinge kinks and top-k selection boundaries,
  // where central differences would not approximate the subgradient
  for (std::uint64_t seed : {54ull, 55ull, 101ull}) {
  auto g = testutil::rng(seed);
  const std::size_t n = 3, d = 4;
  // parameters are the raw trigger/recall embedding entries
  std::vector<double> flat = testutil::random_vec(g, 2 * n * d);

  auto build = [&](Tape& tape, const std::vector<double>& p,
                   std::vector<Value>* leaves) {
    std::vector<encoder::EmbeddingTriple> trig, rec;
    for (std::size_t i = 0; i < 2 * n; ++i) {
      std::vector<double> v(p.begin() + i * d, p.begin() + (i + 1) * d);
      Value raw = tape.input(Array::vec(v));
      if (leaves) leaves->push_back(raw);
      Value e = tape.l2_normalize(raw);
      if (i < n)
        trig.push_back({e, e, e});
      else
        rec.push_back({e, e, e});
    }
    auto s = similarity_matrices(tape, trig, rec);
    LossConfig cfg;
    cfg.plc_top_k = 2;
    return total_loss(tape, s, LabelMatrix::identity(n), cfg).total;
  };

  auto f = [&](const std::vector<double>& p) {
    Tape tape;
    return tape.value(build(tape, p, nullptr)).data[0];
  };

  Tape tape;
  std::vector<Value> leaves;
  tape.backward(build(tape, flat, &leaves));
  std::vector<double> analytic;
  for (Value v : leaves) {
    const auto& gr = tape.grad(v).data;
    analytic.insert(analytic.end(), gr.begin(), gr.end());
  }
  CHECK(autodiff::finite_diff_check(f, flat, analytic, 1e-4) < 1e-5);
  }
}
