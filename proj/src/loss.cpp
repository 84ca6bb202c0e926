#include "ssr/loss.hpp"

#include <algorithm>
#include <numeric>

namespace ssr::loss {

using autodiff::Array;
using autodiff::ShapeMismatch;
using autodiff::Tape;
using autodiff::Value;

void LossConfig::validate() const {
  if (alpha1 < 0.0 || alpha2 < 0.0 || alpha3 < 0.0)
    throw std::invalid_argument("margins must be >= 0");
  if (plc_top_k == 0) throw std::invalid_argument("plc_top_k must be >= 1");
  if (!use_ppm && !use_pdc && !use_plc)
    throw std::invalid_argument("at least one loss component must be enabled");
}

LabelMatrix LabelMatrix::identity(std::size_t n) {
  Array y = Array::zeros({n, n});
  for (std::size_t i = 0; i < n; ++i) y.at(i, i) = 1.0;
  return LabelMatrix{std::move(y)};
}

LossBreakdown LossValues::breakdown(const Tape& tape) const {
  return LossBreakdown{tape.value(ppm).data[0], tape.value(pdc).data[0],
                       tape.value(plc).data[0], tape.value(total).data[0]};
}

SimilarityMatrices similarity_matrices(
    Tape& tape, std::span<const encoder::EmbeddingTriple> triggers,
    std::span<const encoder::EmbeddingTriple> recalls) {
  if (triggers.empty() || triggers.size() != recalls.size())
    throw ShapeMismatch("similarity_matrices: need equal non-empty trigger/recall lists");
  std::size_t n = triggers.size();
  std::vector<Value> tm_rows, tv_rows, tt_rows, rm_rows;
  tm_rows.reserve(n);
  for (const auto& t : triggers) {
    tm_rows.push_back(t.m);
    tv_rows.push_back(t.v);
    tt_rows.push_back(t.t);
  }
  for (const auto& r : recalls) rm_rows.push_back(r.m);
  Value T_m = tape.stack_rows(tm_rows);
  Value T_v = tape.stack_rows(tv_rows);
  Value T_t = tape.stack_rows(tt_rows);
  Value R_m = tape.stack_rows(rm_rows);
  return SimilarityMatrices{tape.matmul_nt(T_m, R_m), tape.matmul_nt(T_v, R_m),
                            tape.matmul_nt(T_t, R_m), n};
}

namespace {

// hinge(margin_const + S[i][j] - diag(D)[i]) averaged over all entries
Value hinged_gap_mean(Tape& tape, Value s, Value diag_src, const Array& margins) {
  Value gap = tape.add_constant(tape.sub_colvec(s, tape.diagonal(diag_src)), margins);
  return tape.mean_all(tape.hinge(gap));
}

Array off_diagonal_mask(std::size_t n) {
  Array m = Array::zeros({n, n});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m.at(i, j) = i == j ? 0.0 : 1.0;
  return m;
}

}  // namespace

Value ppm_loss(Tape& tape, const SimilarityMatrices& s, const LabelMatrix& y,
               double alpha1) {
  std::size_t n = s.n;
  if (y.y.rows() != n || y.y.cols() != n)
    throw ShapeMismatch("ppm_loss: label matrix size mismatch");
  Array margins = Array::zeros({n, n});
  for (std::size_t i = 0; i < n * n; ++i)
    margins.data[i] = alpha1 * (1.0 - y.y.data[i]);
  Value sum = tape.add(tape.add(hinged_gap_mean(tape, s.mm, s.mm, margins),
                                hinged_gap_mean(tape, s.vm, s.vm, margins)),
                       hinged_gap_mean(tape, s.tm, s.tm, margins));
  return tape.scalar_mul(sum, 1.0 / 3.0);
}

Value pdc_loss(Tape& tape, const SimilarityMatrices& s, double alpha2,
               const LossConfig& config) {
  std::size_t n = s.n;
  if (n == 1 && !config.include_diagonal_pdc)
    throw DegenerateBatch("pdc_loss: N=1 with diagonal excluded");
  Value gap_v = tape.hinge(
      tape.add_scalar(tape.sub_colvec(s.mm, tape.diagonal(s.vm)), alpha2));
  Value gap_t = tape.hinge(
      tape.add_scalar(tape.sub_colvec(s.mm, tape.diagonal(s.tm)), alpha2));
  Value sum;
  if (config.include_diagonal_pdc) {
    sum = tape.add(tape.mean_all(gap_v), tape.mean_all(gap_t));
  } else {
    Array mask = off_diagonal_mask(n);
    double norm = 1.0 / static_cast<double>(n * (n - 1));
    sum = tape.add(tape.scalar_mul(tape.sum_all(tape.mul_constant(gap_v, mask)), norm),
                   tape.scalar_mul(tape.sum_all(tape.mul_constant(gap_t, mask)), norm));
  }
  return tape.scalar_mul(sum, 0.5);
}

Value plc_loss(Tape& tape, const SimilarityMatrices& s, double alpha3,
               std::size_t plc_top_k, bool include_diagonal) {
  std::size_t n = s.n;
  // Top-K column selection per row by S_tm forward value (ties by ascending
  // column index); the selection mask is constant for the gradient.
  const Array& tm_vals = tape.value(s.tm);
  std::size_t candidates = include_diagonal ? n : (n > 1 ? n - 1 : 1);
  std::size_t k = std::min(plc_top_k, candidates);
  Array mask = Array::zeros({n, n});
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::size_t> cols;
    for (std::size_t j = 0; j < n; ++j)
      if (include_diagonal || j != i) cols.push_back(j);
    std::stable_sort(cols.begin(), cols.end(), [&](std::size_t a, std::size_t b) {
      return tm_vals.at(i, a) > tm_vals.at(i, b);
    });
    for (std::size_t t = 0; t < k; ++t) mask.at(i, cols[t]) = 1.0;
  }

  auto term = [&](Value a, Value b) {
    Value sq = tape.square(tape.sub(a, b));
    Value hinged = tape.hinge(tape.add_scalar(sq, -alpha3));
    return tape.sum_all(tape.mul_constant(hinged, mask));
  };
  Value sum = tape.add(tape.add(term(s.vm, s.mm), term(s.tm, s.mm)),
                       term(s.vm, s.tm));
  // normalized by evaluated terms N*K rather than N^2
  return tape.scalar_mul(sum, 1.0 / (3.0 * static_cast<double>(n * k)));
}

LossValues total_loss(Tape& tape, const SimilarityMatrices& s,
                      const LabelMatrix& y, const LossConfig& config) {
  config.validate();
  Value ppm = ppm_loss(tape, s, y, config.alpha1);
  Value pdc = pdc_loss(tape, s, config.alpha2, config);
  Value plc = plc_loss(tape, s, config.alpha3, config.plc_top_k,
                       config.include_diagonal_plc);
  Value total = tape.input(Array::scalar(0.0));
  std::size_t enabled = 0;
  if (config.use_ppm) { total = tape.add(total, ppm); ++enabled; }
  if (config.use_pdc) { total = tape.add(total, pdc); ++enabled; }
  if (config.use_plc) { total = tape.add(total, plc); ++enabled; }
  total = tape.scalar_mul(total, 1.0 / static_cast<double>(enabled));
  return LossValues{ppm, pdc, plc, total};
}

Value baseline_hinge_loss(Tape& tape, std::span<const Value> trigger_embs,
                          std::span<const Value> recall_embs, double margin) {
  if (trigger_embs.empty() || trigger_embs.size() != recall_embs.size())
    throw ShapeMismatch("baseline_hinge_loss: need equal non-empty lists");
  std::size_t n = trigger_embs.size();
  Value E = tape.stack_rows(std::vector<Value>(trigger_embs.begin(), trigger_embs.end()));
  Value F = tape.stack_rows(std::vector<Value>(recall_embs.begin(), recall_embs.end()));
  Value s = tape.matmul_nt(E, F);
  Array margins = Array::zeros({n, n});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      margins.at(i, j) = i == j ? 0.0 : margin;
  return hinged_gap_mean(tape, s, s, margins);
}

LossBreakdown eval_losses(const PlainSims& s, const LossConfig& config) {
  std::size_t n = s.n;
  if (s.mm.size() != n * n || s.vm.size() != n * n || s.tm.size() != n * n)
    throw ShapeMismatch("eval_losses: matrix size mismatch");
  Tape tape;
  SimilarityMatrices sims{
      tape.input(Array::matrix(n, n, s.mm)),
      tape.input(Array::matrix(n, n, s.vm)),
      tape.input(Array::matrix(n, n, s.tm)),
      n,
  };
  LossValues v = total_loss(tape, sims, LabelMatrix::identity(n), config);
  return v.breakdown(tape);
}

}  // namespace ssr::loss
