#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "ssr/encoder.hpp"
#include "ssr/tape.hpp"

// Contrastive loss unit over in-batch similarity matrices: hinge-margin
// matching (PPM), self-distinctiveness (PDC), locality consistency over the
// top-K columns (PLC), and their average as the total objective.
namespace ssr::loss {

struct DegenerateBatch : std::runtime_error {
  explicit DegenerateBatch(const std::string& what) : std::runtime_error(what) {}
};

struct LossConfig {
  double alpha1 = 0.3;
  double alpha2 = 0.2;
  double alpha3 = 0.0025;  // 0.05^2
  std::size_t plc_top_k = 10;
  bool include_diagonal_pdc = true;
  bool include_diagonal_plc = true;

  // Component switches for ablation runs. Total is the mean of the enabled
  // components, so all-enabled reproduces (ppm + pdc + plc) / 3.
  bool use_ppm = true;
  bool use_pdc = true;
  bool use_plc = true;

  void validate() const;
};

// N x N label matrix in {0,1}; identity under the distinct-styles batch rule.
struct LabelMatrix {
  autodiff::Array y;

  static LabelMatrix identity(std::size_t n);
};

struct SimilarityMatrices {
  autodiff::Value mm, vm, tm;  // each N x N
  std::size_t n = 0;
};

struct LossBreakdown {
  double ppm = 0.0, pdc = 0.0, plc = 0.0, total = 0.0;
};

struct LossValues {
  autodiff::Value ppm, pdc, plc, total;

  LossBreakdown breakdown(const autodiff::Tape& tape) const;
};

// S_mm[i][j] = t_m[i].r_m[j], S_vm[i][j] = t_v[i].r_m[j],
// S_tm[i][j] = t_t[i].r_m[j].
SimilarityMatrices similarity_matrices(
    autodiff::Tape& tape, std::span<const encoder::EmbeddingTriple> triggers,
    std::span<const encoder::EmbeddingTriple> recalls);

autodiff::Value ppm_loss(autodiff::Tape& tape, const SimilarityMatrices& s,
                         const LabelMatrix& y, double alpha1);
autodiff::Value pdc_loss(autodiff::Tape& tape, const SimilarityMatrices& s,
                         double alpha2, const LossConfig& config);
autodiff::Value plc_loss(autodiff::Tape& tape, const SimilarityMatrices& s,
                         double alpha3, std::size_t plc_top_k,
                         bool include_diagonal = true);
LossValues total_loss(autodiff::Tape& tape, const SimilarityMatrices& s,
                      const LabelMatrix& y, const LossConfig& config);

// Single-channel hinge loss for the baseline v-v / t-t models.
autodiff::Value baseline_hinge_loss(autodiff::Tape& tape,
                                    std::span<const autodiff::Value> trigger_embs,
                                    std::span<const autodiff::Value> recall_embs,
                                    double margin);

// Convenience wrappers evaluating the losses on plain N x N matrices
// (row-major) through a scratch tape.
struct PlainSims {
  std::size_t n = 0;
  std::vector<double> mm, vm, tm;
};
LossBreakdown eval_losses(const PlainSims& s, const LossConfig& config);

}  // namespace ssr::loss
