#pragma once

#include <map>
#include <string>
#include <vector>

#include "ssr/features.hpp"
#include "ssr/tape.hpp"

// Toy multimodal encoder: a shared per-token two-layer perceptron with
// additive modality tags and a learned [CLS] vector, pooled by averaging the
// live positions of the last layer and unit-normalized. No cross-token
// mixing, which keeps the masking properties exactly testable.
namespace ssr::encoder {

enum class MaskMode { Full, ImageOnly, TextOnly };

struct EncoderParams {
  autodiff::Array W1;       // d_in x d_h
  autodiff::Array b1;       // d_h
  autodiff::Array W2;       // d_h x d_out
  autodiff::Array b2;       // d_out
  autodiff::Array tag_img;  // d_in
  autodiff::Array tag_txt;  // d_in
  autodiff::Array cls;      // d_in, substituted at text position 0

  std::size_t d_in() const { return W1.shape[0]; }
  std::size_t d_h() const { return W1.shape[1]; }
  std::size_t d_out() const { return W2.shape[1]; }

  static EncoderParams init(std::size_t d_in, std::size_t d_h,
                            std::size_t d_out, std::uint64_t seed);

  std::vector<double> flatten() const;
  static EncoderParams unflatten(std::size_t d_in, std::size_t d_h,
                                 std::size_t d_out,
                                 const std::vector<double>& flat);
  std::size_t num_params() const;
};

// Parameter leaves registered on one tape for a forward/backward pass.
struct EncoderOnTape {
  autodiff::Value W1, b1, W2, b2, tag_img, tag_txt, cls;

  static EncoderOnTape attach(autodiff::Tape& tape, const EncoderParams& p);
  // Gradients in the same order as EncoderParams::flatten.
  std::vector<double> collect_grads(const autodiff::Tape& tape) const;
};

struct EmbeddingTriple {
  autodiff::Value m, v, t;
};

// Unit-normalized pooled encoding of the live positions under the mask mode.
// Masked-modality positions are excluded from the average, which realizes
// zero-masking exactly for a per-token encoder.
autodiff::Value encode(autodiff::Tape& tape, const ProductFeatures& p,
                       const EncoderOnTape& theta, MaskMode mode);

EmbeddingTriple embed_triple(autodiff::Tape& tape, const ProductFeatures& p,
                             const EncoderOnTape& theta);

// Non-differentiating convenience: runs a scratch tape and copies values out.
struct PlainTriple {
  std::vector<double> m, v, t;
};
PlainTriple embed_triple_plain(const ProductFeatures& p, const EncoderParams& theta);
std::vector<double> encode_plain(const ProductFeatures& p,
                                 const EncoderParams& theta, MaskMode mode);

// Word -> d_in vector table for interactive query composition; unknown words
// map to the zero token.
using VocabTable = std::map<std::string, std::vector<double>>;

// Image tokens from image_source + text tokens built from text_override,
// encoded under Full pooling. n_txt (including the [CLS] slot) matches the
// source product; overflow words are truncated.
std::vector<double> compose_query(const ProductFeatures& image_source,
                                  const std::string& text_override,
                                  const VocabTable& vocab,
                                  const EncoderParams& theta);

}  // namespace ssr::encoder
