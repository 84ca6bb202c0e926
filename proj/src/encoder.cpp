#include "ssr/encoder.hpp"

#include <cmath>
#include <random>

#include "ssr/features.hpp"

namespace ssr::encoder {

using autodiff::Array;
using autodiff::Tape;
using autodiff::Value;

EncoderParams EncoderParams::init(std::size_t d_in, std::size_t d_h,
                                  std::size_t d_out, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto uniform = [&rng](double scale) {
    // 53-bit mantissa draw in [0,1), portable across standard libraries
    double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return (2.0 * u - 1.0) * scale;
  };
  auto fill = [&](Array& a, std::vector<std::size_t> shape, double scale) {
    a = Array::zeros(std::move(shape));
    for (double& x : a.data) x = uniform(scale);
  };
  EncoderParams p;
  fill(p.W1, {d_in, d_h}, 1.0 / std::sqrt(static_cast<double>(d_in)));
  fill(p.b1, {d_h}, 0.0);
  fill(p.W2, {d_h, d_out}, 1.0 / std::sqrt(static_cast<double>(d_h)));
  fill(p.b2, {d_out}, 0.0);
  fill(p.tag_img, {d_in}, 0.1);
  fill(p.tag_txt, {d_in}, 0.1);
  fill(p.cls, {d_in}, 0.1);
  return p;
}

std::vector<double> EncoderParams::flatten() const {
  std::vector<double> out;
  out.reserve(num_params());
  for (const Array* a : {&W1, &b1, &W2, &b2, &tag_img, &tag_txt, &cls})
    out.insert(out.end(), a->data.begin(), a->data.end());
  return out;
}

std::size_t EncoderParams::num_params() const {
  return W1.size() + b1.size() + W2.size() + b2.size() + tag_img.size() +
         tag_txt.size() + cls.size();
}

EncoderParams EncoderParams::unflatten(std::size_t d_in, std::size_t d_h,
                                       std::size_t d_out,
                                       const std::vector<double>& flat) {
  EncoderParams p;
  p.W1 = Array::zeros({d_in, d_h});
  p.b1 = Array::zeros({d_h});
  p.W2 = Array::zeros({d_h, d_out});
  p.b2 = Array::zeros({d_out});
  p.tag_img = Array::zeros({d_in});
  p.tag_txt = Array::zeros({d_in});
  p.cls = Array::zeros({d_in});
  std::size_t off = 0;
  for (Array* a : {&p.W1, &p.b1, &p.W2, &p.b2, &p.tag_img, &p.tag_txt, &p.cls}) {
    if (off + a->size() > flat.size())
      throw std::invalid_argument("unflatten: parameter vector too short");
    std::copy(flat.begin() + off, flat.begin() + off + a->size(), a->data.begin());
    off += a->size();
  }
  if (off != flat.size())
    throw std::invalid_argument("unflatten: parameter vector too long");
  return p;
}

EncoderOnTape EncoderOnTape::attach(Tape& tape, const EncoderParams& p) {
  return EncoderOnTape{
      tape.input(p.W1),      tape.input(p.b1),      tape.input(p.W2),
      tape.input(p.b2),      tape.input(p.tag_img), tape.input(p.tag_txt),
      tape.input(p.cls),
  };
}

std::vector<double> EncoderOnTape::collect_grads(const Tape& tape) const {
  std::vector<double> out;
  for (Value v : {W1, b1, W2, b2, tag_img, tag_txt, cls}) {
    const Array& g = tape.grad(v);
    out.insert(out.end(), g.data.begin(), g.data.end());
  }
  return out;
}

Value encode(Tape& tape, const ProductFeatures& p, const EncoderOnTape& theta,
             MaskMode mode) {
  std::size_t d_in = tape.value(theta.W1).shape[0];
  if ((p.image_tokens.size() > 0 && p.image_tokens.cols() != d_in) ||
      (p.text_tokens.size() > 0 && p.text_tokens.cols() != d_in))
    throw autodiff::ShapeMismatch("encode: token dimension does not match W1");

  bool use_img = mode != MaskMode::TextOnly && p.image_tokens.rows() > 0 &&
                 p.image_tokens.size() > 0;
  bool use_txt = mode != MaskMode::ImageOnly && p.text_tokens.rows() > 0 &&
                 p.text_tokens.size() > 0;
  std::size_t n_img = use_img ? p.image_tokens.rows() : 0;
  std::size_t n_txt = use_txt ? p.text_tokens.rows() : 0;
  std::size_t total = n_img + n_txt;
  if (total == 0)
    throw autodiff::ShapeMismatch("encode: no live positions under mask mode");

  Array tokens = Array::zeros({total, d_in});
  for (std::size_t i = 0; i < n_img; ++i)
    for (std::size_t j = 0; j < d_in; ++j)
      tokens.at(i, j) = p.image_tokens.at(i, j);
  for (std::size_t i = 0; i < n_txt; ++i)
    for (std::size_t j = 0; j < d_in; ++j)
      tokens.at(n_img + i, j) = p.text_tokens.at(i, j);

  Value x = tape.input(std::move(tokens));
  if (use_txt) x = tape.set_row(x, n_img, theta.cls);  // [CLS] slot
  if (use_img) x = tape.add_row_range(x, 0, n_img, theta.tag_img);
  if (use_txt) x = tape.add_row_range(x, n_img, n_txt, theta.tag_txt);

  Value h = tape.relu(tape.add_rowvec(tape.matmul(x, theta.W1), theta.b1));
  Value y = tape.add_rowvec(tape.matmul(h, theta.W2), theta.b2);
  return tape.l2_normalize(tape.mean_over_axis(y, 0));
}

EmbeddingTriple embed_triple(Tape& tape, const ProductFeatures& p,
                             const EncoderOnTape& theta) {
  return EmbeddingTriple{
      encode(tape, p, theta, MaskMode::Full),
      encode(tape, p, theta, MaskMode::ImageOnly),
      encode(tape, p, theta, MaskMode::TextOnly),
  };
}

std::vector<double> encode_plain(const ProductFeatures& p,
                                 const EncoderParams& theta, MaskMode mode) {
  Tape tape;
  EncoderOnTape t = EncoderOnTape::attach(tape, theta);
  return tape.value(encode(tape, p, t, mode)).data;
}

PlainTriple embed_triple_plain(const ProductFeatures& p,
                               const EncoderParams& theta) {
  Tape tape;
  EncoderOnTape t = EncoderOnTape::attach(tape, theta);
  EmbeddingTriple e = embed_triple(tape, p, t);
  return PlainTriple{tape.value(e.m).data, tape.value(e.v).data,
                     tape.value(e.t).data};
}

std::vector<double> compose_query(const ProductFeatures& image_source,
                                  const std::string& text_override,
                                  const VocabTable& vocab,
                                  const EncoderParams& theta) {
  std::size_t n_txt = image_source.text_tokens.rows();
  std::size_t d_in = theta.d_in();
  ProductFeatures composed;
  composed.item_id = image_source.item_id;
  composed.image_tokens = image_source.image_tokens;
  composed.sub_category_id = image_source.sub_category_id;
  composed.text_tokens = Array::zeros({n_txt, d_in});
  auto words = text::tokenize(text_override);
  for (std::size_t w = 0; w < words.size() && w + 1 < n_txt; ++w) {
    auto it = vocab.find(words[w]);
    if (it == vocab.end()) continue;  // unknown words stay zero tokens
    for (std::size_t j = 0; j < d_in && j < it->second.size(); ++j)
      composed.text_tokens.at(w + 1, j) = it->second[j];
  }
  return encode_plain(composed, theta, MaskMode::Full);
}

}  // namespace ssr::encoder
