#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ssr/tape.hpp"

namespace ssr {

// Per-product token features. image_tokens is n_img x d_in, text_tokens is
// n_txt x d_in with position 0 reserved for the [CLS] slot (the slot content
// in the file is a placeholder; the encoder substitutes its learned vector).
struct ProductFeatures {
  std::string item_id;
  autodiff::Array image_tokens;
  autodiff::Array text_tokens;
  std::string sub_category_id;
  std::optional<std::string> style_id;  // synthetic ground truth only
};

namespace text {

// Lowercase, strip punctuation, split on whitespace.
std::vector<std::string> tokenize(const std::string& s);

}  // namespace text

}  // namespace ssr
