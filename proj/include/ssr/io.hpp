#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ssr/clickgraph.hpp"
#include "ssr/encoder.hpp"
#include "ssr/features.hpp"
#include "ssr/retrieval.hpp"
#include "ssr/sampler.hpp"
#include "ssr/trainer.hpp"

// File formats shared by the CLI pipeline. Click logs and pairs are TSV,
// catalog/query/feature records are JSON lines, the checkpoint is one JSON
// document. Every writer emits a '#' provenance header (tool version, seed,
// config hash); readers skip '#' lines. Parse failures report line numbers.
namespace ssr::io {

inline constexpr const char* kToolVersion = "0.1.0";

struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

std::uint64_t fnv1a(const std::string& s);

struct Provenance {
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;

  std::string header_line() const;
};

// clicks.tsv: query_id<TAB>item_id<TAB>level(c|a|s|o|p)<TAB>count
std::vector<clickgraph::ClickRecord> read_click_log(const std::filesystem::path& path);
void write_click_log(const std::filesystem::path& path,
                     const std::vector<clickgraph::ClickRecord>& records,
                     const Provenance& prov);

// items.jsonl: item_id, image_tokens, text_tokens, title, keywords, brand,
// sub_category_id, style_id?
struct ItemFile {
  std::vector<clickgraph::ItemNode> items;
  std::vector<ProductFeatures> features;
};
ItemFile read_items(const std::filesystem::path& path);
void write_items(const std::filesystem::path& path, const ItemFile& data,
                 const Provenance& prov);

// queries.jsonl: query_id, text
std::vector<clickgraph::QueryNode> read_queries(const std::filesystem::path& path);
void write_queries(const std::filesystem::path& path,
                   const std::vector<clickgraph::QueryNode>& queries,
                   const Provenance& prov);

// vocab.txt: one core keyword per line
std::set<std::string> read_vocab(const std::filesystem::path& path);
void write_vocab(const std::filesystem::path& path,
                 const std::set<std::string>& vocab, const Provenance& prov);

// word_vectors.tsv: word<TAB>v1<TAB>...<TAB>vd
encoder::VocabTable read_word_vectors(const std::filesystem::path& path);
void write_word_vectors(const std::filesystem::path& path,
                        const encoder::VocabTable& table, const Provenance& prov);

// pairs.tsv: trigger_id<TAB>recall_id<TAB>query_id<TAB>sub_category_id
std::vector<sampler::TrainingPair> read_pairs(const std::filesystem::path& path);
void write_pairs(const std::filesystem::path& path,
                 const std::vector<sampler::TrainingPair>& pairs,
                 const Provenance& prov);

// graph edge dump: query_id<TAB>item_id<TAB>weight
void write_edges(const std::filesystem::path& path,
                 const clickgraph::ClickGraph& graph, const Provenance& prov);

struct Checkpoint {
  encoder::EncoderParams params;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
  std::string train_config_json;  // round-trippable copy of the run config
};
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Human-readable table in the MRR / R@1 / R@5 / R@10 / R@20 layout.
std::string format_report_table(
    const std::vector<std::pair<std::string, retrieval::EvalReport>>& rows);
void write_report_json(
    const std::filesystem::path& path,
    const std::vector<std::pair<std::string, retrieval::EvalReport>>& rows,
    const Provenance& prov);

// epoch<TAB>batch<TAB>ppm<TAB>pdc<TAB>plc<TAB>total<TAB>val_mrr
void write_training_log(const std::filesystem::path& path,
                        const std::vector<trainer::BatchLogRow>& rows,
                        const Provenance& prov);

std::string format_double(double v);  // shortest round-trip decimal

}  // namespace ssr::io
