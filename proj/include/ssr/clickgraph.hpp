#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

// Weighted bipartite query-item click graph built from behavior logs.
// Edge weight is a lambda-weighted sum of per-level click counts; deeper
// click levels carry larger coefficients to damp accidental clicks.
namespace ssr::clickgraph {

struct UnknownId : std::runtime_error {
  explicit UnknownId(const std::string& what) : std::runtime_error(what) {}
};
struct UnknownQuery : std::runtime_error {
  explicit UnknownQuery(const std::string& what) : std::runtime_error(what) {}
};

// Ordered behavior depth: page-click <= add-to-cart <= contact-supplier
// <= order <= pay.
enum class ClickLevel : int {
  PageClick = 0,
  AddToCart = 1,
  ContactSupplier = 2,
  Order = 3,
  Pay = 4,
};

// Log spelling is the single letter c|a|s|o|p.
ClickLevel level_from_letter(char c);
char level_letter(ClickLevel level);

struct ClickRecord {
  std::string query_id;
  std::string item_id;
  ClickLevel level = ClickLevel::PageClick;
  std::uint64_t count = 0;
};

struct ClickCounts {
  std::array<std::uint64_t, 5> by_level{};  // indexed by ClickLevel

  std::uint64_t& operator[](ClickLevel l) {
    return by_level[static_cast<int>(l)];
  }
  std::uint64_t operator[](ClickLevel l) const {
    return by_level[static_cast<int>(l)];
  }
};

struct LambdaWeights {
  std::array<double, 5> lambdas{1.0, 2.0, 2.0, 5.0, 5.0};

  void validate() const;  // all >= 0
};

struct QueryNode {
  std::string query_id;
  std::string text;  // raw search text, whitespace-separated words
};

struct ItemNode {
  std::string item_id;
  std::string image_ref;
  std::string title;
  std::vector<std::string> keywords;
  std::string brand;
  std::string sub_category_id;
};

struct WeightedItem {
  std::string item_id;
  double weight = 0.0;
};

class ClickGraph {
 public:
  ClickGraph(std::map<std::string, QueryNode> queries,
             std::map<std::string, ItemNode> items,
             std::map<std::pair<std::string, std::string>, double> edges);

  const std::map<std::string, QueryNode>& queries() const { return queries_; }
  const std::map<std::string, ItemNode>& items() const { return items_; }
  const std::map<std::pair<std::string, std::string>, double>& edges() const {
    return edges_;
  }

  const QueryNode& query(const std::string& query_id) const;
  const ItemNode& item(const std::string& item_id) const;

  // Items adjacent to query_id, weight descending; empty if no edges.
  const std::vector<WeightedItem>& adjacency(const std::string& query_id) const;

  std::size_t num_edges() const { return edges_.size(); }

 private:
  std::map<std::string, QueryNode> queries_;
  std::map<std::string, ItemNode> items_;
  std::map<std::pair<std::string, std::string>, double> edges_;
  std::map<std::string, std::vector<WeightedItem>> adjacency_;
  std::vector<WeightedItem> empty_;
};

// lambda1*cnt_c + lambda2*cnt_a + lambda3*cnt_s + lambda4*cnt_o + lambda5*cnt_p
double edge_weight(const ClickCounts& counts, const LambdaWeights& lambdas);

// Aggregates per-(query,item) counts across the stream, then weights them.
// Pairs with weight 0 produce no edge. Records referencing ids missing from
// catalog/queries throw UnknownId. Zero-count records are accepted no-ops.
ClickGraph build_graph(const std::vector<ClickRecord>& records,
                       const std::vector<ItemNode>& catalog,
                       const std::vector<QueryNode>& queries,
                       const LambdaWeights& lambdas);

// Top-k adjacent items by weight descending, ties broken by ascending
// item_id. Throws UnknownQuery for queries not in the graph.
std::vector<WeightedItem> top_items(const ClickGraph& graph,
                                    const std::string& query_id,
                                    std::size_t k = 4);

}  // namespace ssr::clickgraph
