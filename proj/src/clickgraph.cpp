#include "ssr/clickgraph.hpp"

#include <algorithm>

namespace ssr::clickgraph {

ClickLevel level_from_letter(char c) {
  switch (c) {
    case 'c': return ClickLevel::PageClick;
    case 'a': return ClickLevel::AddToCart;
    case 's': return ClickLevel::ContactSupplier;
    case 'o': return ClickLevel::Order;
    case 'p': return ClickLevel::Pay;
    default:
      throw std::invalid_argument(std::string("unknown click level letter: ") + c);
  }
}

char level_letter(ClickLevel level) {
  static constexpr char letters[5] = {'c', 'a', 's', 'o', 'p'};
  return letters[static_cast<int>(level)];
}

void LambdaWeights::validate() const {
  for (double l : lambdas)
    if (l < 0.0) throw std::invalid_argument("lambda weights must be >= 0");
}

ClickGraph::ClickGraph(std::map<std::string, QueryNode> queries,
                       std::map<std::string, ItemNode> items,
                       std::map<std::pair<std::string, std::string>, double> edges)
    : queries_(std::move(queries)),
      items_(std::move(items)),
      edges_(std::move(edges)) {
  for (const auto& [key, weight] : edges_) {
    if (!queries_.contains(key.first))
      throw UnknownId("edge references unknown query: " + key.first);
    if (!items_.contains(key.second))
      throw UnknownId("edge references unknown item: " + key.second);
    if (weight <= 0.0)
      throw std::invalid_argument("edge weight must be > 0");
    adjacency_[key.first].push_back({key.second, weight});
  }
  for (auto& [qid, adj] : adjacency_) {
    std::sort(adj.begin(), adj.end(), [](const WeightedItem& a, const WeightedItem& b) {
      if (a.weight != b.weight) return a.weight > b.weight;
      return a.item_id < b.item_id;
    });
  }
}

const QueryNode& ClickGraph::query(const std::string& query_id) const {
  auto it = queries_.find(query_id);
  if (it == queries_.end()) throw UnknownQuery("unknown query: " + query_id);
  return it->second;
}

const ItemNode& ClickGraph::item(const std::string& item_id) const {
  auto it = items_.find(item_id);
  if (it == items_.end()) throw UnknownId("unknown item: " + item_id);
  return it->second;
}

const std::vector<WeightedItem>& ClickGraph::adjacency(
    const std::string& query_id) const {
  auto it = adjacency_.find(query_id);
  return it == adjacency_.end() ? empty_ : it->second;
}

double edge_weight(const ClickCounts& counts, const LambdaWeights& lambdas) {
  double w = 0.0;
  for (std::size_t i = 0; i < 5; ++i)
    w += lambdas.lambdas[i] * static_cast<double>(counts.by_level[i]);
  return w;
}

ClickGraph build_graph(const std::vector<ClickRecord>& records,
                       const std::vector<ItemNode>& catalog,
                       const std::vector<QueryNode>& queries,
                       const LambdaWeights& lambdas) {
  lambdas.validate();
  std::map<std::string, QueryNode> query_map;
  for (const auto& q : queries) query_map[q.query_id] = q;
  std::map<std::string, ItemNode> item_map;
  for (const auto& it : catalog) item_map[it.item_id] = it;

  std::map<std::pair<std::string, std::string>, ClickCounts> counts;
  for (const auto& rec : records) {
    if (!query_map.contains(rec.query_id))
      throw UnknownId("record references unknown query: " + rec.query_id);
    if (!item_map.contains(rec.item_id))
      throw UnknownId("record references unknown item: " + rec.item_id);
    counts[{rec.query_id, rec.item_id}][rec.level] += rec.count;
  }

  std::map<std::pair<std::string, std::string>, double> edges;
  for (const auto& [key, c] : counts) {
    double w = edge_weight(c, lambdas);
    if (w > 0.0) edges[key] = w;
  }
  return ClickGraph(std::move(query_map), std::move(item_map), std::move(edges));
}

std::vector<WeightedItem> top_items(const ClickGraph& graph,
                                    const std::string& query_id,
                                    std::size_t k) {
  graph.query(query_id);  // throws UnknownQuery
  const auto& adj = graph.adjacency(query_id);
  std::vector<WeightedItem> out(adj.begin(),
                                adj.begin() + std::min(k, adj.size()));
  return out;
}

}  // namespace ssr::clickgraph
