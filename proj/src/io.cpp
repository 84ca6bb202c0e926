#include "ssr/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace ssr::io {

using nlohmann::json;

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string format_double(double v) {
  // nlohmann's shortest round-trip formatting, shared by TSV and JSON output
  return json(v).dump();
}

std::string Provenance::header_line() const {
  std::ostringstream os;
  os << "# ssrlab v" << kToolVersion << " seed=" << seed << " config="
     << std::hex << config_hash;
  return os.str();
}

namespace {

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open file for writing: " + path.string());
  return out;
}

bool skip_line(const std::string& line) {
  return line.empty() || line[0] == '#';
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return fields;
}

[[noreturn]] void fail_at(const std::filesystem::path& path, std::size_t lineno,
                          const std::string& what) {
  throw ParseError(path.string() + ":" + std::to_string(lineno) + ": " + what);
}

autodiff::Array tokens_from_json(const json& j) {
  if (!j.is_array()) throw ParseError("token field must be an array of arrays");
  std::size_t rows = j.size();
  if (rows == 0) return autodiff::Array::zeros({0, 0});
  std::size_t cols = j[0].size();
  autodiff::Array out = autodiff::Array::zeros({rows, cols});
  for (std::size_t i = 0; i < rows; ++i) {
    if (j[i].size() != cols) throw ParseError("ragged token matrix");
    for (std::size_t c = 0; c < cols; ++c) out.at(i, c) = j[i][c].get<double>();
  }
  return out;
}

json tokens_to_json(const autodiff::Array& a) {
  json rows = json::array();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    json row = json::array();
    for (std::size_t c = 0; c < a.cols(); ++c) row.push_back(a.at(i, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json array_to_json(const autodiff::Array& a) {
  json out;
  out["shape"] = a.shape;
  out["data"] = a.data;
  return out;
}

autodiff::Array array_from_json(const json& j) {
  return autodiff::Array(j.at("shape").get<std::vector<std::size_t>>(),
                         j.at("data").get<std::vector<double>>());
}

}  // namespace

std::vector<clickgraph::ClickRecord> read_click_log(
    const std::filesystem::path& path) {
  auto in = open_in(path);
  std::vector<clickgraph::ClickRecord> records;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (skip_line(line)) continue;
    auto fields = split_tabs(line);
    if (fields.size() != 4) fail_at(path, lineno, "expected 4 tab-separated fields");
    if (fields[2].size() != 1) fail_at(path, lineno, "bad click level: " + fields[2]);
    clickgraph::ClickRecord rec;
    rec.query_id = fields[0];
    rec.item_id = fields[1];
    try {
      rec.level = clickgraph::level_from_letter(fields[2][0]);
    } catch (const std::invalid_argument& e) {
      fail_at(path, lineno, e.what());
    }
    auto [p, ec] = std::from_chars(fields[3].data(),
                                   fields[3].data() + fields[3].size(), rec.count);
    if (ec != std::errc() || p != fields[3].data() + fields[3].size())
      fail_at(path, lineno, "bad count: " + fields[3]);
    records.push_back(std::move(rec));
  }
  return records;
}

void write_click_log(const std::filesystem::path& path,
                     const std::vector<clickgraph::ClickRecord>& records,
                     const Provenance& prov) {
  auto out = open_out(path);
  out << prov.header_line() << "\n";
  for (const auto& r : records)
    out << r.query_id << '\t' << r.item_id << '\t'
        << clickgraph::level_letter(r.level) << '\t' << r.count << "\n";
}

ItemFile read_items(const std::filesystem::path& path) {
  auto in = open_in(path);
  ItemFile data;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (skip_line(line)) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      fail_at(path, lineno, std::string("bad JSON: ") + e.what());
    }
    try {
      clickgraph::ItemNode node;
      node.item_id = j.at("item_id").get<std::string>();
      node.image_ref = j.value("image_ref", "");
      node.title = j.at("title").get<std::string>();
      node.keywords = j.at("keywords").get<std::vector<std::string>>();
      node.brand = j.at("brand").get<std::string>();
      node.sub_category_id = j.at("sub_category_id").get<std::string>();
      if (node.title.empty()) fail_at(path, lineno, "title must be non-empty");
      if (node.sub_category_id.empty())
        fail_at(path, lineno, "sub_category_id must be present");

      ProductFeatures f;
      f.item_id = node.item_id;
      f.image_tokens = tokens_from_json(j.at("image_tokens"));
      f.text_tokens = tokens_from_json(j.at("text_tokens"));
      f.sub_category_id = node.sub_category_id;
      if (j.contains("style_id")) f.style_id = j["style_id"].get<std::string>();

      data.items.push_back(std::move(node));
      data.features.push_back(std::move(f));
    } catch (const json::exception& e) {
      fail_at(path, lineno, std::string("bad item record: ") + e.what());
    } catch (const ParseError&) {
      throw;
    }
  }
  return data;
}

void write_items(const std::filesystem::path& path, const ItemFile& data,
                 const Provenance& prov) {
  if (data.items.size() != data.features.size())
    throw std::invalid_argument("write_items: items/features size mismatch");
  auto out = open_out(path);
  out << prov.header_line() << "\n";
  for (std::size_t i = 0; i < data.items.size(); ++i) {
    const auto& node = data.items[i];
    const auto& f = data.features[i];
    json j;
    j["item_id"] = node.item_id;
    j["image_ref"] = node.image_ref;
    j["title"] = node.title;
    j["keywords"] = node.keywords;
    j["brand"] = node.brand;
    j["sub_category_id"] = node.sub_category_id;
    j["image_tokens"] = tokens_to_json(f.image_tokens);
    j["text_tokens"] = tokens_to_json(f.text_tokens);
    if (f.style_id) j["style_id"] = *f.style_id;
    out << j.dump() << "\n";
  }
}

std::vector<clickgraph::QueryNode> read_queries(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::vector<clickgraph::QueryNode> queries;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (skip_line(line)) continue;
    try {
      json j = json::parse(line);
      clickgraph::QueryNode q;
      q.query_id = j.at("query_id").get<std::string>();
      q.text = j.at("text").get<std::string>();
      if (q.text.empty()) fail_at(path, lineno, "query text must be non-empty");
      queries.push_back(std::move(q));
    } catch (const json::exception& e) {
      fail_at(path, lineno, std::string("bad query record: ") + e.what());
    }
  }
  return queries;
}

void write_queries(const std::filesystem::path& path,
                   const std::vector<clickgraph::QueryNode>& queries,
                   const Provenance& prov) {
  auto out = open_out(path);
  out << prov.header_line() << "\n";
  for (const auto& q : queries) {
    json j;
    j["query_id"] = q.query_id;
    j["text"] = q.text;
    out << j.dump() << "\n";
  }
}

std::set<std::string> read_vocab(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::set<std::string> vocab;
  std::string line;
  while (std::getline(in, line)) {
    if (skip_line(line)) continue;
    vocab.insert(line);
  }
  return vocab;
}

void write_vocab(const std::filesystem::path& path,
                 const std::set<std::string>& vocab, const Provenance& prov) {
  auto out = open_out(path);
  out << prov.header_line() << "\n";
  for (const auto& w : vocab) out << w << "\n";
}

encoder::VocabTable read_word_vectors(const std::filesystem::path& path) {
  auto in = open_in(path);
  encoder::VocabTable table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (skip_line(line)) continue;
    auto fields = split_tabs(line);
    if (fields.size() < 2) fail_at(path, lineno, "expected word and vector");
    std::vector<double> v;
    for (std::size_t i = 1; i < fields.size(); ++i) {
      try {
        v.push_back(std::stod(fields[i]));
      } catch (const std::exception&) {
        fail_at(path, lineno, "bad real value: " + fields[i]);
      }
    }
    table[fields[0]] = std::move(v);
  }
  return table;
}

void write_word_vectors(const std::filesystem::path& path,
                        const encoder::VocabTable& table, const Provenance& prov) {
  auto out = open_out(path);
  out << prov.header_line() << "\n";
  for (const auto& [word, v] : table) {
    out << word;
    for (double x : v) out << '\t' << format_double(x);
    out << "\n";
  }
}

std::vector<sampler::TrainingPair> read_pairs(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::vector<sampler::TrainingPair> pairs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (skip_line(line)) continue;
    auto fields = split_tabs(line);
    if (fields.size() != 4) fail_at(path, lineno, "expected 4 tab-separated fields");
    if (fields[0] == fields[1]) fail_at(path, lineno, "trigger equals recall");
    pairs.push_back({fields[0], fields[1], fields[2], fields[3]});
  }
  return pairs;
}

void write_pairs(const std::filesystem::path& path,
                 const std::vector<sampler::TrainingPair>& pairs,
                 const Provenance& prov) {
  auto out = open_out(path);
  out << prov.header_line() << "\n";
  for (const auto& p : pairs)
    out << p.trigger << '\t' << p.recall << '\t' << p.source_query << '\t'
        << p.sub_category_id << "\n";
}

void write_edges(const std::filesystem::path& path,
                 const clickgraph::ClickGraph& graph, const Provenance& prov) {
  auto out = open_out(path);
  out << prov.header_line() << "\n";
  for (const auto& [key, weight] : graph.edges())
    out << key.first << '\t' << key.second << '\t' << format_double(weight)
        << "\n";
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  json j;
  j["format"] = "ssrlab-checkpoint";
  j["version"] = 1;
  j["tool_version"] = kToolVersion;
  j["seed"] = ckpt.seed;
  j["config_hash"] = ckpt.config_hash;
  j["train_config"] =
      ckpt.train_config_json.empty() ? json::object()
                                     : json::parse(ckpt.train_config_json);
  json params;
  params["W1"] = array_to_json(ckpt.params.W1);
  params["b1"] = array_to_json(ckpt.params.b1);
  params["W2"] = array_to_json(ckpt.params.W2);
  params["b2"] = array_to_json(ckpt.params.b2);
  params["tag_img"] = array_to_json(ckpt.params.tag_img);
  params["tag_txt"] = array_to_json(ckpt.params.tag_txt);
  params["cls"] = array_to_json(ckpt.params.cls);
  j["params"] = std::move(params);
  auto out = open_out(path);
  out << j.dump(2) << "\n";
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  auto in = open_in(path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": bad checkpoint JSON: " + e.what());
  }
  if (j.value("format", "") != "ssrlab-checkpoint")
    throw ParseError(path.string() + ": not a checkpoint file");
  Checkpoint ckpt;
  ckpt.seed = j.value("seed", 0ull);
  ckpt.config_hash = j.value("config_hash", 0ull);
  if (j.contains("train_config")) ckpt.train_config_json = j["train_config"].dump();
  const json& p = j.at("params");
  ckpt.params.W1 = array_from_json(p.at("W1"));
  ckpt.params.b1 = array_from_json(p.at("b1"));
  ckpt.params.W2 = array_from_json(p.at("W2"));
  ckpt.params.b2 = array_from_json(p.at("b2"));
  ckpt.params.tag_img = array_from_json(p.at("tag_img"));
  ckpt.params.tag_txt = array_from_json(p.at("tag_txt"));
  ckpt.params.cls = array_from_json(p.at("cls"));
  return ckpt;
}

std::string format_report_table(
    const std::vector<std::pair<std::string, retrieval::EvalReport>>& rows) {
  std::ostringstream os;
  os << "Method          MRR      R@1      R@5      R@10     R@20\n";
  char buf[64];
  for (const auto& [name, r] : rows) {
    os << name;
    for (std::size_t pad = name.size(); pad < 14; ++pad) os << ' ';
    std::snprintf(buf, sizeof(buf), "  %.4f", r.mrr);
    os << buf;
    for (std::size_t k : {1, 5, 10, 20}) {
      std::snprintf(buf, sizeof(buf), "   %.4f", r.recall_at.at(k));
      os << buf;
    }
    os << "\n";
  }
  return os.str();
}

void write_report_json(
    const std::filesystem::path& path,
    const std::vector<std::pair<std::string, retrieval::EvalReport>>& rows,
    const Provenance& prov) {
  json j;
  j["tool_version"] = kToolVersion;
  j["seed"] = prov.seed;
  j["config_hash"] = prov.config_hash;
  json jrows = json::array();
  for (const auto& [name, r] : rows) {
    json row;
    row["method"] = name;
    row["mode"] = retrieval::mode_name(r.mode);
    row["mrr"] = r.mrr;
    for (const auto& [k, v] : r.recall_at) row["recall_at_" + std::to_string(k)] = v;
    row["num_queries"] = r.num_queries;
    jrows.push_back(std::move(row));
  }
  j["rows"] = std::move(jrows);
  auto out = open_out(path);
  out << j.dump(2) << "\n";
}

void write_training_log(const std::filesystem::path& path,
                        const std::vector<trainer::BatchLogRow>& rows,
                        const Provenance& prov) {
  auto out = open_out(path);
  out << prov.header_line() << "\n";
  out << "# epoch\tbatch\tppm\tpdc\tplc\ttotal\tval_mrr\n";
  for (const auto& r : rows)
    out << r.epoch << '\t' << r.batch << '\t' << format_double(r.losses.ppm)
        << '\t' << format_double(r.losses.pdc) << '\t'
        << format_double(r.losses.plc) << '\t' << format_double(r.losses.total)
        << '\t' << format_double(r.val_mrr) << "\n";
}

}  // namespace ssr::io
