// Same-style retrieval lab CLI: synthetic data generation, click-graph
// construction, constrained pair sampling, contrastive fine-tuning, and
// cross-modal retrieval evaluation, wired as one pipeline.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "ssr/clickgraph.hpp"
#include "ssr/encoder.hpp"
#include "ssr/io.hpp"
#include "ssr/loss.hpp"
#include "ssr/retrieval.hpp"
#include "ssr/sampler.hpp"
#include "ssr/synth.hpp"
#include "ssr/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct AppConfig {
  json raw = json::object();

  ssr::clickgraph::LambdaWeights lambdas;
  ssr::sampler::SamplerConfig sampler;   // core_vocab filled at run time
  ssr::loss::LossConfig loss;
  ssr::trainer::TrainConfig train;
  ssr::synth::SynthConfig synth;
  ssr::synth::BehaviorModel behavior;
  std::size_t synth_num_queries = 100;

  std::uint64_t hash() const { return ssr::io::fnv1a(raw.dump()); }
};

template <typename T>
void get_to(const json& j, const char* key, T& out) {
  if (j.contains(key)) j.at(key).get_to(out);
}

AppConfig load_config(const std::string& path) {
  AppConfig cfg;
  cfg.sampler.core_vocab.insert("placeholder");  // replaced by vocab file
  if (path.empty()) return cfg;
  std::ifstream in(path);
  if (!in) throw ssr::io::ParseError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ssr::io::ParseError(path + ": bad config JSON: " + e.what());
  }
  cfg.raw = j;

  if (j.contains("lambda")) {
    auto v = j.at("lambda").get<std::vector<double>>();
    if (v.size() != 5)
      throw std::invalid_argument("config: lambda must have 5 entries");
    std::copy(v.begin(), v.end(), cfg.lambdas.lambdas.begin());
  }
  if (j.contains("sampler")) {
    const json& s = j["sampler"];
    get_to(s, "k_per_query", cfg.sampler.k_per_query);
    get_to(s, "sim_threshold", cfg.sampler.sim_threshold);
    get_to(s, "min_query_words", cfg.sampler.min_query_words);
    get_to(s, "enforce_query_admissible", cfg.sampler.enforce_query_admissible);
    get_to(s, "enforce_same_subcategory", cfg.sampler.enforce_same_subcategory);
    get_to(s, "enforce_similarity", cfg.sampler.enforce_similarity);
    get_to(s, "enforce_keyword_overlap", cfg.sampler.enforce_keyword_overlap);
  }
  if (j.contains("loss")) {
    const json& s = j["loss"];
    get_to(s, "alpha1", cfg.loss.alpha1);
    get_to(s, "alpha2", cfg.loss.alpha2);
    get_to(s, "alpha3", cfg.loss.alpha3);
    get_to(s, "plc_top_k", cfg.loss.plc_top_k);
    get_to(s, "include_diagonal_pdc", cfg.loss.include_diagonal_pdc);
    get_to(s, "include_diagonal_plc", cfg.loss.include_diagonal_plc);
    get_to(s, "use_ppm", cfg.loss.use_ppm);
    get_to(s, "use_pdc", cfg.loss.use_pdc);
    get_to(s, "use_plc", cfg.loss.use_plc);
  }
  if (j.contains("train")) {
    const json& s = j["train"];
    get_to(s, "learning_rate", cfg.train.learning_rate);
    get_to(s, "batch_size", cfg.train.batch_size);
    get_to(s, "max_epochs", cfg.train.max_epochs);
    get_to(s, "early_stop_patience", cfg.train.early_stop_patience);
    get_to(s, "d_h", cfg.train.d_h);
    get_to(s, "d_out", cfg.train.d_out);
    if (s.contains("optimizer")) {
      std::string o = s["optimizer"].get<std::string>();
      if (o == "sgd") cfg.train.optimizer = ssr::trainer::Optimizer::SGD;
      else if (o == "adam") cfg.train.optimizer = ssr::trainer::Optimizer::AdamLike;
      else throw std::invalid_argument("config: optimizer must be sgd|adam");
    }
  }
  if (j.contains("synth")) {
    const json& s = j["synth"];
    get_to(s, "num_styles", cfg.synth.num_styles);
    get_to(s, "suppliers_per_style", cfg.synth.suppliers_per_style);
    get_to(s, "styles_per_subcat", cfg.synth.styles_per_subcat);
    get_to(s, "n_img", cfg.synth.n_img);
    get_to(s, "n_txt", cfg.synth.n_txt);
    get_to(s, "d_in", cfg.synth.d_in);
    get_to(s, "image_noise_sigma", cfg.synth.image_noise_sigma);
    get_to(s, "text_noise_sigma", cfg.synth.text_noise_sigma);
    get_to(s, "subcat_signal", cfg.synth.subcat_signal);
    get_to(s, "style_signal", cfg.synth.style_signal);
    get_to(s, "keyword_injection_fraction", cfg.synth.keyword_injection_fraction);
    get_to(s, "num_queries", cfg.synth_num_queries);
  }
  if (j.contains("behavior")) {
    const json& s = j["behavior"];
    if (s.contains("level_probs")) {
      auto v = s["level_probs"].get<std::vector<double>>();
      if (v.size() != 5)
        throw std::invalid_argument("config: level_probs must have 5 entries");
      std::copy(v.begin(), v.end(), cfg.behavior.level_probs.begin());
    }
    get_to(s, "contamination", cfg.behavior.contamination);
    get_to(s, "clicks_per_query", cfg.behavior.clicks_per_query);
    get_to(s, "ambiguous_fraction", cfg.behavior.ambiguous_fraction);
  }
  return cfg;
}

ssr::clickgraph::ClickGraph load_graph(const std::string& items_path,
                                       const std::string& queries_path,
                                       const std::string& clicks_path,
                                       const ssr::clickgraph::LambdaWeights& lambdas,
                                       ssr::io::ItemFile* item_file_out = nullptr) {
  auto items = ssr::io::read_items(items_path);
  auto queries = ssr::io::read_queries(queries_path);
  auto records = ssr::io::read_click_log(clicks_path);
  auto graph = ssr::clickgraph::build_graph(records, items.items, queries, lambdas);
  if (item_file_out) *item_file_out = std::move(items);
  return graph;
}

std::map<std::string, ssr::ProductFeatures> feature_map(
    const ssr::io::ItemFile& items) {
  std::map<std::string, ssr::ProductFeatures> m;
  for (const auto& f : items.features) m[f.item_id] = f;
  return m;
}

int run(int argc, char** argv) {
  CLI::App app{"same-style product retrieval lab"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--seed", seed, "master random seed");

  // synth
  auto* cmd_synth = app.add_subcommand("synth", "generate synthetic catalog and click log");
  std::string out_dir;
  cmd_synth->add_option("--out", out_dir, "output directory")->required();

  // build-graph
  auto* cmd_graph = app.add_subcommand("build-graph", "build the weighted click graph and dump edges");
  std::string items_path, queries_path, clicks_path, out_path;
  cmd_graph->add_option("--items", items_path)->required();
  cmd_graph->add_option("--queries", queries_path)->required();
  cmd_graph->add_option("--clicks", clicks_path)->required();
  cmd_graph->add_option("--out", out_path)->required();

  // sample
  auto* cmd_sample = app.add_subcommand("sample", "sample constrained trigger-recall pairs");
  std::string vocab_path;
  cmd_sample->add_option("--items", items_path)->required();
  cmd_sample->add_option("--queries", queries_path)->required();
  cmd_sample->add_option("--clicks", clicks_path)->required();
  cmd_sample->add_option("--vocab", vocab_path)->required();
  cmd_sample->add_option("--out", out_path)->required();

  // train
  auto* cmd_train = app.add_subcommand("train", "fine-tune the encoder on sampled pairs");
  std::string pairs_path, log_path, baseline, loss_mix = "total";
  cmd_train->add_option("--items", items_path)->required();
  cmd_train->add_option("--pairs", pairs_path)->required();
  cmd_train->add_option("--out", out_path, "checkpoint path")->required();
  cmd_train->add_option("--log", log_path, "training log path");
  cmd_train->add_option("--baseline", baseline, "train a baseline model (vv|tt)");
  cmd_train->add_option("--loss", loss_mix, "loss components: total|ppm|ppm_pdc|ppm_plc");

  // eval
  auto* cmd_eval = app.add_subcommand("eval", "evaluate retrieval quality");
  std::string ckpt_path, mode = "mm";
  cmd_eval->add_option("--items", items_path)->required();
  cmd_eval->add_option("--pairs", pairs_path)->required();
  cmd_eval->add_option("--checkpoint", ckpt_path)->required();
  cmd_eval->add_option("--mode", mode, "tt|vv|mm|vm|tm");
  cmd_eval->add_option("--out", out_path, "JSON report path");

  // query
  auto* cmd_query = app.add_subcommand("query", "interactive image + text composition search");
  std::string item_id, text, wordvec_path;
  std::size_t topk = 10;
  cmd_query->add_option("--items", items_path)->required();
  cmd_query->add_option("--checkpoint", ckpt_path)->required();
  cmd_query->add_option("--word-vectors", wordvec_path)->required();
  cmd_query->add_option("--item", item_id, "image source item id")->required();
  cmd_query->add_option("--text", text, "replacement text")->required();
  cmd_query->add_option("--k", topk, "number of results");
  cmd_query->add_option("--out", out_path, "optional result file");

  CLI11_PARSE(app, argc, argv);

  AppConfig cfg = load_config(config_path);
  ssr::io::Provenance prov{seed, cfg.hash()};

  if (cmd_synth->parsed()) {
    fs::create_directories(out_dir);
    auto catalog = ssr::synth::gen_catalog(cfg.synth, seed);
    auto log = ssr::synth::gen_clicklog(catalog, cfg.behavior,
                                        cfg.synth_num_queries, seed + 1);
    ssr::io::write_items(fs::path(out_dir) / "items.jsonl",
                         {catalog.items, catalog.features}, prov);
    ssr::io::write_queries(fs::path(out_dir) / "queries.jsonl", log.queries, prov);
    ssr::io::write_click_log(fs::path(out_dir) / "clicks.tsv", log.records, prov);
    ssr::io::write_vocab(fs::path(out_dir) / "vocab.txt", catalog.core_vocab, prov);
    ssr::io::write_word_vectors(fs::path(out_dir) / "word_vectors.tsv",
                                catalog.word_vectors, prov);
    std::cout << "wrote " << catalog.items.size() << " items, "
              << log.queries.size() << " queries, " << log.records.size()
              << " click records to " << out_dir << "\n";
    return 0;
  }

  if (cmd_graph->parsed()) {
    auto graph = load_graph(items_path, queries_path, clicks_path, cfg.lambdas);
    ssr::io::write_edges(out_path, graph, prov);
    std::cout << "graph: " << graph.queries().size() << " queries, "
              << graph.items().size() << " items, " << graph.num_edges()
              << " edges\n";
    return 0;
  }

  if (cmd_sample->parsed()) {
    ssr::io::ItemFile items;
    auto graph = load_graph(items_path, queries_path, clicks_path, cfg.lambdas, &items);
    auto features = feature_map(items);
    ssr::sampler::SamplerConfig sampler_cfg = cfg.sampler;
    sampler_cfg.core_vocab = ssr::io::read_vocab(vocab_path);
    ssr::sampler::RawFeatureEmbedder ref(&features);
    auto pairs = ssr::sampler::sample_pairs(graph, ref, sampler_cfg);
    ssr::io::write_pairs(out_path, pairs, prov);
    std::cout << "sampled " << pairs.size() << " pairs\n";
    return 0;
  }

  if (cmd_train->parsed()) {
    auto items = ssr::io::read_items(items_path);
    auto features = feature_map(items);
    auto pairs = ssr::io::read_pairs(pairs_path);
    ssr::trainer::TrainConfig train_cfg = cfg.train;
    train_cfg.seed = seed;
    ssr::trainer::FitResult result;
    if (!baseline.empty()) {
      auto bmode = baseline == "vv" ? ssr::trainer::BaselineMode::VV
                 : baseline == "tt" ? ssr::trainer::BaselineMode::TT
                 : throw std::invalid_argument("--baseline must be vv or tt");
      result = ssr::trainer::fit_baseline(pairs, features, train_cfg, bmode,
                                          cfg.loss.alpha1);
    } else {
      ssr::loss::LossConfig loss_cfg = cfg.loss;
      if (loss_mix == "ppm") {
        loss_cfg.use_pdc = loss_cfg.use_plc = false;
      } else if (loss_mix == "ppm_pdc") {
        loss_cfg.use_plc = false;
      } else if (loss_mix == "ppm_plc") {
        loss_cfg.use_pdc = false;
      } else if (loss_mix != "total") {
        throw std::invalid_argument("--loss must be total|ppm|ppm_pdc|ppm_plc");
      }
      result = ssr::trainer::fit(pairs, features, train_cfg, loss_cfg);
    }
    ssr::io::Checkpoint ckpt;
    ckpt.params = result.params;
    ckpt.seed = seed;
    ckpt.config_hash = cfg.hash();
    ckpt.train_config_json = cfg.raw.dump();
    ssr::io::save_checkpoint(out_path, ckpt);
    if (!log_path.empty()) ssr::io::write_training_log(log_path, result.log, prov);
    std::cout << "trained " << result.history.size() << " epochs, best epoch "
              << result.best_epoch << " val_mrr "
              << result.history[result.best_epoch].val_mrr << ", dropped "
              << result.dropped_pairs << " pairs in batching\n";
    return 0;
  }

  if (cmd_eval->parsed()) {
    auto items = ssr::io::read_items(items_path);
    auto features = feature_map(items);
    auto pairs = ssr::io::read_pairs(pairs_path);
    auto ckpt = ssr::io::load_checkpoint(ckpt_path);
    auto rmode = ssr::retrieval::mode_from_string(mode);
    auto report = ssr::retrieval::evaluate(pairs, features, ckpt.params, rmode);
    std::vector<std::pair<std::string, ssr::retrieval::EvalReport>> rows = {
        {"eSSPR " + mode, report}};
    std::cout << ssr::io::format_report_table(rows);
    if (!out_path.empty()) ssr::io::write_report_json(out_path, rows, prov);
    return 0;
  }

  if (cmd_query->parsed()) {
    auto items = ssr::io::read_items(items_path);
    auto features = feature_map(items);
    if (!features.contains(item_id))
      throw std::invalid_argument("query: unknown item id " + item_id);
    auto ckpt = ssr::io::load_checkpoint(ckpt_path);
    auto word_vectors = ssr::io::read_word_vectors(wordvec_path);
    auto qvec = ssr::encoder::compose_query(features.at(item_id), text,
                                            word_vectors, ckpt.params);
    auto index = ssr::retrieval::build_index(items.features, ckpt.params, 'm');
    auto hits = ssr::retrieval::search(index, qvec, topk);
    std::ofstream out_file;
    if (!out_path.empty()) {
      out_file.open(out_path);
      out_file << prov.header_line() << "\n";
    }
    for (const auto& h : hits) {
      std::cout << h.item_id << "\t" << ssr::io::format_double(h.score) << "\n";
      if (out_file.is_open())
        out_file << h.item_id << "\t" << ssr::io::format_double(h.score) << "\n";
    }
    return 0;
  }

  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ssr::io::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
