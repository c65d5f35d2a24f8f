#include "run_config.hpp"

#include <functional>
#include <map>

#include "acceptance.hpp"
#include "gsr/error.hpp"
#include "gsr/io.hpp"
#include "gsr/rng.hpp"

namespace gsr::cli {

namespace {

using nlohmann::json;
using Setter = std::function<void(const json&, const std::string&)>;

[[noreturn]] void bad(const std::string& key, const std::string& why) { throw ConfigError("config key '" + key + "': " + why); }

void walk(const json& obj, const std::string& prefix, const std::map<std::string, Setter>& table) {
  if (!obj.is_object()) bad(prefix.empty() ? "<root>" : prefix, "expected object");
  for (const auto& [k, v] : obj.items()) {
    const std::string key = prefix.empty() ? k : prefix + "." + k;
    auto it = table.find(k);
    if (it == table.end()) bad(key, "unknown key");
    it->second(v, key);
  }
}

template <typename T>
Setter count(T& dst) {
  return [&dst](const json& v, const std::string& key) {
    if (!v.is_number_unsigned()) bad(key, "expected non-negative integer");
    dst = v.get<T>();
  };
}

Setter integer(int& dst) {
  return [&dst](const json& v, const std::string& key) {
    if (!v.is_number_integer()) bad(key, "expected integer");
    dst = v.get<int>();
  };
}

Setter real(double& dst) {
  return [&dst](const json& v, const std::string& key) {
    if (!v.is_number()) bad(key, "expected number");
    dst = v.get<double>();
  };
}

Setter text(std::string& dst) {
  return [&dst](const json& v, const std::string& key) {
    if (!v.is_string()) bad(key, "expected string");
    dst = v.get<std::string>();
  };
}

template <typename T, typename Parse>
Setter parsed(T& dst, Parse parse) {
  return [&dst, parse](const json& v, const std::string& key) {
    if (!v.is_string()) bad(key, "expected string");
    try {
      dst = parse(v.get<std::string>());
    } catch (const Error& e) {
      bad(key, e.what());
    }
  };
}

Setter int_list(std::vector<int>& dst) {
  return [&dst](const json& v, const std::string& key) {
    if (!v.is_array()) bad(key, "expected array of integers");
    dst.clear();
    for (const auto& e : v) {
      if (!e.is_number_integer()) bad(key, "expected array of integers");
      dst.push_back(e.get<int>());
    }
  };
}

NoiseKind x_kind(const std::string& s) {
  if (s == "c" || s == "Xc") return NoiseKind::Xc;
  if (s == "z" || s == "Xz") return NoiseKind::Xz;
  throw ArgumentError("feature noise must be c or z, got '" + s + "'");
}

NoiseKind a_kind(const std::string& s) {
  if (s == "c" || s == "Ac") return NoiseKind::Ac;
  if (s == "z" || s == "Az") return NoiseKind::Az;
  throw ArgumentError("adjacency noise must be c or z, got '" + s + "'");
}

OptimizerKind optimizer(const std::string& s) {
  if (s == "adam") return OptimizerKind::adam;
  if (s == "sgd") return OptimizerKind::sgd;
  throw ArgumentError("optimizer must be adam or sgd, got '" + s + "'");
}

void check_dataset(const std::string& d) {
  if (d != "sbm" && d != "wikics" && d != "ogbn-arxiv")
    throw ConfigError("dataset must be one of wikics, ogbn-arxiv, sbm (got '" + d + "')");
}

void check_levels(const std::vector<int>& levels, const char* name) {
  for (int l : levels)
    if (l < 0 || l > 100 || l % 10 != 0)
      throw ConfigError(std::string("grid.") + name + ": level " + std::to_string(l) + " is not a multiple of 10 in [0, 100]");
}

// Graph and RBM budget come as a pair; the 256-unit default RBM undertrains on 600 nodes.
void apply_preset(RunConfig& cfg, const std::string& name, const std::string& key) {
  cfg.sbm_preset = name;
  if (name == "default") {
    cfg.sbm = SbmParams{};
    cfg.rbm.hidden_units = 128;
    cfg.rbm.epochs = 300;
    cfg.rbm.batch_size = 16;
    cfg.gibbs_rounds = 1;
  } else if (name == "blanking") {
    cfg.sbm = verify::blanking_sbm(0);
    cfg.rbm = verify::blanking_rbm(0);
    cfg.gibbs_rounds = verify::kBlankingGibbsRounds;
  } else {
    bad(key, "expected default or blanking");
  }
}

}  // namespace

RunConfig default_config(const std::string& dataset) {
  check_dataset(dataset);
  RunConfig cfg;
  cfg.dataset = dataset;
  if (dataset == "sbm") apply_preset(cfg, "default", "sbm.preset");
  return cfg;
}

void apply_json(RunConfig& cfg, const nlohmann::json& doc) {
  if (!doc.is_object()) bad("<root>", "expected object");
  if (doc.contains("dataset")) {
    text(cfg.dataset)(doc["dataset"], "dataset");
    check_dataset(cfg.dataset);
  }
  // The preset resets sbm and rbm, so it goes before any explicit key.
  if (doc.contains("sbm") && doc["sbm"].is_object() && doc["sbm"].contains("preset")) {
    const auto& v = doc["sbm"]["preset"];
    if (!v.is_string()) bad("sbm.preset", "expected string");
    apply_preset(cfg, v.get<std::string>(), "sbm.preset");
  }
  std::string data_path;
  std::string out;
  const std::map<std::string, Setter> train = {
      {"epochs", count(cfg.train.epochs)},
      {"learning_rate", real(cfg.train.learning_rate)},
      {"dropout", real(cfg.train.dropout_p)},
      {"hidden_dim", count(cfg.train.hidden_dim)},
      {"optimizer", parsed(cfg.train.optimizer, optimizer)},
  };
  const std::map<std::string, Setter> rbm = {
      {"hidden_units", count(cfg.rbm.hidden_units)}, {"epochs", count(cfg.rbm.epochs)},
      {"batch_size", count(cfg.rbm.batch_size)},     {"cd_steps", count(cfg.rbm.cd_steps)},
      {"lr", real(cfg.rbm.lr)},                      {"gibbs_rounds", count(cfg.gibbs_rounds)},
  };
  const std::map<std::string, Setter> n2v = {
      {"walks_per_node", count(cfg.node2vec.walks_per_node)}, {"walk_length", count(cfg.node2vec.walk_length)},
      {"p", real(cfg.node2vec.p)},                            {"q", real(cfg.node2vec.q)},
      {"window", count(cfg.node2vec.window)},                 {"embedding_dim", count(cfg.node2vec.embedding_dim)},
      {"negatives", count(cfg.node2vec.negatives)},           {"epochs", count(cfg.node2vec.epochs)},
      {"lr", real(cfg.node2vec.lr)},
  };
  const std::map<std::string, Setter> grid = {
      {"x_noise", parsed(cfg.grid.x_kind, x_kind)},
      {"a_noise", parsed(cfg.grid.a_kind, a_kind)},
      {"split", parsed(cfg.grid.split, parse_split)},
      {"x_levels", int_list(cfg.grid.x_levels)},
      {"a_levels", int_list(cfg.grid.a_levels)},
      {"n2v_az_cutoff", integer(cfg.grid.n2v_az_cutoff)},
  };
  const std::map<std::string, Setter> tsne = {
      {"perplexity", real(cfg.tsne.perplexity)},  {"iterations", count(cfg.tsne.iterations)},
      {"learning_rate", real(cfg.tsne.learning_rate)}, {"n_x", integer(cfg.project.n_x)},
      {"n_a", integer(cfg.project.n_a)},          {"max_points", count(cfg.project.max_points)},
  };
  const std::map<std::string, Setter> sbm = {
      {"preset", [](const json&, const std::string&) {}},  // applied before the walk
      {"num_nodes", count(cfg.sbm.num_nodes)},
      {"num_classes", integer(cfg.sbm.num_classes)},
      {"p_in", real(cfg.sbm.p_in)},
      {"p_out", real(cfg.sbm.p_out)},
      {"feature_dim", count(cfg.sbm.feature_dim)},
      {"feature_shift", real(cfg.sbm.feature_shift)},
  };
  const std::map<std::string, Setter> root = {
      {"dataset", [](const json&, const std::string&) {}},
      {"data_path", text(data_path)},
      {"seed", count(cfg.seed)},
      {"out", text(out)},
      {"jobs", integer(cfg.jobs)},
      {"arch", parsed(cfg.arch, parse_arch)},
      {"taps", int_list(cfg.taps)},
      {"train", [&](const json& v, const std::string& key) { walk(v, key, train); }},
      {"rbm", [&](const json& v, const std::string& key) { walk(v, key, rbm); }},
      {"node2vec", [&](const json& v, const std::string& key) { walk(v, key, n2v); }},
      {"grid", [&](const json& v, const std::string& key) { walk(v, key, grid); }},
      {"tsne", [&](const json& v, const std::string& key) { walk(v, key, tsne); }},
      {"sbm", [&](const json& v, const std::string& key) { walk(v, key, sbm); }},
  };
  walk(doc, "", root);
  if (!data_path.empty()) cfg.data_path = data_path;
  if (!out.empty()) cfg.out = out;
}

RunConfig load_config(const std::filesystem::path& path, const std::string& dataset_override) {
  json doc;
  try {
    doc = json::parse(io::read_text(path));
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  std::string dataset = dataset_override;
  if (dataset.empty()) dataset = doc.is_object() && doc.contains("dataset") && doc["dataset"].is_string()
                                     ? doc["dataset"].get<std::string>()
                                     : "sbm";
  RunConfig cfg = default_config(dataset);
  apply_json(cfg, doc);
  if (!dataset_override.empty()) cfg.dataset = dataset_override;
  return cfg;
}

void RunConfig::validate() const {
  check_dataset(dataset);
  if (taps.empty()) throw ConfigError("taps: at least one tap is required");
  for (int t : taps)
    if (t < 0 || t > 3) throw ConfigError("taps: " + std::to_string(t) + " outside {0,1,2,3}");
  if (jobs < 0) throw ConfigError("jobs must be >= 0");
  if (gibbs_rounds < 1) throw ConfigError("rbm.gibbs_rounds must be >= 1");
  if (grid.x_kind != NoiseKind::Xc && grid.x_kind != NoiseKind::Xz) throw ConfigError("grid.x_noise must be c or z");
  if (grid.a_kind != NoiseKind::Ac && grid.a_kind != NoiseKind::Az) throw ConfigError("grid.a_noise must be c or z");
  check_levels(grid.x_levels, "x_levels");
  check_levels(grid.a_levels, "a_levels");
  check_levels({project.n_x, project.n_a}, "tsne.n_x/n_a");
  if (project.max_points < 3) throw ConfigError("tsne.max_points must be >= 3");
  try {
    train.validate();
    rbm.validate();
    node2vec.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (dataset == "sbm") {
    if (sbm.num_nodes == 0 || sbm.num_classes < 1) throw ConfigError("sbm: need nodes and classes");
    if (sbm.p_in < 0 || sbm.p_in > 1 || sbm.p_out < 0 || sbm.p_out > 1) throw ConfigError("sbm: probabilities must lie in [0, 1]");
  }
}

nlohmann::json to_json(const RunConfig& cfg) {
  json j;
  j["dataset"] = cfg.dataset;
  if (!cfg.data_path.empty()) j["data_path"] = cfg.data_path.string();
  j["seed"] = cfg.seed;
  j["out"] = cfg.out.string();
  j["arch"] = to_string(cfg.arch);
  j["taps"] = cfg.taps;
  j["train"] = {{"epochs", cfg.train.epochs},
                {"learning_rate", cfg.train.learning_rate},
                {"dropout", cfg.train.dropout_p},
                {"hidden_dim", cfg.train.hidden_dim},
                {"optimizer", cfg.train.optimizer == OptimizerKind::adam ? "adam" : "sgd"}};
  j["rbm"] = {{"hidden_units", cfg.rbm.hidden_units}, {"epochs", cfg.rbm.epochs},
              {"batch_size", cfg.rbm.batch_size},     {"cd_steps", cfg.rbm.cd_steps},
              {"lr", cfg.rbm.lr},                     {"gibbs_rounds", cfg.gibbs_rounds}};
  j["grid"] = {{"x_noise", cfg.grid.x_kind == NoiseKind::Xc ? "c" : "z"},
               {"a_noise", cfg.grid.a_kind == NoiseKind::Ac ? "c" : "z"},
               {"split", to_string(cfg.grid.split)},
               {"x_levels", cfg.grid.x_levels},
               {"a_levels", cfg.grid.a_levels},
               {"n2v_az_cutoff", cfg.grid.n2v_az_cutoff}};
  if (cfg.dataset == "sbm")
    j["sbm"] = {{"preset", cfg.sbm_preset},  {"num_nodes", cfg.sbm.num_nodes},
                {"num_classes", cfg.sbm.num_classes}, {"p_in", cfg.sbm.p_in},
                {"p_out", cfg.sbm.p_out},     {"feature_dim", cfg.sbm.feature_dim},
                {"feature_shift", cfg.sbm.feature_shift}};
  return j;
}

std::uint64_t stage_seed(const RunConfig& cfg, std::uint64_t stage) { return derive_seed(cfg.seed, {0xc11, stage}); }

}  // namespace gsr::cli
