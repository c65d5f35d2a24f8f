#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <random>

#include "acceptance.hpp"
#include "gsr/evaluation.hpp"
#include "gsr/io.hpp"
#include "gsr/kernels.hpp"
#include "gsr/metrics.hpp"
#include "gsr/node2vec.hpp"
#include "gsr/pipeline.hpp"
#include "gsr/rng.hpp"
#include "gsr/tsne.hpp"
#include "run_config.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace gsr;
using cli::RunConfig;

namespace {

// A required input is absent: usage problem, exit 1.
class MissingArtifact : public Error {
 public:
  using Error::Error;
};

enum Stage : std::uint64_t { kTrain = 1, kWalks = 2, kRbm = 3, kGrid = 4, kTsne = 5 };

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::string out;
  std::string dataset;
  std::string arch;
  std::string taps;
  std::string x_noise;
  std::string a_noise;
  std::string synthetic;
  std::string model;
  std::optional<int> only;
};

fs::path data_dir() {
  const char* env = std::getenv("GSR_DATA_DIR");
  return env != nullptr && *env != '\0' ? fs::path(env) : fs::path("data");
}

RunConfig resolve(const Flags& f) {
  std::string dataset = f.dataset;
  if (!f.synthetic.empty()) {
    if (f.synthetic != "sbm") throw ConfigError("--synthetic supports only 'sbm'");
    dataset = "sbm";
  }
  RunConfig cfg = f.config.empty() ? cli::default_config(dataset.empty() ? "sbm" : dataset)
                                   : cli::load_config(f.config, dataset);
  if (f.seed) cfg.seed = *f.seed;
  if (f.jobs) cfg.jobs = *f.jobs;
  if (!f.out.empty()) cfg.out = f.out;
  if (!f.arch.empty()) cfg.arch = parse_arch(f.arch);
  if (!f.taps.empty()) cfg.taps = parse_taps(f.taps);
  auto kind = [](const std::string& s, NoiseKind c, NoiseKind z, const char* flag) {
    if (s == "c") return c;
    if (s == "z") return z;
    throw ConfigError(std::string(flag) + " must be c or z");
  };
  if (!f.x_noise.empty()) cfg.grid.x_kind = kind(f.x_noise, NoiseKind::Xc, NoiseKind::Xz, "--x-noise");
  if (!f.a_noise.empty()) cfg.grid.a_kind = kind(f.a_noise, NoiseKind::Ac, NoiseKind::Az, "--a-noise");
  cfg.validate();
  kernels::set_num_threads(cfg.jobs);
  return cfg;
}

Graph load_dataset(const RunConfig& cfg) {
  if (cfg.dataset == "sbm") {
    SbmParams p = cfg.sbm;
    p.seed = cfg.seed;
    return generate_sbm_graph(p);
  }
  if (cfg.dataset == "wikics") {
    const fs::path path = cfg.data_path.empty() ? data_dir() / "wikics" / "data.json" : cfg.data_path;
    if (!fs::exists(path)) throw MissingArtifact("missing dataset file " + path.string() + " (set GSR_DATA_DIR or data_path)");
    return load_graph(path, GraphFormat::wikics_json);
  }
  fs::path path = cfg.data_path;
  if (path.empty()) {
    path = data_dir() / "ogbn-arxiv";
    if (!fs::exists(path)) path = data_dir() / "ogbn_arxiv";
  }
  if (!fs::exists(path)) throw MissingArtifact("missing dataset directory " + path.string() + " (set GSR_DATA_DIR or data_path)");
  return load_graph(path, GraphFormat::ogb_dir);
}

fs::path model_path(const RunConfig& c) { return c.out / ("model-" + to_string(c.arch) + ".bin"); }
fs::path bundle_path(const RunConfig& c) { return c.out / ("bundle-" + to_string(c.arch) + ".json"); }
fs::path embeddings_path(const RunConfig& c) { return c.out / "embeddings.bin"; }

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

PsiBundle require_bundle(const RunConfig& cfg, const std::string& explicit_path) {
  const fs::path path = explicit_path.empty() ? bundle_path(cfg) : fs::path(explicit_path);
  if (!fs::exists(path)) {
    if (explicit_path.empty() && !fs::exists(model_path(cfg)))
      throw MissingArtifact("missing trained model " + model_path(cfg).string() + " (run `gsr train` and `gsr rbm`, or pass --model)");
    throw MissingArtifact("missing model bundle " + path.string() + " (run `gsr rbm` or pass --model)");
  }
  const BundleManifest m = load_bundle_manifest(path);
  if (!fs::exists(m.model)) throw MissingArtifact("missing trained model " + m.model.string() + " named by " + path.string());
  for (const auto& [tap, p] : m.rbms)
    if (!fs::exists(p)) throw MissingArtifact("missing RBM-z" + std::to_string(tap) + " checkpoint " + p.string());
  return load_bundle(path);
}

GridRequest grid_request(const RunConfig& cfg, std::vector<int> taps) {
  GridRequest req;
  req.x_kind = cfg.grid.x_kind;
  req.a_kind = cfg.grid.a_kind;
  req.taps = std::move(taps);
  req.split = cfg.grid.split;
  req.seed = cli::stage_seed(cfg, kGrid);
  req.val_pool = default_pool_policy(cfg.dataset, Split::val);
  req.test_pool = default_pool_policy(cfg.dataset, Split::test);
  req.x_levels = cfg.grid.x_levels;
  req.a_levels = cfg.grid.a_levels;
  req.n2v_az_cutoff = cfg.grid.n2v_az_cutoff;
  return req;
}

json graph_stats(const Graph& g) {
  std::size_t classes = static_cast<std::size_t>(std::max(g.num_classes, 0));
  std::vector<std::size_t> per_class(classes, 0);
  for (int l : g.labels)
    if (l >= 0 && static_cast<std::size_t>(l) < classes) ++per_class[static_cast<std::size_t>(l)];
  return {{"nodes", g.num_nodes},
          {"edges", g.num_edges()},
          {"directed", g.directed},
          {"features", g.features.cols()},
          {"classes", g.num_classes},
          {"class_sizes", per_class},
          {"train", g.split.train.size()},
          {"val", g.split.val.size()},
          {"test", g.split.test.size()},
          {"isolated", isolated_nodes(g).size()},
          {"hash", hex(graph_hash(g))}};
}

json base_summary(const char* command, const RunConfig& cfg) {
  return {{"command", command}, {"status", "ok"}, {"dataset", cfg.dataset}, {"seed", cfg.seed}};
}

json cmd_data(const RunConfig& cfg) {
  const Graph g = load_dataset(cfg);
  const fs::path out = cfg.out / "graph.bin";
  save_graph(g, out);
  json s = base_summary("data", cfg);
  s["stats"] = graph_stats(g);
  s["graph"] = out.string();
  return s;
}

json cmd_embed(const RunConfig& cfg) {
  const Graph g = load_dataset(cfg);
  WalkConfig wc = cfg.node2vec;
  wc.seed = cli::stage_seed(cfg, kWalks);
  const WalkSet walks = generate_walks(g, wc);
  const DenseMatrix e = train_skipgram(walks, wc);
  save_embeddings(e, embeddings_path(cfg));
  json s = base_summary("embed", cfg);
  s["walks"] = walks.walks.size();
  s["skipped_isolated"] = walks.skipped.size();
  s["embedding_dim"] = e.cols();
  s["embeddings"] = embeddings_path(cfg).string();
  return s;
}

json cmd_train(const RunConfig& cfg) {
  const Graph g = load_dataset(cfg);
  std::optional<DenseMatrix> emb;
  if (cfg.arch == Arch::n2v) {
    if (!fs::exists(embeddings_path(cfg)))
      throw MissingArtifact("missing node2vec embeddings " + embeddings_path(cfg).string() + " (run `gsr embed` first)");
    emb = load_embeddings(embeddings_path(cfg));
  }
  TrainConfig tc = cfg.train;
  tc.seed = cli::stage_seed(cfg, kTrain);
  TrainHistory hist;
  const DnnModel m = train_dnn(g, cfg.arch, tc, emb ? &*emb : nullptr, &hist);
  save_model(m, model_path(cfg));
  const auto pred = forward_phi(m, g).predictions;
  json s = base_summary("train", cfg);
  s["arch"] = to_string(cfg.arch);
  s["best_epoch"] = hist.best_epoch;
  s["val_accuracy"] = accuracy(pred, g.labels, g.split.val);
  s["test_accuracy"] = accuracy(pred, g.labels, g.split.test);
  s["model"] = model_path(cfg).string();
  return s;
}

json cmd_rbm(const RunConfig& cfg) {
  if (!fs::exists(model_path(cfg)))
    throw MissingArtifact("missing trained model " + model_path(cfg).string() + " (run `gsr train` first)");
  const Graph g = load_dataset(cfg);
  RbmTrainConfig rc = cfg.rbm;
  rc.seed = cli::stage_seed(cfg, kRbm);
  ReconstructOptions ro;
  ro.gibbs_rounds = cfg.gibbs_rounds;
  const PsiBundle b = train_psi_bundle(load_model(model_path(cfg)), g, cfg.taps, rc, ro);
  BundleManifest man;
  man.model = model_path(cfg).filename();
  man.gibbs_rounds = cfg.gibbs_rounds;
  json s = base_summary("rbm", cfg);
  s["arch"] = to_string(cfg.arch);
  for (const auto& [tap, entry] : b.rbms()) {
    const std::string name = "rbm-" + to_string(cfg.arch) + "-z" + std::to_string(tap) + ".bin";
    save_rbm(RbmCheckpoint{entry.rbm, entry.scaler, entry.config}, cfg.out / name);
    man.rbms[tap] = name;
    const auto rows = g.split.test;
    const double psi = accuracy(run_psi(b, g, tap).predictions, g.labels, rows);
    s["clean_test_accuracy"]["psi" + std::to_string(tap)] = psi;
  }
  s["clean_test_accuracy"]["phi"] = accuracy(forward_phi(b.model(), g).predictions, g.labels, g.split.test);
  save_bundle_manifest(man, bundle_path(cfg));
  s["bundle"] = bundle_path(cfg).string();
  return s;
}

RunManifest run_manifest(const RunConfig& cfg, const PsiBundle& b, const std::string& bundle_file) {
  RunManifest m;
  m.dataset = cfg.dataset;
  m.seed = cfg.seed;
  const BundleManifest bm = load_bundle_manifest(bundle_file);
  m.model_checkpoint = bm.model.string();
  for (int t : b.taps()) m.rbm_checkpoints[t] = bm.rbms.at(t).string();
  m.noise = {to_string(cfg.grid.x_kind), to_string(cfg.grid.a_kind) + ":" +
                                             to_string(default_pool_policy(cfg.dataset, cfg.grid.split))};
  return m;
}

std::string grid_dir_name(const RunConfig& cfg) {
  return "grid-" + to_string(cfg.arch) + "-" + to_string(cfg.grid.x_kind) + to_string(cfg.grid.a_kind);
}

json cmd_grid(const RunConfig& cfg, const Flags& f) {
  const PsiBundle b = require_bundle(cfg, f.model);
  const std::string bundle_file = f.model.empty() ? bundle_path(cfg).string() : f.model;
  const Graph g = load_dataset(cfg);
  const std::vector<int> taps = f.taps.empty() ? b.taps() : cfg.taps;
  const GridResult res = run_grid(b, g, grid_request(cfg, taps));
  const fs::path dir = cfg.out / grid_dir_name(cfg);
  const auto files = export_report(res.grids, run_manifest(cfg, b, bundle_file), dir);
  json s = base_summary("grid", cfg);
  s["arch"] = to_string(b.model().arch);
  s["grids"] = res.grids.size();
  s["failed_cells"] = res.failures.size();
  s["clean_accuracy"] = res.grids.front().at(0, 0);
  for (const auto& p : files) s["files"].push_back(p.string());
  return s;
}

json cmd_project(const RunConfig& cfg, const Flags& f) {
  const PsiBundle b = require_bundle(cfg, f.model);
  const Graph g = load_dataset(cfg);
  std::vector<NodeId> rows = g.split.test;
  Rng rng = make_rng(cli::stage_seed(cfg, kTsne), {0});
  std::shuffle(rows.begin(), rows.end(), rng);
  rows.resize(std::min(rows.size(), cfg.project.max_points));
  std::sort(rows.begin(), rows.end());
  if (static_cast<double>(rows.size()) < 3.0 * cfg.tsne.perplexity)
    throw ConfigError("tsne: " + std::to_string(rows.size()) + " points cannot support perplexity " +
                      std::to_string(cfg.tsne.perplexity));
  const Graph noisy = noisy_instance(g, grid_request(cfg, b.taps()), cfg.project.n_x, cfg.project.n_a);
  std::vector<int> labels;
  for (NodeId r : rows) labels.push_back(g.labels[r]);

  std::vector<EmbeddingSnapshot> snaps;
  const std::vector<int> taps = f.taps.empty() ? b.taps() : cfg.taps;
  for (int tap : taps) {
    const RbmEntry& e = b.rbm(tap);
    const DenseMatrix clean = extract_representations(b.model(), g, tap, rows);
    const DenseMatrix dirty = extract_representations(b.model(), noisy, tap, rows);
    const DenseMatrix fixed = reconstruct(e.rbm, e.scaler, dirty, b.recon());
    const std::pair<SnapshotVariant, const DenseMatrix*> variants[] = {
        {SnapshotVariant::desired, &clean}, {SnapshotVariant::noisy, &dirty}, {SnapshotVariant::denoised, &fixed}};
    for (const auto& [variant, z] : variants) {
      TsneConfig tc = cfg.tsne;
      tc.seed = derive_seed(cli::stage_seed(cfg, kTsne), {static_cast<std::uint64_t>(tap)});
      EmbeddingSnapshot s;
      s.tap = tap;
      s.variant = variant;
      s.coords = tsne_embed(*z, tc).coords;
      s.labels = labels;
      s.n_x = cfg.project.n_x;
      s.n_a = cfg.project.n_a;
      s.x_kind = to_string(cfg.grid.x_kind);
      s.a_kind = to_string(cfg.grid.a_kind);
      snaps.push_back(std::move(s));
    }
  }
  const fs::path out = cfg.out / ("snapshots-" + to_string(b.model().arch) + ".csv");
  io::write_text_atomic(out, snapshots_csv(snaps));
  json s = base_summary("project", cfg);
  s["points"] = rows.size();
  s["snapshots"] = snaps.size();
  s["file"] = out.string();
  return s;
}

json cmd_report(const RunConfig& cfg) {
  std::vector<AccuracyGrid> grids;
  std::optional<RunManifest> manifest;
  std::vector<EmbeddingSnapshot> snaps;
  if (fs::exists(cfg.out)) {
    std::vector<fs::path> entries;
    for (const auto& e : fs::directory_iterator(cfg.out)) entries.push_back(e.path());
    std::sort(entries.begin(), entries.end());
    for (const auto& p : entries) {
      const std::string name = p.filename().string();
      if (fs::is_directory(p) && name.starts_with("grid-") && fs::exists(p / "results.json")) {
        LoadedResults r = load_results(p / "results.json");
        if (!manifest) manifest = r.manifest;
        grids.insert(grids.end(), r.grids.begin(), r.grids.end());
      } else if (name.starts_with("snapshots-") && p.extension() == ".csv") {
        auto s = parse_snapshots_csv(io::read_text(p));
        snaps.insert(snaps.end(), s.begin(), s.end());
      }
    }
  }
  if (grids.empty()) throw MissingArtifact("no grid results under " + cfg.out.string() + " (run `gsr grid` first)");
  const fs::path dir = cfg.out / "report";
  const auto files = export_report(grids, *manifest, dir, snaps);
  json s = base_summary("report", cfg);
  s["dataset"] = manifest->dataset;
  s["seed"] = manifest->seed;
  s["grids"] = grids.size();
  s["snapshots"] = snaps.size();
  s["report"] = (dir / "report.html").string();
  return s;
}

int cmd_verify(const Flags& f) {
  verify::Options opts;
  opts.data_dir = data_dir();
  std::vector<verify::CriterionResult> results;
  if (f.only)
    results.push_back(verify::run_criterion(*f.only, opts));
  else
    results = verify::run_all(opts);
  int failed = 0;
  for (const auto& r : results) {
    std::cerr << verify::format_line(r) << "\n";
    if (r.status == verify::Status::fail) ++failed;
  }
  json s = {{"command", "verify"}, {"status", failed == 0 ? "ok" : "failed"}, {"criteria", verify::to_json(results)}};
  std::cout << s.dump() << std::endl;
  return failed == 0 ? 0 : 2;
}

void add_common(CLI::App* sc, Flags& f) {
  sc->add_option("--config", f.config, "JSON run configuration")->check(CLI::ExistingFile);
  sc->add_option("--seed", f.seed, "root seed");
  sc->add_option("--jobs", f.jobs, "worker threads (default: all cores)")->check(CLI::NonNegativeNumber);
  sc->add_option("--out", f.out, "output directory (default: run)");
  sc->add_option("--dataset", f.dataset, "dataset")->check(CLI::IsMember({"wikics", "ogbn-arxiv", "sbm"}));
  sc->add_option("--arch", f.arch, "network")->check(CLI::IsMember({"mlp", "n2v", "gcn", "sage"}));
  sc->add_option("--taps", f.taps, "comma-separated taps, e.g. 0,1,2,3");
  sc->add_option("--x-noise", f.x_noise, "feature noise")->check(CLI::IsMember({"c", "z"}));
  sc->add_option("--a-noise", f.a_noise, "adjacency noise")->check(CLI::IsMember({"c", "z"}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Train, distort, denoise and evaluate node classifiers.", "gsr"};
  app.require_subcommand(1);
  Flags f;
  auto* data = app.add_subcommand("data", "load or generate a graph and print its statistics");
  auto* train = app.add_subcommand("train", "train the plain network for one architecture");
  auto* embed = app.add_subcommand("embed", "compute node2vec embeddings");
  auto* rbm = app.add_subcommand("rbm", "train one RBM per tap on clean train-split representations");
  auto* grid = app.add_subcommand("grid", "evaluate phi and psi over the noise grid and export it");
  auto* project = app.add_subcommand("project", "t-SNE snapshots of clean, noisy and denoised taps");
  auto* report = app.add_subcommand("report", "assemble every exported grid into one HTML report");
  auto* verify_cmd = app.add_subcommand("verify", "run the acceptance property suite");
  for (auto* sc : {data, train, embed, rbm, grid, project, report}) add_common(sc, f);
  data->add_option("--synthetic", f.synthetic, "generate a synthetic graph instead of loading one")
      ->check(CLI::IsMember({"sbm"}));
  grid->add_option("--model", f.model, "bundle manifest written by `gsr rbm`");
  project->add_option("--model", f.model, "bundle manifest written by `gsr rbm`");
  verify_cmd->add_option("--only", f.only, "run a single criterion")->check(CLI::Range(1, verify::kNumCriteria));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "gsr: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    if (verify_cmd->parsed()) return cmd_verify(f);
    const RunConfig cfg = resolve(f);
    json s;
    if (data->parsed()) s = cmd_data(cfg);
    else if (train->parsed()) s = cmd_train(cfg);
    else if (embed->parsed()) s = cmd_embed(cfg);
    else if (rbm->parsed()) s = cmd_rbm(cfg);
    else if (grid->parsed()) s = cmd_grid(cfg, f);
    else if (project->parsed()) s = cmd_project(cfg, f);
    else s = cmd_report(cfg);
    std::cout << s.dump() << std::endl;
    return 0;
  } catch (const MissingArtifact& e) {
    std::cerr << "gsr: " << e.what() << "\n";
    return 1;
  } catch (const ConfigError& e) {
    std::cerr << "gsr: " << e.what() << "\n" << app.help();
    return 1;
  } catch (const ArgumentError& e) {
    std::cerr << "gsr: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "gsr: " << e.what() << "\n";
    return 2;
  }
}
