#include "gsr/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <limits>
#include <set>

#include "gsr/io.hpp"
#include "gsr/metrics.hpp"
#include "gsr/rng.hpp"

namespace gsr {

namespace {

constexpr double kAbsent = std::numeric_limits<double>::quiet_NaN();

void check_level(int n) {
  if (n < 0 || n > 100 || n % 10 != 0) throw ArgumentError("noise level must be a multiple of 10 in [0, 100], got " + std::to_string(n));
}

bool is_feature_kind(NoiseKind k) { return k == NoiseKind::Xc || k == NoiseKind::Xz; }

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

AccuracyGrid::AccuracyGrid() { values.fill(kAbsent); }

bool AccuracyGrid::absent(int ix, int ia) const { return std::isnan(at(ix, ia)); }

void GridRequest::validate() const {
  if (!is_feature_kind(x_kind)) throw ArgumentError("grid: x_kind must be Xc or Xz");
  if (is_feature_kind(a_kind)) throw ArgumentError("grid: a_kind must be Ac or Az");
  if (split == Split::train) throw ArgumentError("grid: the train split is never evaluated under noise");
  for (int t : taps) check_tap(t);
  for (int n : x_levels) check_level(n);
  for (int n : a_levels) check_level(n);
}

Graph noisy_instance(const Graph& g, const GridRequest& req, int n_x, int n_a) {
  check_level(n_x);
  check_level(n_a);
  Graph out = g;
  for (Split s : {Split::val, Split::test}) {
    const auto tag = static_cast<std::uint64_t>(s);
    const PoolPolicy pool = s == Split::val ? req.val_pool : req.test_pool;
    out = apply_noise(out, {req.x_kind, n_x, pool, s, derive_seed(req.seed, {0x58, static_cast<std::uint64_t>(n_x), tag})});
  }
  for (Split s : {Split::val, Split::test}) {
    const auto tag = static_cast<std::uint64_t>(s);
    const PoolPolicy pool = s == Split::val ? req.val_pool : req.test_pool;
    out = apply_noise(out, {req.a_kind, n_a, pool, s, derive_seed(req.seed, {0x41, static_cast<std::uint64_t>(n_a), tag})});
  }
  return out;
}

GridResult run_grid(const PsiBundle& bundle, const Graph& g, const GridRequest& req) {
  req.validate();
  for (int t : req.taps)
    if (!bundle.has_tap(t)) throw ConfigError("grid: no RBM for requested tap " + std::to_string(t));
  const DnnModel& model = bundle.model();
  std::vector<int> taps = req.taps;
  std::sort(taps.begin(), taps.end());
  taps.erase(std::unique(taps.begin(), taps.end()), taps.end());

  GridResult res;
  const std::size_t num_grids = taps.size() + 1;
  res.grids.resize(num_grids);
  const std::string started = utc_timestamp();
  for (std::size_t k = 0; k < num_grids; ++k) {
    GridMeta& m = res.grids[k].meta;
    m.arch = to_string(model.arch);
    m.pipeline = k == 0 ? "phi" : "psi" + std::to_string(taps[k - 1]);
    m.x_kind = to_string(req.x_kind);
    m.a_kind = to_string(req.a_kind);
    m.split = to_string(req.split);
    m.seed = req.seed;
    m.started = started;
  }

  struct Cell {
    int ix, ia;
  };
  std::vector<Cell> cells;
  for (int nx : req.x_levels)
    for (int na : req.a_levels) cells.push_back({nx / 10, na / 10});

  const auto& mask = g.split.of(req.split);
  std::vector<std::string> cell_errors(cells.size());
  const auto num_cells = static_cast<std::ptrdiff_t>(cells.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t c = 0; c < num_cells; ++c) {
    const Cell cell = cells[static_cast<std::size_t>(c)];
    const auto pos = static_cast<std::size_t>(cell.ix * kGridSteps + cell.ia);
    if (model.arch == Arch::n2v && req.a_kind == NoiseKind::Az && cell.ia * 10 > req.n2v_az_cutoff) continue;
    try {
      const Graph noisy = noisy_instance(g, req, cell.ix * 10, cell.ia * 10);
      res.instance_hash[pos] = graph_hash(noisy);
      // Grids are disjoint per cell, so these writes never race.
      const PipelineOutput phi = forward_phi(model, noisy);
      res.grids[0].values[pos] = accuracy(phi.predictions, noisy.labels, mask);
      for (std::size_t k = 0; k < taps.size(); ++k) {
        try {
          const PipelineOutput psi = run_psi(bundle, noisy, taps[k]);
          res.grids[k + 1].values[pos] = accuracy(psi.predictions, noisy.labels, mask);
        } catch (const std::exception& e) {
          res.grids[k + 1].failed[pos] = 1;
          cell_errors[static_cast<std::size_t>(c)] += "psi" + std::to_string(taps[k]) + ": " + e.what() + "; ";
        }
      }
    } catch (const std::exception& e) {
      for (auto& grid : res.grids) grid.failed[pos] = 1;
      cell_errors[static_cast<std::size_t>(c)] += e.what();
    }
  }
  for (std::size_t c = 0; c < cells.size(); ++c)
    if (!cell_errors[c].empty())
      res.failures.push_back("cell (" + std::to_string(cells[c].ix * 10) + "," + std::to_string(cells[c].ia * 10) +
                             "): " + cell_errors[c]);
  const std::string finished = utc_timestamp();
  for (auto& grid : res.grids) grid.meta.finished = finished;
  return res;
}

std::string grid_csv(const AccuracyGrid& grid) {
  std::string out = "n_X\\n_A";
  for (int ia = 0; ia < kGridSteps; ++ia) out += "," + std::to_string(ia * 10);
  out += "\n";
  for (int ix = 0; ix < kGridSteps; ++ix) {
    out += std::to_string(ix * 10);
    for (int ia = 0; ia < kGridSteps; ++ia) out += "," + (grid.absent(ix, ia) ? std::string("NA") : fmt6(grid.at(ix, ia)));
    out += "\n";
  }
  return out;
}

std::string grid_file_name(const AccuracyGrid& grid) {
  const auto& m = grid.meta;
  return m.arch + "_" + m.pipeline + "_" + m.x_kind + "_" + m.a_kind + "_" + m.split + ".csv";
}

nlohmann::json grid_to_json(const AccuracyGrid& grid) {
  nlohmann::json j;
  const auto& m = grid.meta;
  j["meta"] = {{"arch", m.arch},       {"pipeline", m.pipeline}, {"x_kind", m.x_kind},     {"a_kind", m.a_kind},
               {"split", m.split},     {"seed", m.seed},         {"started", m.started},   {"finished", m.finished}};
  nlohmann::json rows = nlohmann::json::array();
  nlohmann::json failed = nlohmann::json::array();
  for (int ix = 0; ix < kGridSteps; ++ix) {
    nlohmann::json row = nlohmann::json::array();
    for (int ia = 0; ia < kGridSteps; ++ia) {
      if (grid.absent(ix, ia))
        row.push_back(nullptr);
      else
        row.push_back(grid.at(ix, ia));
      if (grid.failed[static_cast<std::size_t>(ix * kGridSteps + ia)]) failed.push_back({ix * 10, ia * 10});
    }
    rows.push_back(std::move(row));
  }
  j["values"] = std::move(rows);
  j["failed"] = std::move(failed);
  return j;
}

AccuracyGrid grid_from_json(const nlohmann::json& j) {
  AccuracyGrid grid;
  try {
    const auto& m = j.at("meta");
    grid.meta.arch = m.at("arch").get<std::string>();
    grid.meta.pipeline = m.at("pipeline").get<std::string>();
    grid.meta.x_kind = m.at("x_kind").get<std::string>();
    grid.meta.a_kind = m.at("a_kind").get<std::string>();
    grid.meta.split = m.at("split").get<std::string>();
    grid.meta.seed = m.at("seed").get<std::uint64_t>();
    grid.meta.started = m.value("started", "");
    grid.meta.finished = m.value("finished", "");
    const auto& rows = j.at("values");
    if (!rows.is_array() || rows.size() != kGridSteps) throw ParseError("grid values must be 11x11");
    for (int ix = 0; ix < kGridSteps; ++ix) {
      const auto& row = rows[static_cast<std::size_t>(ix)];
      if (!row.is_array() || row.size() != kGridSteps) throw ParseError("grid values must be 11x11");
      for (int ia = 0; ia < kGridSteps; ++ia) {
        const auto& v = row[static_cast<std::size_t>(ia)];
        grid.at(ix, ia) = v.is_null() ? kAbsent : v.get<double>();
      }
    }
    if (j.contains("failed"))
      for (const auto& f : j["failed"])
        grid.failed[static_cast<std::size_t>(f.at(0).get<int>() / 10 * kGridSteps + f.at(1).get<int>() / 10)] = 1;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("grid json: ") + e.what());
  }
  return grid;
}

nlohmann::json manifest_to_json(const RunManifest& m) {
  nlohmann::json rbms = nlohmann::json::object();
  for (const auto& [tap, p] : m.rbm_checkpoints) rbms[std::to_string(tap)] = p;
  return {{"dataset", m.dataset}, {"model_checkpoint", m.model_checkpoint}, {"rbm_checkpoints", rbms},
          {"noise", m.noise},     {"seed", m.seed},                         {"version", m.version}};
}

RunManifest manifest_from_json(const nlohmann::json& j) {
  RunManifest m;
  try {
    m.dataset = j.at("dataset").get<std::string>();
    m.model_checkpoint = j.at("model_checkpoint").get<std::string>();
    for (const auto& [k, v] : j.at("rbm_checkpoints").items()) m.rbm_checkpoints[std::stoi(k)] = v.get<std::string>();
    m.noise = j.at("noise").get<std::vector<std::string>>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.version = j.value("version", m.version);
  } catch (const std::exception& e) {
    throw ParseError(std::string("manifest json: ") + e.what());
  }
  return m;
}

namespace {

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string esc(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '&':
        out += "&amp;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

// Accuracy vs n_X, one polyline per grid, at a fixed n_A column.
std::string line_chart(std::span<const AccuracyGrid* const> grids, int ia) {
  constexpr double W = 420, H = 260, L = 45, R = 110, T = 15, B = 35;
  const double pw = W - L - R, ph = H - T - B;
  auto px = [&](int ix) { return L + pw * ix / 10.0; };
  auto py = [&](double acc) { return T + ph * (1.0 - acc); };
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt6(W) + "\" height=\"" + fmt6(H) + "\">";
  s += "<rect x=\"" + fmt6(L) + "\" y=\"" + fmt6(T) + "\" width=\"" + fmt6(pw) + "\" height=\"" + fmt6(ph) +
       "\" fill=\"none\" stroke=\"#999\"/>";
  for (int k = 0; k <= 10; k += 2) {
    s += "<text x=\"" + fmt6(px(k)) + "\" y=\"" + fmt6(H - B + 15) + "\" font-size=\"10\" text-anchor=\"middle\">" +
         std::to_string(k * 10) + "</text>";
    s += "<text x=\"" + fmt6(L - 5) + "\" y=\"" + fmt6(py(k / 10.0) + 3) + "\" font-size=\"10\" text-anchor=\"end\">" +
         fmt6(k / 10.0) + "</text>";
  }
  s += "<text x=\"" + fmt6(L + pw / 2) + "\" y=\"" + fmt6(H - 4) + "\" font-size=\"11\" text-anchor=\"middle\">n_X (%)</text>";
  for (std::size_t g = 0; g < grids.size(); ++g) {
    const char* color = kPalette[g % std::size(kPalette)];
    std::string pts;
    for (int ix = 0; ix < kGridSteps; ++ix) {
      if (grids[g]->absent(ix, ia)) continue;
      pts += fmt6(px(ix)) + "," + fmt6(py(grids[g]->at(ix, ia))) + " ";
    }
    if (!pts.empty())
      s += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>";
    const double ly = T + 14.0 * static_cast<double>(g) + 8;
    s += "<line x1=\"" + fmt6(W - R + 8) + "\" y1=\"" + fmt6(ly) + "\" x2=\"" + fmt6(W - R + 24) + "\" y2=\"" + fmt6(ly) +
         "\" stroke=\"" + color + "\" stroke-width=\"2\"/>";
    s += "<text x=\"" + fmt6(W - R + 28) + "\" y=\"" + fmt6(ly + 4) + "\" font-size=\"10\">" +
         esc(grids[g]->meta.arch + " " + grids[g]->meta.pipeline) + "</text>";
  }
  return s + "</svg>";
}

std::string scatter(const EmbeddingSnapshot& snap) {
  constexpr double S = 220, pad = 8;
  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  if (snap.coords.rows() > 0) {
    xmin = ymin = std::numeric_limits<double>::infinity();
    xmax = ymax = -xmin;
    for (std::size_t i = 0; i < snap.coords.rows(); ++i) {
      xmin = std::min(xmin, snap.coords(i, 0));
      xmax = std::max(xmax, snap.coords(i, 0));
      ymin = std::min(ymin, snap.coords(i, 1));
      ymax = std::max(ymax, snap.coords(i, 1));
    }
  }
  const double sx = (S - 2 * pad) / std::max(xmax - xmin, 1e-12);
  const double sy = (S - 2 * pad) / std::max(ymax - ymin, 1e-12);
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt6(S) + "\" height=\"" + fmt6(S) +
                  "\"><rect width=\"100%\" height=\"100%\" fill=\"none\" stroke=\"#ccc\"/>";
  for (std::size_t i = 0; i < snap.coords.rows(); ++i) {
    const int lab = snap.labels[i];
    s += "<circle cx=\"" + fmt6(pad + (snap.coords(i, 0) - xmin) * sx) + "\" cy=\"" +
         fmt6(pad + (snap.coords(i, 1) - ymin) * sy) + "\" r=\"1.6\" fill=\"" +
         kPalette[static_cast<std::size_t>(std::max(lab, 0)) % std::size(kPalette)] + "\"/>";
  }
  return s + "</svg>";
}

}  // namespace

std::string render_html(std::span<const AccuracyGrid> grids, const RunManifest& manifest,
                        std::span<const EmbeddingSnapshot> snapshots) {
  std::string h = "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>Denoising report</title>"
                  "<style>body{font-family:sans-serif;margin:20px}section{margin-bottom:24px}"
                  ".row{display:flex;flex-wrap:wrap;gap:12px}figure{margin:0}figcaption{font-size:12px}</style>"
                  "</head><body>\n";
  h += "<h1>Denoising report</h1>\n<pre>" + esc(manifest_to_json(manifest).dump(2)) + "</pre>\n";

  // One page section per (A-kind, n_A); grids sharing an A-kind share a chart.
  std::map<std::string, std::vector<const AccuracyGrid*>> by_akind;
  for (const auto& g : grids) by_akind[g.meta.a_kind + " / " + g.meta.x_kind + " / " + g.meta.split].push_back(&g);
  for (const auto& [key, gs] : by_akind) {
    h += "<section><h2>" + esc(key) + "</h2><div class=\"row\">\n";
    for (int ia = 0; ia < kGridSteps; ++ia) {
      bool any = false;
      for (const auto* g : gs)
        for (int ix = 0; ix < kGridSteps; ++ix) any = any || !g->absent(ix, ia);
      if (!any) continue;
      h += "<figure>" + line_chart(gs, ia) + "<figcaption>n_A = " + std::to_string(ia * 10) + "%</figcaption></figure>\n";
    }
    h += "</div></section>\n";
  }

  if (!snapshots.empty()) {
    h += "<section><h2>Layer representations (t-SNE)</h2>\n";
    std::set<int> taps;
    for (const auto& s : snapshots) taps.insert(s.tap);
    for (int tap : taps) {
      h += "<h3>z" + std::to_string(tap) + "</h3><div class=\"row\">\n";
      for (const auto& s : snapshots) {
        if (s.tap != tap) continue;
        h += "<figure>" + scatter(s) + "<figcaption>" + esc(to_string(s.variant)) + " (" + esc(s.x_kind) + " " +
             std::to_string(s.n_x) + "%, " + esc(s.a_kind) + " " + std::to_string(s.n_a) + "%)</figcaption></figure>\n";
      }
      h += "</div>\n";
    }
    h += "</section>\n";
  }
  return h + "</body></html>\n";
}

std::vector<std::filesystem::path> export_report(std::span<const AccuracyGrid> grids, const RunManifest& manifest,
                                                 const std::filesystem::path& out_dir,
                                                 std::span<const EmbeddingSnapshot> snapshots) {
  if (grids.empty()) throw ArgumentError("nothing to export");
  std::vector<std::filesystem::path> written;
  for (const auto& g : grids) {
    written.push_back(out_dir / grid_file_name(g));
    io::write_text_atomic(written.back(), grid_csv(g));
  }
  nlohmann::json results;
  results["manifest"] = manifest_to_json(manifest);
  results["grids"] = nlohmann::json::array();
  for (const auto& g : grids) results["grids"].push_back(grid_to_json(g));
  written.push_back(out_dir / "results.json");
  io::write_text_atomic(written.back(), results.dump(2) + "\n");
  if (!snapshots.empty()) {
    written.push_back(out_dir / "snapshots.csv");
    io::write_text_atomic(written.back(), snapshots_csv(snapshots));
  }
  written.push_back(out_dir / "report.html");
  io::write_text_atomic(written.back(), render_html(grids, manifest, snapshots));
  return written;
}

LoadedResults load_results(const std::filesystem::path& results_json) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(io::read_text(results_json));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(results_json.string() + ": " + e.what());
  }
  LoadedResults out;
  if (!j.contains("manifest") || !j.contains("grids"))
    throw ParseError(results_json.string() + ": expected 'manifest' and 'grids'");
  out.manifest = manifest_from_json(j["manifest"]);
  for (const auto& g : j["grids"]) out.grids.push_back(grid_from_json(g));
  return out;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace gsr
