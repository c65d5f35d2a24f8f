#include "gsr/pipeline.hpp"

#include <algorithm>
#include <sstream>

#include <json.hpp>

#include "gsr/io.hpp"
#include "gsr/metrics.hpp"

namespace gsr {

void check_tap(int tap) {
  if (tap < 0 || tap >= kNumTaps) throw ArgumentError("tap index " + std::to_string(tap) + " outside {0,1,2,3}");
}

std::size_t tap_width(const DnnModel& model, int tap) {
  check_tap(tap);
  switch (tap) {
    case 0:
      return model.input_dim;
    case 3:
      return model.num_classes;
    default:
      return model.hidden_dim;
  }
}

std::vector<int> parse_taps(const std::string& csv) {
  std::vector<int> taps;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    int t = 0;
    try {
      std::size_t used = 0;
      t = std::stoi(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ArgumentError("bad tap '" + tok + "'");
    }
    check_tap(t);
    if (std::find(taps.begin(), taps.end(), t) == taps.end()) taps.push_back(t);
  }
  std::sort(taps.begin(), taps.end());
  return taps;
}

PsiBundle::PsiBundle(DnnModel model, std::map<int, RbmEntry> rbms, ReconstructOptions recon)
    : model_(std::move(model)), rbms_(std::move(rbms)), recon_(recon) {
  model_.validate();
  if (recon_.gibbs_rounds < 1) throw ArgumentError("PsiBundle: gibbs_rounds must be >= 1");
  for (const auto& [tap, entry] : rbms_) {
    check_tap(tap);
    entry.rbm.validate();
    const std::size_t want = tap_width(model_, tap);
    if (entry.rbm.num_visible() != want || entry.scaler.dims() != want)
      throw DimensionError("PsiBundle: RBM-z" + std::to_string(tap) + " has " +
                           std::to_string(entry.rbm.num_visible()) + " visible units but the tap is " +
                           std::to_string(want) + " wide");
  }
}

const RbmEntry& PsiBundle::rbm(int tap) const {
  auto it = rbms_.find(tap);
  if (it == rbms_.end()) throw ConfigError("no RBM trained for tap " + std::to_string(tap));
  return it->second;
}

std::vector<int> PsiBundle::taps() const {
  std::vector<int> out;
  for (const auto& [tap, _] : rbms_) out.push_back(tap);
  return out;
}

PipelineOutput forward_phi(const DnnModel& model, const Graph& g) {
  const Propagation prop = make_propagation(model.arch, g);
  PipelineOutput out;
  out.taps = forward_infer(model, model_input(model, g), prop);
  out.predictions = argmax_rows(out.taps.z3);
  return out;
}

DenseMatrix extract_representations(const DnnModel& model, const Graph& g, int tap, std::span<const NodeId> rows) {
  check_tap(tap);
  const DenseMatrix z0 = model_input(model, g);
  const std::vector<std::size_t> idx(rows.begin(), rows.end());
  if (tap == 0) return z0.select_rows(idx);
  const Taps taps = forward_infer(model, z0, make_propagation(model.arch, g));
  return taps.at(tap).select_rows(idx);
}

PipelineOutput run_psi_with(const DnnModel& model, const Graph& g_noisy, int tap, std::span<const NodeId> denoise_rows,
                            const Reconstructor& reconstructor) {
  check_tap(tap);
  const Propagation prop = make_propagation(model.arch, g_noisy);
  Taps prefix;
  prefix.z0 = model_input(model, g_noisy);
  if (tap > 0) prefix = forward_from_tap(model, 0, prefix.z0, prop);

  DenseMatrix z = prefix.at(tap);
  const std::vector<std::size_t> idx(denoise_rows.begin(), denoise_rows.end());
  if (!idx.empty()) {
    const DenseMatrix cleaned = reconstructor(tap, z.select_rows(idx));
    if (cleaned.rows() != idx.size() || cleaned.cols() != z.cols())
      throw DimensionError("reconstruction changed the representation shape at tap " + std::to_string(tap));
    for (std::size_t i = 0; i < idx.size(); ++i) std::copy(cleaned.row(i).begin(), cleaned.row(i).end(), z.row(idx[i]).begin());
  }
  PipelineOutput out;
  out.taps = forward_from_tap(model, tap, std::move(z), prop, std::move(prefix));
  out.predictions = argmax_rows(out.taps.z3);
  return out;
}

PipelineOutput run_psi(const PsiBundle& bundle, const Graph& g_noisy, int tap, std::span<const NodeId> denoise_rows) {
  const RbmEntry& entry = bundle.rbm(tap);
  const ReconstructOptions& recon = bundle.recon();
  return run_psi_with(bundle.model(), g_noisy, tap, denoise_rows, [&](int, const DenseMatrix& rows) {
    return reconstruct(entry.rbm, entry.scaler, rows, recon);
  });
}

std::vector<NodeId> non_train_nodes(const Graph& g) {
  std::vector<NodeId> rows = g.split.val;
  rows.insert(rows.end(), g.split.test.begin(), g.split.test.end());
  std::sort(rows.begin(), rows.end());
  return rows;
}

PipelineOutput run_psi(const PsiBundle& bundle, const Graph& g_noisy, int tap) {
  return run_psi(bundle, g_noisy, tap, non_train_nodes(g_noisy));
}

PsiBundle train_psi_bundle(DnnModel model, const Graph& clean, std::span<const int> taps, const RbmTrainConfig& cfg,
                           ReconstructOptions recon) {
  const DenseMatrix z0 = model_input(model, clean);
  const Taps all = forward_infer(model, z0, make_propagation(model.arch, clean));
  const std::vector<std::size_t> train(clean.split.train.begin(), clean.split.train.end());
  std::map<int, RbmEntry> rbms;
  for (int tap : taps) {
    check_tap(tap);
    RbmTrainConfig tap_cfg = cfg;
    tap_cfg.seed = derive_seed(cfg.seed, {static_cast<std::uint64_t>(tap)});
    RbmTrainResult res = train_rbm(all.at(tap).select_rows(train), tap_cfg);
    rbms.emplace(tap, RbmEntry{std::move(res.rbm), std::move(res.scaler), tap_cfg});
  }
  return PsiBundle(std::move(model), std::move(rbms), recon);
}

void save_bundle_manifest(const BundleManifest& m, const std::filesystem::path& path) {
  nlohmann::json j;
  j["model"] = m.model.string();
  j["rbms"] = nlohmann::json::object();
  for (const auto& [tap, p] : m.rbms) j["rbms"][std::to_string(tap)] = p.string();
  j["gibbs_rounds"] = m.gibbs_rounds;
  io::write_text_atomic(path, j.dump(2) + "\n");
}

BundleManifest load_bundle_manifest(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(io::read_text(path));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  BundleManifest m;
  auto need = [&](const char* key) -> const nlohmann::json& {
    if (!j.contains(key)) throw ParseError(path.string() + ": field '" + key + "': missing");
    return j[key];
  };
  const auto& model = need("model");
  if (!model.is_string()) throw ParseError(path.string() + ": field 'model': expected string");
  // Relative artifact paths resolve against the manifest's directory.
  auto resolve = [&](const std::string& p) {
    std::filesystem::path fp(p);
    return fp.is_absolute() ? fp : path.parent_path() / fp;
  };
  m.model = resolve(model.get<std::string>());
  const auto& rbms = need("rbms");
  if (!rbms.is_object()) throw ParseError(path.string() + ": field 'rbms': expected object");
  for (const auto& [k, v] : rbms.items()) {
    if (!v.is_string()) throw ParseError(path.string() + ": field 'rbms." + k + "': expected string");
    int tap = -1;
    try {
      tap = std::stoi(k);
    } catch (const std::exception&) {
      throw ParseError(path.string() + ": field 'rbms': bad tap key '" + k + "'");
    }
    check_tap(tap);
    m.rbms[tap] = resolve(v.get<std::string>());
  }
  if (j.contains("gibbs_rounds")) {
    if (!j["gibbs_rounds"].is_number_unsigned()) throw ParseError(path.string() + ": field 'gibbs_rounds': expected count");
    m.gibbs_rounds = j["gibbs_rounds"].get<std::size_t>();
  }
  return m;
}

PsiBundle load_bundle(const std::filesystem::path& manifest_path) {
  const BundleManifest m = load_bundle_manifest(manifest_path);
  DnnModel model = load_model(m.model);
  std::map<int, RbmEntry> rbms;
  for (const auto& [tap, p] : m.rbms) {
    RbmCheckpoint c = load_rbm(p);
    rbms.emplace(tap, RbmEntry{std::move(c.rbm), std::move(c.scaler), c.config});
  }
  ReconstructOptions recon;
  recon.gibbs_rounds = m.gibbs_rounds;
  return PsiBundle(std::move(model), std::move(rbms), recon);
}

}  // namespace gsr
