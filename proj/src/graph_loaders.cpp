// Readers for the published WikiCS JSON dump and the OGB node-prediction
// directory layout.

#include <zlib.h>

#include <algorithm>
#include <charconv>
#include <memory>
#include <set>
#include <string_view>

#include <json.hpp>

#include "gsr/graph.hpp"
#include "gsr/io.hpp"

namespace gsr {

namespace {

using json = nlohmann::json;

[[noreturn]] void bad_field(const std::string& source, const std::string& field, const std::string& why) {
  throw ParseError(source + ": field '" + field + "': " + why);
}

const json& require(const json& doc, const std::string& source, const std::string& field, json::value_t type) {
  auto it = doc.find(field);
  if (it == doc.end()) bad_field(source, field, "missing");
  if (it->type() != type) bad_field(source, field, std::string("expected ") + json(type).type_name());
  return *it;
}

std::vector<NodeId> mask_to_ids(const json& mask, std::size_t n, const std::string& source,
                                const std::string& field) {
  if (!mask.is_array() || mask.size() != n) bad_field(source, field, "mask length must equal node count");
  std::vector<NodeId> ids;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& m = mask[i];
    const bool on = m.is_boolean() ? m.get<bool>() : (m.is_number() ? m.get<double>() != 0.0 : false);
    if (!m.is_boolean() && !m.is_number()) bad_field(source, field, "mask entries must be boolean or 0/1");
    if (on) ids.push_back(static_cast<NodeId>(i));
  }
  return ids;
}

}  // namespace

Graph load_wikics_json(const std::filesystem::path& path) {
  const std::string source = path.string();
  json doc;
  try {
    doc = json::parse(io::read_text(path));
  } catch (const json::parse_error& e) {
    throw ParseError(source + ": " + e.what());
  }
  if (!doc.is_object()) throw ParseError(source + ": top level must be an object");

  const auto& features = require(doc, source, "features", json::value_t::array);
  const std::size_t n = features.size();
  const std::size_t d = n == 0 ? 0 : features[0].size();
  Graph g;
  g.num_nodes = n;
  g.directed = false;
  g.features = DenseMatrix(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = features[i];
    if (!row.is_array() || row.size() != d) bad_field(source, "features", "row " + std::to_string(i) + " has wrong width");
    for (std::size_t j = 0; j < d; ++j) {
      if (!row[j].is_number()) bad_field(source, "features", "non-numeric entry in row " + std::to_string(i));
      g.features(i, j) = row[j].get<double>();
    }
  }

  const auto& labels = require(doc, source, "labels", json::value_t::array);
  if (labels.size() != n) bad_field(source, "labels", "length must equal node count");
  int max_label = -1;
  g.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!labels[i].is_number_integer()) bad_field(source, "labels", "non-integer label at " + std::to_string(i));
    g.labels[i] = labels[i].get<int>();
    if (g.labels[i] < 0) bad_field(source, "labels", "negative label at " + std::to_string(i));
    max_label = std::max(max_label, g.labels[i]);
  }
  g.num_classes = max_label + 1;

  // Hyperlinks are stored in both directions; keep each undirected pair once.
  const auto& links = require(doc, source, "links", json::value_t::array);
  if (links.size() != n) bad_field(source, "links", "must hold one adjacency list per node");
  std::set<std::pair<NodeId, NodeId>> pairs;
  for (std::size_t u = 0; u < n; ++u) {
    if (!links[u].is_array()) bad_field(source, "links", "entry " + std::to_string(u) + " is not a list");
    for (const auto& t : links[u]) {
      if (!t.is_number_integer()) bad_field(source, "links", "non-integer neighbor of node " + std::to_string(u));
      const auto v = t.get<long long>();
      if (v < 0 || static_cast<std::size_t>(v) >= n)
        bad_field(source, "links", "neighbor " + std::to_string(v) + " out of range");
      const auto a = static_cast<NodeId>(std::min<long long>(static_cast<long long>(u), v));
      const auto b = static_cast<NodeId>(std::max<long long>(static_cast<long long>(u), v));
      pairs.emplace(a, b);
    }
  }
  std::vector<Edge> edges;
  edges.reserve(pairs.size());
  for (const auto& [a, b] : pairs) edges.push_back({a, b});
  g.set_edges(edges);

  // First split only; every node outside its val/test masks joins train.
  const auto& val_masks = require(doc, source, "val_masks", json::value_t::array);
  if (val_masks.empty()) bad_field(source, "val_masks", "no splits present");
  const auto& test_mask = require(doc, source, "test_mask", json::value_t::array);
  g.split.val = mask_to_ids(val_masks[0], n, source, "val_masks[0]");
  g.split.test = mask_to_ids(test_mask, n, source, "test_mask");
  if (doc.contains("train_masks")) {
    const auto& tm = doc["train_masks"];
    if (!tm.is_array() || tm.empty()) bad_field(source, "train_masks", "no splits present");
    (void)mask_to_ids(tm[0], n, source, "train_masks[0]");
  }
  std::vector<std::uint8_t> taken(n, 0);
  for (auto v : g.split.val) taken[v] = 1;
  for (auto v : g.split.test) {
    if (taken[v]) throw IntegrityError(source + ": split masks overlap at node " + std::to_string(v));
    taken[v] = 1;
  }
  for (std::size_t i = 0; i < n; ++i)
    if (!taken[i]) g.split.train.push_back(static_cast<NodeId>(i));
  return g;
}

namespace {

// Line reader over a plain or gzip-compressed text file.
class GzLines {
 public:
  explicit GzLines(const std::filesystem::path& path) : path_(path) {
    file_ = gzopen(path.c_str(), "rb");
    if (file_ == nullptr) throw IoError("cannot open " + path.string());
    buf_.resize(1 << 16);
  }
  ~GzLines() {
    if (file_ != nullptr) gzclose(file_);
  }
  GzLines(const GzLines&) = delete;
  GzLines& operator=(const GzLines&) = delete;

  bool next(std::string& line) {
    line.clear();
    while (true) {
      if (gzgets(file_, buf_.data(), static_cast<int>(buf_.size())) == nullptr) return !line.empty();
      line += buf_.data();
      if (!line.empty() && line.back() == '\n') {
        line.pop_back();
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return true;
      }
    }
  }

 private:
  std::filesystem::path path_;
  gzFile file_ = nullptr;
  std::vector<char> buf_;
};

std::filesystem::path find_csv(const std::filesystem::path& dir, const std::string& stem) {
  for (const auto* ext : {".csv.gz", ".csv"}) {
    auto p = dir / (stem + ext);
    if (std::filesystem::exists(p)) return p;
  }
  throw IoError("missing " + (dir / (stem + ".csv[.gz]")).string());
}

template <typename T>
std::vector<T> parse_row(std::string_view line, const std::string& source, std::size_t lineno) {
  std::vector<T> out;
  while (!line.empty()) {
    auto comma = line.find(',');
    auto tok = line.substr(0, comma);
    while (!tok.empty() && tok.front() == ' ') tok.remove_prefix(1);
    T v{};
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size())
      throw ParseError(source + ":" + std::to_string(lineno) + ": malformed value '" + std::string(tok) + "'");
    out.push_back(v);
    if (comma == std::string_view::npos) break;
    line.remove_prefix(comma + 1);
  }
  return out;
}

std::vector<NodeId> read_index_file(const std::filesystem::path& path, std::size_t n) {
  GzLines lines(path);
  std::string line;
  std::size_t lineno = 0;
  std::vector<NodeId> ids;
  while (lines.next(line)) {
    ++lineno;
    if (line.empty()) continue;
    auto row = parse_row<long long>(line, path.string(), lineno);
    if (row.size() != 1 || row[0] < 0 || static_cast<std::size_t>(row[0]) >= n)
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": bad node index");
    ids.push_back(static_cast<NodeId>(row[0]));
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

}  // namespace

Graph load_ogb_dir(const std::filesystem::path& root) {
  auto raw = root / "raw";
  if (!std::filesystem::exists(raw)) raw = root;
  auto split_dir = root / "split" / "time";
  if (!std::filesystem::exists(split_dir)) split_dir = root / "split";

  Graph g;
  g.directed = true;
  {
    const auto path = find_csv(raw, "node-feat");
    GzLines lines(path);
    std::string line;
    std::size_t lineno = 0;
    std::vector<double> values;
    std::size_t d = 0;
    while (lines.next(line)) {
      ++lineno;
      if (line.empty()) continue;
      auto row = parse_row<double>(line, path.string(), lineno);
      if (d == 0) d = row.size();
      if (row.size() != d) throw ParseError(path.string() + ":" + std::to_string(lineno) + ": field 'node-feat' ragged row");
      values.insert(values.end(), row.begin(), row.end());
      ++g.num_nodes;
    }
    g.features = DenseMatrix(g.num_nodes, d, std::move(values));
  }
  {
    const auto path = find_csv(raw, "node-label");
    GzLines lines(path);
    std::string line;
    std::size_t lineno = 0;
    int max_label = -1;
    while (lines.next(line)) {
      ++lineno;
      if (line.empty()) continue;
      auto row = parse_row<int>(line, path.string(), lineno);
      if (row.size() != 1 || row[0] < 0)
        throw ParseError(path.string() + ":" + std::to_string(lineno) + ": field 'node-label' invalid");
      g.labels.push_back(row[0]);
      max_label = std::max(max_label, row[0]);
    }
    if (g.labels.size() != g.num_nodes)
      throw ParseError(path.string() + ": field 'node-label' count differs from node-feat rows");
    g.num_classes = max_label + 1;
  }
  {
    const auto path = find_csv(raw, "edge");
    GzLines lines(path);
    std::string line;
    std::size_t lineno = 0;
    std::vector<Edge> edges;
    while (lines.next(line)) {
      ++lineno;
      if (line.empty()) continue;
      auto row = parse_row<long long>(line, path.string(), lineno);
      if (row.size() != 2 || row[0] < 0 || row[1] < 0 || static_cast<std::size_t>(row[0]) >= g.num_nodes ||
          static_cast<std::size_t>(row[1]) >= g.num_nodes)
        throw ParseError(path.string() + ":" + std::to_string(lineno) + ": field 'edge' invalid");
      edges.push_back({static_cast<NodeId>(row[0]), static_cast<NodeId>(row[1])});
    }
    g.set_edges(edges);
  }
  g.split.train = read_index_file(find_csv(split_dir, "train"), g.num_nodes);
  g.split.val = read_index_file(find_csv(split_dir, "valid"), g.num_nodes);
  g.split.test = read_index_file(find_csv(split_dir, "test"), g.num_nodes);
  return g;
}

}  // namespace gsr
