#include "glns/selector.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <tuple>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "glns/spatial.hpp"

namespace glns {

// ---------------------------------------------------------------------------
// Graph

int SparseGraph::find_edge(int source, int target) const {
  // Edges are sorted by (source, target).
  std::size_t lo = 0, hi = edge_source.size();
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (std::tie(edge_source[mid], edge_target[mid]) < std::tie(source, target)) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  if (lo < edge_source.size() && edge_source[lo] == source && edge_target[lo] == target) return static_cast<int>(lo);
  return -1;
}

namespace {

int kind_priority(EdgeKind kind) {
  switch (kind) {
    case EdgeKind::SelfLoop: return 0;
    case EdgeKind::SolutionEdge: return 1;
    case EdgeKind::KnnNeighbor: return 2;
  }
  return 3;
}

}  // namespace

SparseGraph build_graph(const Instance& instance, const Solution& s0, const GraphOptions& options) {
  const int n = instance.customers();
  SparseGraph g;
  if (n <= options.max_customers) {
    g.node_ids.resize(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) g.node_ids[static_cast<std::size_t>(i)] = i;
  } else {
    // Ordering by (distance, index) puts the depot first even when customers share its location.
    g.node_ids = nearest_to(instance.points(), instance.point(0), options.max_customers + 1);
  }
  const int m = g.node_count();

  std::vector<int> local(static_cast<std::size_t>(n) + 1, -1);
  std::vector<Point> pts(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    local[static_cast<std::size_t>(g.node_ids[static_cast<std::size_t>(i)])] = i;
    pts[static_cast<std::size_t>(i)] = instance.point(g.node_ids[static_cast<std::size_t>(i)]);
  }

  double min_x = pts[0].x, max_x = pts[0].x, min_y = pts[0].y, max_y = pts[0].y;
  for (const auto& p : pts) {
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  const double extent = std::max(max_x - min_x, max_y - min_y);
  const double scale = extent > 0 ? extent : 1.0;
  g.node_features.resize(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    const int id = g.node_ids[static_cast<std::size_t>(i)];
    const auto& p = pts[static_cast<std::size_t>(i)];
    const double q = id == 0 ? 0.0 : static_cast<double>(instance.demand(id)) / instance.capacity();
    g.node_features[static_cast<std::size_t>(i)] = {(p.x - min_x) / scale, (p.y - min_y) / scale, q};
  }

  struct Raw {
    int s, t;
    EdgeKind kind;
  };
  std::vector<Raw> raw;
  for (int i = 0; i < m; ++i) raw.push_back({i, i, EdgeKind::SelfLoop});
  if (options.include_knn && options.k > 0) {
    const auto knn = k_nearest(pts, options.k);
    for (int i = 0; i < m; ++i) {
      for (int j : knn[static_cast<std::size_t>(i)]) raw.push_back({i, j, EdgeKind::KnnNeighbor});
    }
  }
  std::vector<std::pair<int, int>> s0_pairs;
  for (const auto& [a, b] : solution_edges(s0)) {
    const int la = local[static_cast<std::size_t>(a)], lb = local[static_cast<std::size_t>(b)];
    if (la < 0 || lb < 0 || la == lb) continue;
    raw.push_back({la, lb, EdgeKind::SolutionEdge});
    raw.push_back({lb, la, EdgeKind::SolutionEdge});
    s0_pairs.emplace_back(la, lb);
    s0_pairs.emplace_back(lb, la);
  }
  std::sort(raw.begin(), raw.end(), [](const Raw& x, const Raw& y) {
    return std::make_tuple(x.s, x.t, kind_priority(x.kind)) < std::make_tuple(y.s, y.t, kind_priority(y.kind));
  });
  raw.erase(std::unique(raw.begin(), raw.end(), [](const Raw& x, const Raw& y) { return x.s == y.s && x.t == y.t; }),
            raw.end());

  const std::size_t e = raw.size();
  g.edge_source.resize(e);
  g.edge_target.resize(e);
  g.edge_kind.resize(e);
  g.edge_distance.resize(e);
  g.s0_edge_mask.assign(e, 0);
  Cost max_d = 0;
  std::vector<Cost> d(e);
  for (std::size_t i = 0; i < e; ++i) {
    g.edge_source[i] = raw[i].s;
    g.edge_target[i] = raw[i].t;
    g.edge_kind[i] = raw[i].kind;
    d[i] = rounded_distance(pts[static_cast<std::size_t>(raw[i].s)], pts[static_cast<std::size_t>(raw[i].t)]);
    max_d = std::max(max_d, d[i]);
  }
  for (std::size_t i = 0; i < e; ++i) {
    g.edge_distance[i] = max_d > 0 ? static_cast<double>(d[i]) / static_cast<double>(max_d) : 0.0;
  }
  for (const auto& [a, b] : s0_pairs) g.s0_edge_mask[static_cast<std::size_t>(g.find_edge(a, b))] = 1;
  return g;
}

std::string graph_to_json(const SparseGraph& graph, const std::vector<double>* probabilities) {
  nlohmann::json j;
  j["node_ids"] = graph.node_ids;
  j["node_features"] = graph.node_features;
  std::vector<int> kinds(graph.edge_count());
  for (std::size_t e = 0; e < graph.edge_count(); ++e) kinds[e] = static_cast<int>(graph.edge_kind[e]);
  auto& edges = j["edges"];
  edges["source"] = graph.edge_source;
  edges["target"] = graph.edge_target;
  edges["distance"] = graph.edge_distance;
  edges["kind"] = kinds;
  edges["s0"] = graph.s0_edge_mask;
  if (probabilities) edges["probability"] = *probabilities;
  return j.dump();
}

// ---------------------------------------------------------------------------
// Model layout

namespace {

struct TensorRef {
  std::string name;
  Eigen::MatrixXd* matrix = nullptr;
  Eigen::VectorXd* vector = nullptr;

  std::vector<std::uint32_t> dims() const {
    if (vector) return {static_cast<std::uint32_t>(vector->size())};
    return {static_cast<std::uint32_t>(matrix->rows()), static_cast<std::uint32_t>(matrix->cols())};
  }
};

void shape(Linear& lin, int out, int in) {
  lin.weight = Eigen::MatrixXd::Zero(out, in);
  lin.bias = Eigen::VectorXd::Zero(out);
}

void shape(BatchNorm& bn, int h) {
  bn.gamma = Eigen::VectorXd::Ones(h);
  bn.beta = Eigen::VectorXd::Zero(h);
  bn.running_mean = Eigen::VectorXd::Zero(h);
  bn.running_var = Eigen::VectorXd::Ones(h);
}

// Allocates every tensor at the shape implied by the header fields.
void allocate(SelectorModel& m) {
  const int h = m.hidden;
  shape(m.node_embed, h, 3);
  shape(m.dist_embed, h / 2, 1);
  m.kind_embed = Eigen::MatrixXd::Zero(kEdgeKinds, h / 2);
  m.conv.assign(static_cast<std::size_t>(m.layers), {});
  for (auto& layer : m.conv) {
    for (auto& w : layer.w) shape(w, h, h);
    shape(layer.node_bn, h);
    shape(layer.edge_bn, h);
  }
  m.mlp.assign(static_cast<std::size_t>(m.mlp_layers), {});
  for (int i = 0; i < m.mlp_layers; ++i) shape(m.mlp[static_cast<std::size_t>(i)], i + 1 == m.mlp_layers ? 1 : h, h);
}

void add_linear(std::vector<TensorRef>& out, const std::string& prefix, Linear& lin) {
  out.push_back({prefix + ".weight", &lin.weight, nullptr});
  out.push_back({prefix + ".bias", nullptr, &lin.bias});
}

void add_bn(std::vector<TensorRef>& out, const std::string& prefix, BatchNorm& bn) {
  out.push_back({prefix + ".weight", nullptr, &bn.gamma});
  out.push_back({prefix + ".bias", nullptr, &bn.beta});
  out.push_back({prefix + ".running_mean", nullptr, &bn.running_mean});
  out.push_back({prefix + ".running_var", nullptr, &bn.running_var});
}

std::vector<TensorRef> tensor_table(SelectorModel& m) {
  std::vector<TensorRef> out;
  add_linear(out, "node_embed", m.node_embed);
  add_linear(out, "dist_embed", m.dist_embed);
  out.push_back({"kind_embed.weight", &m.kind_embed, nullptr});
  for (std::size_t l = 0; l < m.conv.size(); ++l) {
    auto& layer = m.conv[l];
    for (std::size_t w = 0; w < layer.w.size(); ++w) {
      add_linear(out, fmt::format("layers.{}.W{}", l, w + 1), layer.w[w]);
    }
    add_bn(out, fmt::format("layers.{}.bn_node", l), layer.node_bn);
    add_bn(out, fmt::format("layers.{}.bn_edge", l), layer.edge_bn);
  }
  for (std::size_t i = 0; i < m.mlp.size(); ++i) add_linear(out, fmt::format("mlp.{}", i), m.mlp[i]);
  return out;
}

void check_header(int layers, int hidden, int mlp_layers, double eps) {
  if (layers < 1) throw ModelError(fmt::format("layer count must be positive, got {}", layers));
  if (hidden < 2 || hidden % 2 != 0) throw ModelError(fmt::format("hidden width must be even and >= 2, got {}", hidden));
  if (mlp_layers < 1) throw ModelError(fmt::format("mlp layer count must be positive, got {}", mlp_layers));
  if (!(eps > 0) || !std::isfinite(eps)) throw ModelError(fmt::format("eps must be positive and finite, got {}", eps));
}

}  // namespace

std::vector<std::string> tensor_names(const SelectorModel& model) {
  std::vector<std::string> names;
  for (const auto& t : tensor_table(const_cast<SelectorModel&>(model))) names.push_back(t.name);
  return names;
}

void SelectorModel::check() const {
  check_header(layers, hidden, mlp_layers, eps);
  SelectorModel expected;
  expected.layers = layers;
  expected.hidden = hidden;
  expected.mlp_layers = mlp_layers;
  if (conv.size() != static_cast<std::size_t>(layers) || mlp.size() != static_cast<std::size_t>(mlp_layers)) {
    throw ModelError("layer lists disagree with the declared counts");
  }
  allocate(expected);
  const auto want = tensor_table(expected);
  const auto have = tensor_table(const_cast<SelectorModel&>(*this));
  for (std::size_t i = 0; i < want.size(); ++i) {
    if (want[i].dims() != have[i].dims()) throw ModelError(fmt::format("tensor {}: shape mismatch", have[i].name));
    const double* data = have[i].vector ? have[i].vector->data() : have[i].matrix->data();
    const auto size = have[i].vector ? have[i].vector->size() : have[i].matrix->size();
    for (Eigen::Index k = 0; k < size; ++k) {
      if (!std::isfinite(data[k])) throw ModelError(fmt::format("tensor {}: non-finite value", have[i].name));
    }
    if (have[i].name.ends_with("running_var")) {
      for (Eigen::Index k = 0; k < size; ++k) {
        if (!(data[k] > 0)) throw ModelError(fmt::format("tensor {}: running variance must be positive", have[i].name));
      }
    }
  }
}

SelectorModel random_model(int layers, int hidden, int mlp_layers, std::uint32_t seed, double scale) {
  check_header(layers, hidden, mlp_layers, 1e-2);
  SelectorModel m;
  m.layers = layers;
  m.hidden = hidden;
  m.mlp_layers = mlp_layers;
  allocate(m);
  std::mt19937 rng(seed);
  auto draw = [&](double lo, double hi) {
    return static_cast<double>(static_cast<float>(std::uniform_real_distribution<double>(lo, hi)(rng)));
  };
  for (auto& t : tensor_table(m)) {
    double* data = t.vector ? t.vector->data() : t.matrix->data();
    const auto size = t.vector ? t.vector->size() : t.matrix->size();
    const auto fan_in = t.matrix ? t.matrix->cols() : 1;
    const double bound = scale / std::sqrt(static_cast<double>(fan_in));
    for (Eigen::Index k = 0; k < size; ++k) {
      if (t.name.ends_with("running_var")) {
        data[k] = draw(0.5, 1.5);
      } else if (t.name.ends_with("running_mean")) {
        data[k] = draw(-0.1, 0.1);
      } else if (t.name.find(".bn_") != std::string::npos && t.name.ends_with(".weight")) {
        data[k] = draw(0.5, 1.5);
      } else {
        data[k] = draw(-bound, bound);
      }
    }
  }
  return m;
}

// ---------------------------------------------------------------------------
// Weight container

namespace {

constexpr char kMagic[6] = {'G', 'N', 'N', 'W', '1', '\0'};
constexpr std::uint32_t kMaxName = 4096;

void put_u32(std::ostream& out, std::uint32_t v) {
  const char bytes[4] = {static_cast<char>(v & 0xffu), static_cast<char>((v >> 8) & 0xffu),
                         static_cast<char>((v >> 16) & 0xffu), static_cast<char>((v >> 24) & 0xffu)};
  out.write(bytes, 4);
}

void put_f32(std::ostream& out, double v) { put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v))); }

// Returns false on a clean end of file before the first byte.
bool get_u32(std::istream& in, std::uint32_t& v, const std::string& what) {
  unsigned char bytes[4];
  in.read(reinterpret_cast<char*>(bytes), 4);
  if (in.gcount() == 0 && in.eof()) return false;
  if (in.gcount() != 4) throw ModelError(fmt::format("truncated weight file while reading {}", what));
  v = static_cast<std::uint32_t>(bytes[0]) | static_cast<std::uint32_t>(bytes[1]) << 8 |
      static_cast<std::uint32_t>(bytes[2]) << 16 | static_cast<std::uint32_t>(bytes[3]) << 24;
  return true;
}

std::uint32_t need_u32(std::istream& in, const std::string& what) {
  std::uint32_t v = 0;
  if (!get_u32(in, v, what)) throw ModelError(fmt::format("truncated weight file while reading {}", what));
  return v;
}

}  // namespace

void save_weights(const SelectorModel& model, std::ostream& out) {
  model.check();
  out.write(kMagic, sizeof kMagic);
  put_u32(out, static_cast<std::uint32_t>(model.layers));
  put_u32(out, static_cast<std::uint32_t>(model.hidden));
  put_u32(out, static_cast<std::uint32_t>(model.mlp_layers));
  put_f32(out, model.eps);
  for (const auto& t : tensor_table(const_cast<SelectorModel&>(model))) {
    put_u32(out, static_cast<std::uint32_t>(t.name.size()));
    out.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
    const auto dims = t.dims();
    put_u32(out, static_cast<std::uint32_t>(dims.size()));
    for (auto d : dims) put_u32(out, d);
    if (t.vector) {
      for (Eigen::Index i = 0; i < t.vector->size(); ++i) put_f32(out, (*t.vector)(i));
    } else {
      for (Eigen::Index r = 0; r < t.matrix->rows(); ++r) {
        for (Eigen::Index c = 0; c < t.matrix->cols(); ++c) put_f32(out, (*t.matrix)(r, c));
      }
    }
  }
  if (!out) throw ModelError("failed to write weight file");
}

void save_weights(const SelectorModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ModelError(fmt::format("cannot open {} for writing", path.string()));
  save_weights(model, out);
}

SelectorModel load_weights(std::istream& in) {
  char magic[sizeof kMagic];
  in.read(magic, sizeof magic);
  if (in.gcount() != static_cast<std::streamsize>(sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0) {
    throw ModelError("bad magic: not a GNNW1 weight file");
  }
  SelectorModel m;
  m.layers = static_cast<int>(need_u32(in, "header"));
  m.hidden = static_cast<int>(need_u32(in, "header"));
  m.mlp_layers = static_cast<int>(need_u32(in, "header"));
  m.eps = static_cast<double>(std::bit_cast<float>(need_u32(in, "header")));
  if (m.layers > 1000 || m.hidden > 100000 || m.mlp_layers > 1000) throw ModelError("implausible header dimensions");
  check_header(m.layers, m.hidden, m.mlp_layers, m.eps);
  allocate(m);

  auto table = tensor_table(m);
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < table.size(); ++i) index.emplace(table[i].name, i);
  std::vector<char> seen(table.size(), 0);

  for (;;) {
    std::uint32_t name_len = 0;
    if (!get_u32(in, name_len, "tensor name length")) break;
    if (name_len == 0 || name_len > kMaxName) throw ModelError(fmt::format("invalid tensor name length {}", name_len));
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    if (in.gcount() != static_cast<std::streamsize>(name_len)) throw ModelError("truncated weight file in tensor name");
    const auto it = index.find(name);
    if (it == index.end()) throw ModelError(fmt::format("tensor {}: unexpected tensor", name));
    if (seen[it->second]) throw ModelError(fmt::format("tensor {}: duplicate tensor", name));
    seen[it->second] = 1;
    auto& ref = table[it->second];

    const std::uint32_t rank = need_u32(in, "tensor " + name);
    if (rank > 8) throw ModelError(fmt::format("tensor {}: invalid rank {}", name, rank));
    std::vector<std::uint32_t> dims(rank);
    for (auto& d : dims) d = need_u32(in, "tensor " + name);
    if (dims != ref.dims()) {
      std::string want, got;
      for (auto d : ref.dims()) want += fmt::format("[{}]", d);
      for (auto d : dims) got += fmt::format("[{}]", d);
      throw ModelError(fmt::format("tensor {}: shape mismatch, expected {} got {}", name, want, got));
    }
    auto value = [&] {
      const double v = static_cast<double>(std::bit_cast<float>(need_u32(in, "tensor " + name)));
      if (!std::isfinite(v)) throw ModelError(fmt::format("tensor {}: non-finite value", name));
      return v;
    };
    if (ref.vector) {
      for (Eigen::Index i = 0; i < ref.vector->size(); ++i) (*ref.vector)(i) = value();
    } else {
      for (Eigen::Index r = 0; r < ref.matrix->rows(); ++r) {
        for (Eigen::Index c = 0; c < ref.matrix->cols(); ++c) (*ref.matrix)(r, c) = value();
      }
    }
  }
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (!seen[i]) throw ModelError(fmt::format("tensor {}: missing", table[i].name));
  }
  m.check();
  return m;
}

SelectorModel load_weights(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelError(fmt::format("cannot open weight file {}", path.string()));
  return load_weights(in);
}

// ---------------------------------------------------------------------------
// Inference

double open_unit(double p) noexcept {
  constexpr double lo = std::numeric_limits<double>::denorm_min();
  const double hi = std::nextafter(1.0, 0.0);
  return std::clamp(p, lo, hi);
}

namespace {

double logistic(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double ez = std::exp(z);
  return ez / (1.0 + ez);
}

void check_graph(const SparseGraph& g) {
  const std::size_t n = g.node_ids.size();
  const std::size_t e = g.edge_source.size();
  if (n == 0) throw ModelError("graph has no nodes");
  if (g.node_features.size() != n) throw ModelError("graph node feature rows disagree with node count");
  if (g.edge_target.size() != e || g.edge_distance.size() != e || g.edge_kind.size() != e ||
      g.s0_edge_mask.size() != e) {
    throw ModelError("graph edge arrays have different lengths");
  }
  for (std::size_t i = 0; i < e; ++i) {
    if (g.edge_source[i] < 0 || static_cast<std::size_t>(g.edge_source[i]) >= n || g.edge_target[i] < 0 ||
        static_cast<std::size_t>(g.edge_target[i]) >= n) {
      throw ModelError(fmt::format("edge {} references a node outside the graph", i));
    }
    if (static_cast<int>(g.edge_kind[i]) >= kEdgeKinds) throw ModelError(fmt::format("edge {} has an unknown kind", i));
  }
}

// In place on an h x count matrix (one column per node or edge).
void batch_norm(Eigen::MatrixXd& m, const BatchNorm& bn) {
  const Eigen::ArrayXd scale = bn.gamma.array() / (bn.running_var.array() + kBatchNormEps).sqrt();
  const Eigen::ArrayXd shift = bn.beta.array() - bn.running_mean.array() * scale;
  m = (m.array().colwise() * scale).colwise() + shift;
}

Eigen::MatrixXd apply(const Linear& lin, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd out = lin.weight * x;
  out.colwise() += lin.bias;
  return out;
}

}  // namespace

Eigen::MatrixXd edge_gates(const Eigen::MatrixXd& edge_embeddings, const SparseGraph& graph, double eps) {
  const Eigen::MatrixXd sig = edge_embeddings.unaryExpr([](double z) { return logistic(z); });
  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(sig.rows(), graph.node_count());
  for (std::size_t e = 0; e < graph.edge_count(); ++e) sums.col(graph.edge_source[e]) += sig.col(static_cast<Eigen::Index>(e));
  Eigen::MatrixXd eta(sig.rows(), sig.cols());
  for (std::size_t e = 0; e < graph.edge_count(); ++e) {
    const auto col = static_cast<Eigen::Index>(e);
    eta.col(col) = sig.col(col).array() / (sums.col(graph.edge_source[e]).array() + eps);
  }
  return eta;
}

ForwardResult forward_detailed(const SelectorModel& model, const SparseGraph& graph) {
  check_graph(graph);
  const int h = model.hidden;
  if (model.node_embed.weight.rows() != h || model.node_embed.weight.cols() != 3 ||
      model.dist_embed.weight.rows() != h / 2 || model.kind_embed.rows() != kEdgeKinds ||
      model.kind_embed.cols() != h / 2 || model.conv.size() != static_cast<std::size_t>(model.layers) ||
      model.mlp.size() != static_cast<std::size_t>(model.mlp_layers)) {
    throw ModelError(fmt::format("model embeddings do not match hidden width {}", h));
  }
  const auto n = static_cast<Eigen::Index>(graph.node_count());
  const auto m = static_cast<Eigen::Index>(graph.edge_count());

  Eigen::MatrixXd feats(3, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& f = graph.node_features[static_cast<std::size_t>(i)];
    feats.col(i) << f[0], f[1], f[2];
  }
  Eigen::MatrixXd x = apply(model.node_embed, feats);

  Eigen::MatrixXd dist(1, m);
  for (Eigen::Index e = 0; e < m; ++e) dist(0, e) = graph.edge_distance[static_cast<std::size_t>(e)];
  Eigen::MatrixXd edges(h, m);
  edges.topRows(h / 2) = apply(model.dist_embed, dist);
  for (Eigen::Index e = 0; e < m; ++e) {
    edges.col(e).bottomRows(h / 2) =
        model.kind_embed.row(static_cast<int>(graph.edge_kind[static_cast<std::size_t>(e)])).transpose();
  }

  ForwardResult result;
  result.node_input = x;
  result.edge_input = edges;

  for (const auto& layer : model.conv) {
    const Eigen::MatrixXd eta = edge_gates(edges, graph, model.eps);
    Eigen::MatrixXd node_branch = apply(layer.w[0], x);
    const Eigen::MatrixXd msg = apply(layer.w[1], x);
    for (Eigen::Index e = 0; e < m; ++e) {
      const auto s = graph.edge_source[static_cast<std::size_t>(e)];
      const auto t = graph.edge_target[static_cast<std::size_t>(e)];
      node_branch.col(s).array() += eta.col(e).array() * msg.col(t).array();
    }

    Eigen::MatrixXd edge_branch = apply(layer.w[2], edges);
    const Eigen::MatrixXd from = apply(layer.w[3], x);
    const Eigen::MatrixXd to = apply(layer.w[4], x);
    for (Eigen::Index e = 0; e < m; ++e) {
      edge_branch.col(e) += from.col(graph.edge_source[static_cast<std::size_t>(e)]) +
                            to.col(graph.edge_target[static_cast<std::size_t>(e)]);
    }

    batch_norm(node_branch, layer.node_bn);
    batch_norm(edge_branch, layer.edge_bn);
    x += node_branch.cwiseMax(0.0);
    edges += edge_branch.cwiseMax(0.0);
  }
  result.node_output = x;
  result.edge_output = edges;

  Eigen::MatrixXd z = edges;
  for (std::size_t i = 0; i < model.mlp.size(); ++i) {
    z = apply(model.mlp[i], z);
    if (i + 1 < model.mlp.size()) z = z.cwiseMax(0.0);
  }
  result.probabilities.resize(static_cast<std::size_t>(m));
  for (Eigen::Index e = 0; e < m; ++e) result.probabilities[static_cast<std::size_t>(e)] = open_unit(logistic(z(0, e)));
  return result;
}

std::vector<double> forward(const SelectorModel& model, const SparseGraph& graph) {
  return forward_detailed(model, graph).probabilities;
}

// ---------------------------------------------------------------------------
// Marks

bool MarkSet::contains(int customer) const { return std::binary_search(marked.begin(), marked.end(), customer); }

MarkSet decode_marks(const std::vector<double>& probabilities, const SparseGraph& graph, double threshold) {
  if (probabilities.size() != graph.edge_count()) {
    throw std::invalid_argument("probability vector length differs from the graph's edge count");
  }
  MarkSet marks;
  marks.threshold = threshold;
  marks.source = SelectorKind::Gnn;
  for (std::size_t e = 0; e < graph.edge_count(); ++e) {
    const int s = graph.edge_source[e], t = graph.edge_target[e];
    if (!graph.s0_edge_mask[e] || s >= t) continue;
    const int back = graph.find_edge(t, s);
    const double p = back >= 0 ? 0.5 * (probabilities[e] + probabilities[static_cast<std::size_t>(back)]) : probabilities[e];
    if (!(p > threshold)) continue;
    for (int local : {s, t}) {
      const int id = graph.node_ids[static_cast<std::size_t>(local)];
      if (id != 0) marks.marked.push_back(id);
    }
  }
  std::sort(marks.marked.begin(), marks.marked.end());
  marks.marked.erase(std::unique(marks.marked.begin(), marks.marked.end()), marks.marked.end());
  return marks;
}

MarkSet heuristic_selector(const Instance& instance, const Solution& s0, double quantile) {
  if (!(quantile >= 0.0 && quantile <= 1.0)) throw std::invalid_argument("quantile must lie in [0, 1]");
  auto edges = solution_edges(s0);
  std::stable_sort(edges.begin(), edges.end(), [&](const auto& a, const auto& b) {
    return instance.distance(a.first, a.second) < instance.distance(b.first, b.second);
  });
  const auto take = static_cast<std::size_t>(std::floor(quantile * static_cast<double>(edges.size())));
  MarkSet marks;
  marks.threshold = quantile;
  marks.source = SelectorKind::Heuristic;
  for (std::size_t i = 0; i < take; ++i) {
    for (int v : {edges[i].first, edges[i].second}) {
      if (v != 0) marks.marked.push_back(v);
    }
  }
  std::sort(marks.marked.begin(), marks.marked.end());
  marks.marked.erase(std::unique(marks.marked.begin(), marks.marked.end()), marks.marked.end());
  return marks;
}

}  // namespace glns
