#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "glns/instance.hpp"
#include "glns/solution.hpp"

namespace glns {

// ---------------------------------------------------------------------------
// Graph

enum class EdgeKind : std::uint8_t { KnnNeighbor = 0, SolutionEdge = 1, SelfLoop = 2 };
inline constexpr int kEdgeKinds = 3;

/// Selector input. Graph node 0 is the depot; `node_ids` maps graph nodes to
/// instance nodes. Edges are directed (source aggregates from target) and
/// sorted by (source, target).
struct SparseGraph {
  std::vector<int> node_ids;
  std::vector<std::array<double, 3>> node_features;  // x, y scaled to [0,1]; demand / capacity
  std::vector<int> edge_source;
  std::vector<int> edge_target;
  std::vector<double> edge_distance;  // rounded distance / largest edge distance
  std::vector<EdgeKind> edge_kind;
  std::vector<std::uint8_t> s0_edge_mask;

  int node_count() const noexcept { return static_cast<int>(node_ids.size()); }
  std::size_t edge_count() const noexcept { return edge_source.size(); }
  /// Index of the directed edge (source, target), or -1.
  int find_edge(int source, int target) const;
};

struct GraphOptions {
  int k = 25;                  // nearest neighbours per node
  int max_customers = 1000;    // larger instances keep the customers nearest the depot
  bool include_knn = true;     // false: solution edges and self-loops only
};

/// Node set: every node when N <= max_customers, otherwise the depot plus the
/// max_customers customers nearest to it. Edges: each node's k nearest
/// neighbours (one direction), both directions of every solution edge between
/// retained nodes, and a self-loop per node. Coordinates are scaled by the
/// larger side of the retained nodes' bounding box.
SparseGraph build_graph(const Instance& instance, const Solution& s0, const GraphOptions& options = {});

/// JSON dump: {"node_ids", "node_features", "edges": {"source", "target",
/// "distance", "kind", "s0"}}, kinds as their enum integer values. Optional
/// per-edge probabilities are added as edges.probability.
std::string graph_to_json(const SparseGraph& graph, const std::vector<double>* probabilities = nullptr);

// ---------------------------------------------------------------------------
// Model

struct Linear {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out
};

/// Inference-mode batch norm: gamma * (x - mean) / sqrt(var + kBatchNormEps) + beta.
struct BatchNorm {
  Eigen::VectorXd gamma, beta, running_mean, running_var;
};
inline constexpr double kBatchNormEps = 1e-5;

struct ConvLayer {
  std::array<Linear, 5> w;  // W1..W5
  BatchNorm node_bn;
  BatchNorm edge_bn;
};

/// Residual gated graph ConvNet weights. Immutable once built.
struct SelectorModel {
  int layers = 10;
  int hidden = 120;
  int mlp_layers = 3;
  double eps = 1e-2;  // stability constant in the gate normaliser

  Linear node_embed;              // hidden x 3
  Linear dist_embed;              // hidden/2 x 1
  Eigen::MatrixXd kind_embed;     // kEdgeKinds x hidden/2
  std::vector<ConvLayer> conv;
  std::vector<Linear> mlp;        // hidden->hidden ... ->1

  /// Throws ModelError on shape mismatch, odd hidden width, non-finite values
  /// or non-positive running variances.
  void check() const;
};

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Random weights, uniform in +-scale/sqrt(fan_in), with batch-norm statistics
/// drawn near the identity. Every value is exactly representable in float32.
SelectorModel random_model(int layers, int hidden, int mlp_layers, std::uint32_t seed, double scale = 1.0);

/// Weight container: magic "GNNW1\0", header {layers u32, hidden u32,
/// mlp_layers u32, eps f32}, then until end of file a sequence of tensors
/// {name_len u32, name bytes, rank u32, dims u32[rank], f32 row-major data},
/// all little-endian. Tensor names are listed by tensor_names().
void save_weights(const SelectorModel& model, std::ostream& out);
void save_weights(const SelectorModel& model, const std::filesystem::path& path);
SelectorModel load_weights(std::istream& in);
SelectorModel load_weights(const std::filesystem::path& path);
std::vector<std::string> tensor_names(const SelectorModel& model);

// ---------------------------------------------------------------------------
// Inference

/// eta_ij = sigmoid(e_ij) / (sum over the source's edges of sigmoid(e_ij') + eps),
/// componentwise. Input and output have one column per edge, in graph order.
Eigen::MatrixXd edge_gates(const Eigen::MatrixXd& edge_embeddings, const SparseGraph& graph, double eps);

/// Embedding matrices hold one column per node or edge.
struct ForwardResult {
  std::vector<double> probabilities;   // per directed edge, strictly inside (0,1)
  Eigen::MatrixXd node_input, edge_input;   // embeddings entering layer 1
  Eigen::MatrixXd node_output, edge_output; // after the last conv layer
};

/// Per-directed-edge probability of belonging to a good solution.
/// Throws ModelError if the model and graph disagree on dimensions.
std::vector<double> forward(const SelectorModel& model, const SparseGraph& graph);
ForwardResult forward_detailed(const SelectorModel& model, const SparseGraph& graph);

/// Clamps a probability into the open unit interval.
double open_unit(double p) noexcept;

// ---------------------------------------------------------------------------
// Marks

enum class SelectorKind { Gnn, Heuristic, Null };

/// Customers the destroy phase should leave in place.
struct MarkSet {
  std::vector<int> marked;  // ascending instance customer indices
  double threshold = 0.0;
  SelectorKind source = SelectorKind::Null;

  bool contains(int customer) const;
  std::size_t size() const noexcept { return marked.size(); }
};

/// Averages both directions of each solution edge; if the result exceeds
/// `threshold`, both non-depot endpoints are marked.
MarkSet decode_marks(const std::vector<double>& probabilities, const SparseGraph& graph, double threshold);

/// Weight-free stand-in: marks endpoints of the shortest `quantile` fraction of
/// solution edges (ordered by distance, then endpoints).
MarkSet heuristic_selector(const Instance& instance, const Solution& s0, double quantile);

}  // namespace glns
