#include <doctest.h>

#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "glns/construction.hpp"
#include "glns/selector.hpp"
#include "glns/spatial.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace glns;

namespace {

Instance sample(std::uint64_t seed, int customers, int capacity = 30) {
  GeneratorOptions g;
  g.seed = seed;
  g.customers = customers;
  g.capacity = capacity;
  return generate_instance(g);
}

std::string serialized(const SelectorModel& m) {
  std::ostringstream out;
  save_weights(m, out);
  return out.str();
}

std::string load_error(const std::string& bytes) {
  std::istringstream in(bytes);
  try {
    load_weights(in);
  } catch (const ModelError& e) {
    return e.what();
  }
  return {};
}

void put_u32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_tensor(std::string& s, const std::string& name, std::vector<std::uint32_t> dims, float value) {
  put_u32(s, static_cast<std::uint32_t>(name.size()));
  s += name;
  put_u32(s, static_cast<std::uint32_t>(dims.size()));
  std::size_t count = 1;
  for (auto d : dims) {
    put_u32(s, d);
    count *= d;
  }
  for (std::size_t i = 0; i < count; ++i) put_u32(s, std::bit_cast<std::uint32_t>(value));
}

// A weight file with only the header of a (1, 2, 1) model.
std::string header_only() {
  std::string s("GNNW1\0", 6);
  put_u32(s, 1);
  put_u32(s, 2);
  put_u32(s, 1);
  put_u32(s, std::bit_cast<std::uint32_t>(0.01f));
  return s;
}

}  // namespace

TEST_CASE("complete graph on five nodes") {
  const Instance inst = sample(1, 4, 100);
  const Solution s0(inst, {{1, 2}, {3, 4}});
  const SparseGraph g = build_graph(inst, s0, {4, 1000, true});
  CHECK(g.node_count() == 5);
  CHECK(g.edge_count() == 25);  // 20 directed pairs plus 5 self-loops
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) CHECK(g.find_edge(i, j) >= 0);
    CHECK(g.edge_kind[static_cast<std::size_t>(g.find_edge(i, i))] == EdgeKind::SelfLoop);
  }
  std::set<std::pair<int, int>> s0_dir;
  for (const auto& [a, b] : solution_edges(s0)) {
    s0_dir.emplace(a, b);
    s0_dir.emplace(b, a);
  }
  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    const bool in_s0 = s0_dir.contains({g.edge_source[e], g.edge_target[e]});
    CHECK(static_cast<bool>(g.s0_edge_mask[e]) == in_s0);
    if (in_s0) CHECK(g.edge_kind[e] == EdgeKind::SolutionEdge);
    CHECK(g.edge_distance[e] >= 0.0);
    CHECK(g.edge_distance[e] <= 1.0);
    if (e > 0) {
      CHECK(std::make_pair(g.edge_source[e - 1], g.edge_target[e - 1]) <
            std::make_pair(g.edge_source[e], g.edge_target[e]));
    }
  }
  CHECK(g.find_edge(0, 9) == -1);
}

TEST_CASE("graph size bounds and feature scaling") {
  const Instance inst = sample(2, 300);
  const Solution s0 = clarke_wright(inst);
  const SparseGraph g = build_graph(inst, s0);
  const std::size_t nodes = 301;
  CHECK(g.edge_count() <= nodes * 25 + nodes + 2 * solution_edges(s0).size());
  CHECK(g.edge_count() >= nodes * 25);
  double max_x = 0, max_y = 0, max_d = 0;
  for (std::size_t i = 0; i < nodes; ++i) {
    const auto& f = g.node_features[i];
    CHECK(f[0] >= 0.0);
    CHECK(f[1] >= 0.0);
    max_x = std::max(max_x, f[0]);
    max_y = std::max(max_y, f[1]);
    if (i > 0) CHECK(f[2] == doctest::Approx(inst.demand(static_cast<int>(i)) / 30.0));
  }
  CHECK(std::max(max_x, max_y) == doctest::Approx(1.0));
  for (double d : g.edge_distance) max_d = std::max(max_d, d);
  CHECK(max_d == doctest::Approx(1.0));
  const auto no_knn = build_graph(inst, s0, {25, 1000, false});
  std::size_t s0_count = 0;
  for (auto m : no_knn.s0_edge_mask) s0_count += m;
  CHECK(no_knn.edge_count() == nodes + s0_count);
}

TEST_CASE("large instances keep the customers nearest the depot") {
  const Instance inst = sample(3, 400);
  const Solution s0 = clarke_wright(inst);
  const SparseGraph g = build_graph(inst, s0, {10, 100, true});
  CHECK(g.node_count() == 101);
  CHECK(g.node_ids.front() == 0);
  const auto want = nearest_to(inst.points(), inst.point(0), 101);
  CHECK(g.node_ids == want);
  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    if (!g.s0_edge_mask[e]) continue;
    const int a = g.node_ids[static_cast<std::size_t>(g.edge_source[e])];
    const int b = g.node_ids[static_cast<std::size_t>(g.edge_target[e])];
    const auto edges = solution_edges(s0);
    CHECK(std::binary_search(edges.begin(), edges.end(), std::make_pair(std::min(a, b), std::max(a, b))));
  }
}

TEST_CASE("graph json") {
  const Instance inst = sample(4, 6, 100);
  const Solution s0 = clarke_wright(inst);
  const SparseGraph g = build_graph(inst, s0);
  const auto doc = nlohmann::json::parse(graph_to_json(g));
  CHECK(doc["node_ids"].size() == 7);
  CHECK(doc["edges"]["source"].size() == g.edge_count());
  CHECK_FALSE(doc["edges"].contains("probability"));
  const std::vector<double> probs(g.edge_count(), 0.25);
  const auto with = nlohmann::json::parse(graph_to_json(g, &probs));
  CHECK(with["edges"]["probability"][0].get<double>() == 0.25);
}

TEST_CASE("weight file round trip") {
  const SelectorModel m = random_model(3, 6, 2, 9);
  const std::string bytes = serialized(m);
  std::istringstream in(bytes);
  const SelectorModel back = load_weights(in);
  CHECK(back.layers == 3);
  CHECK(back.hidden == 6);
  CHECK(back.mlp_layers == 2);
  CHECK(serialized(back) == bytes);
  CHECK(back.conv[2].w[4].weight == m.conv[2].w[4].weight);
  CHECK(back.conv[1].edge_bn.running_var == m.conv[1].edge_bn.running_var);
  const auto names = tensor_names(m);
  CHECK(names.front() == "node_embed.weight");
  CHECK(std::find(names.begin(), names.end(), "layers.2.W5.bias") != names.end());
  CHECK(std::find(names.begin(), names.end(), "layers.0.bn_edge.running_var") != names.end());
  CHECK(names.back() == "mlp.1.bias");
}

TEST_CASE("bundled fixture weights equal the seeded random model") {
  const SelectorModel m = load_weights(testing::kFixtures / "selector-l2-h8.gnnw");
  CHECK(serialized(m) == serialized(random_model(2, 8, 2, 7)));
}

TEST_CASE("weight file errors name the tensor") {
  const std::string good = serialized(random_model(1, 2, 1, 1));
  CHECK(load_error("JUNK") .find("bad magic") != std::string::npos);
  CHECK(load_error(good.substr(0, good.size() - 3)).find("truncated") != std::string::npos);
  CHECK(load_error(header_only()).find("tensor node_embed.weight: missing") != std::string::npos);

  std::string unexpected = header_only();
  put_tensor(unexpected, "decoder.weight", {1}, 0.f);
  CHECK(load_error(unexpected).find("tensor decoder.weight: unexpected") != std::string::npos);

  std::string dup = header_only();
  put_tensor(dup, "node_embed.bias", {2}, 0.f);
  put_tensor(dup, "node_embed.bias", {2}, 0.f);
  CHECK(load_error(dup).find("tensor node_embed.bias: duplicate") != std::string::npos);

  std::string shape = header_only();
  put_tensor(shape, "node_embed.weight", {3, 2}, 0.f);
  CHECK(load_error(shape).find("tensor node_embed.weight: shape mismatch") != std::string::npos);

  std::string nan = header_only();
  put_tensor(nan, "node_embed.bias", {2}, std::numeric_limits<float>::quiet_NaN());
  CHECK(load_error(nan).find("tensor node_embed.bias: non-finite") != std::string::npos);

  std::string odd("GNNW1\0", 6);
  put_u32(odd, 1);
  put_u32(odd, 3);
  put_u32(odd, 1);
  put_u32(odd, std::bit_cast<std::uint32_t>(0.01f));
  CHECK(load_error(odd).find("even") != std::string::npos);
}

TEST_CASE("forward agrees with the scalar oracle") {
  const Instance inst = sample(5, 15);
  const Solution s0 = clarke_wright(inst);
  const SparseGraph g = build_graph(inst, s0, {5, 1000, true});
  for (std::uint32_t seed = 0; seed < 4; ++seed) {
    const SelectorModel m = random_model(2, 8, 3, seed, 1.5);
    const auto got = forward(m, g);
    const auto want = oracle::forward(m, g);
    REQUIRE(got.size() == want.size());
    for (std::size_t e = 0; e < got.size(); ++e) {
      CHECK(got[e] == doctest::Approx(want[e]).epsilon(1e-9));
      CHECK(got[e] > 0.0);
      CHECK(got[e] < 1.0);
    }
  }
}

TEST_CASE("zero conv weights leave embeddings unchanged") {
  const Instance inst = sample(6, 12);
  const SparseGraph g = build_graph(inst, clarke_wright(inst), {4, 1000, true});
  SelectorModel m = random_model(3, 6, 2, 3);
  for (auto& layer : m.conv) {
    for (auto& lin : layer.w) {
      lin.weight.setZero();
      lin.bias.setZero();
    }
    for (auto* bn : {&layer.node_bn, &layer.edge_bn}) {
      bn->running_mean.setZero();
      bn->beta.setZero();
    }
  }
  const auto r = forward_detailed(m, g);
  CHECK((r.node_output - r.node_input).cwiseAbs().maxCoeff() == 0.0);
  CHECK((r.edge_output - r.edge_input).cwiseAbs().maxCoeff() == 0.0);
  CHECK(r.edge_input.cols() == static_cast<Eigen::Index>(g.edge_count()));
}

TEST_CASE("gate of a lone self-loop has a closed form") {
  SparseGraph g;
  g.node_ids = {0};
  g.node_features = {{0.0, 0.0, 0.0}};
  g.edge_source = {0};
  g.edge_target = {0};
  g.edge_distance = {0.0};
  g.edge_kind = {EdgeKind::SelfLoop};
  g.s0_edge_mask = {0};
  Eigen::MatrixXd e(3, 1);
  e << -2.0, 0.0, 3.0;
  const Eigen::MatrixXd eta = edge_gates(e, g, 0.01);
  for (int k = 0; k < 3; ++k) {
    const double s = 1.0 / (1.0 + std::exp(-e(k, 0)));
    CHECK(eta(k, 0) == doctest::Approx(s / (s + 0.01)));
  }
}

TEST_CASE("gates sum to just under one per source") {
  const Instance inst = sample(7, 20);
  const SparseGraph g = build_graph(inst, clarke_wright(inst), {6, 1000, true});
  Eigen::MatrixXd e = Eigen::MatrixXd::Random(4, static_cast<Eigen::Index>(g.edge_count()));
  const Eigen::MatrixXd eta = edge_gates(e, g, 1e-2);
  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(4, g.node_count());
  for (std::size_t j = 0; j < g.edge_count(); ++j) sums.col(g.edge_source[j]) += eta.col(static_cast<Eigen::Index>(j));
  CHECK(sums.maxCoeff() < 1.0);
  CHECK(sums.minCoeff() > 0.9);
}

TEST_CASE("open unit clamp") {
  CHECK(open_unit(0.0) > 0.0);
  CHECK(open_unit(1.0) < 1.0);
  CHECK(open_unit(0.3) == 0.3);
}

TEST_CASE("mark decoding") {
  const Instance inst = sample(8, 10, 100);
  const Solution s0(inst, {{1, 2, 3, 4, 5}, {6, 7, 8, 9, 10}});
  const SparseGraph g = build_graph(inst, s0, {3, 1000, true});
  std::vector<double> p(g.edge_count(), 0.5);
  CHECK(decode_marks(p, g, 1.0).size() == 0);
  CHECK(decode_marks(p, g, 0.0).marked == std::vector<int>{1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
  // Only edge 2-3 is confident in both directions; 4-5 in one direction only.
  std::fill(p.begin(), p.end(), 0.1);
  p[static_cast<std::size_t>(g.find_edge(2, 3))] = 0.9;
  p[static_cast<std::size_t>(g.find_edge(3, 2))] = 0.95;
  p[static_cast<std::size_t>(g.find_edge(4, 5))] = 0.99;
  const auto m = decode_marks(p, g, 0.8);
  CHECK(m.marked == std::vector<int>{2, 3});
  CHECK(m.contains(2));
  CHECK_FALSE(m.contains(4));
  // Depot endpoints are never marked.
  std::fill(p.begin(), p.end(), 0.1);
  p[static_cast<std::size_t>(g.find_edge(0, 1))] = 0.9;
  p[static_cast<std::size_t>(g.find_edge(1, 0))] = 0.9;
  CHECK(decode_marks(p, g, 0.8).marked == std::vector<int>{1});
  p.pop_back();
  CHECK_THROWS_AS(decode_marks(p, g, 0.8), std::invalid_argument);
}

TEST_CASE("heuristic selector") {
  const Instance inst = sample(9, 60);
  const Solution s0 = clarke_wright(inst);
  CHECK(heuristic_selector(inst, s0, 0.0).size() == 0);
  std::vector<int> all(60);
  for (int i = 0; i < 60; ++i) all[static_cast<std::size_t>(i)] = i + 1;
  CHECK(heuristic_selector(inst, s0, 1.0).marked == all);
  std::size_t prev = 0;
  for (double q = 0.0; q <= 1.0; q += 0.05) {
    const auto m = heuristic_selector(inst, s0, q);
    CHECK(m.size() >= prev);
    prev = m.size();
  }
  const Instance line = testing::line_instance(4, 100);
  // Route 0-1-2-3-4-0: edges of length 10 (x4) and 40; the shortest is 0-1.
  const Solution s(line, {{1, 2, 3, 4}});
  CHECK(heuristic_selector(line, s, 0.2).marked == std::vector<int>{1});
  CHECK(heuristic_selector(line, s, 0.4).marked == std::vector<int>{1, 2});
  CHECK_THROWS_AS(heuristic_selector(inst, s0, 1.5), std::invalid_argument);
}
