#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "glns/instance.hpp"
#include "glns/spatial.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace glns;

namespace {

const char* kSmall = R"(NAME : small
COMMENT : toy (depot=Edge)
TYPE : CVRP
DIMENSION : 4
EDGE_WEIGHT_TYPE : EUC_2D
CAPACITY : 10
NODE_COORD_SECTION
1 0 0
2 3 4
3 6 8
4 0 10
DEMAND_SECTION
1 0
2 4
3 5
4 6
DEPOT_SECTION
1
-1
EOF
)";

std::size_t error_line(const std::string& text) {
  try {
    parse_instance(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 9999;
}

std::string replace(std::string s, const std::string& from, const std::string& to) {
  s.replace(s.find(from), from.size(), to);
  return s;
}

}  // namespace

TEST_CASE("rounded distance rounds to nearest, halves up") {
  CHECK(rounded_distance({0, 0}, {3, 4}) == 5);
  CHECK(rounded_distance({0, 0}, {1, 1}) == 1);
  CHECK(rounded_distance({0, 0}, {1.5, 0}) == 2);
  CHECK(rounded_distance({0, 0}, {2, 1}) == 2);
  CHECK(rounded_distance({0, 0}, {0, 0}) == 0);
}

TEST_CASE("parse a small CVRPLIB file") {
  const Instance inst = parse_instance(kSmall);
  CHECK(inst.name() == "small");
  CHECK(inst.customers() == 3);
  CHECK(inst.capacity() == 10);
  CHECK(inst.demand(0) == 0);
  CHECK(inst.demand(3) == 6);
  CHECK(inst.total_demand() == 15);
  CHECK(inst.depot_mode() == DepotMode::Edge);
  CHECK(inst.distance(0, 1) == 5);
  CHECK(inst.distance(1, 2) == 5);
  CHECK(inst.distance(2, 1) == 5);
  CHECK_THROWS_AS(inst.distance(0, 4), std::out_of_range);
}

TEST_CASE("parse errors carry the offending line") {
  CHECK(error_line(replace(kSmall, "EUC_2D", "EXPLICIT")) == 5);
  CHECK(error_line(replace(kSmall, "TYPE : CVRP", "TYPE : TSP")) == 3);
  CHECK(error_line(replace(kSmall, "4 0 10", "4 0 ten")) == 11);
  CHECK(error_line(replace(kSmall, "4 6\n", "4 11\n")) == 16);
  CHECK(error_line(replace(kSmall, "3 5\n", "3 0\n")) == 15);
  CHECK(error_line(replace(kSmall, "CAPACITY : 10\n", "")) == 0);
  CHECK(error_line(replace(kSmall, "1\n-1", "1\n2\n-1")) == 0);
  try {
    parse_instance(replace(kSmall, "4 6\n", "4 11\n"));
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("demand exceeds capacity") != std::string::npos);
  }
}

TEST_CASE("depot listed elsewhere is moved to index 0") {
  std::string text = replace(kSmall, "DEPOT_SECTION\n1\n", "DEPOT_SECTION\n3\n");
  text = replace(text, "1 0\n", "1 2\n");
  text = replace(text, "3 5\n", "3 0\n");
  const Instance inst = parse_instance(text);
  CHECK(inst.point(0).x == 6);
  CHECK(inst.point(0).y == 8);
  CHECK(inst.customers() == 3);
  CHECK(inst.demand(1) == 2);
}

TEST_CASE("format / parse round trip") {
  for (auto mode : {DepotMode::Central, DepotMode::Edge, DepotMode::Random}) {
    GeneratorOptions g;
    g.seed = 42;
    g.customers = 37;
    g.depot = mode;
    const Instance a = generate_instance(g);
    const Instance b = parse_instance(format_instance(a));
    CHECK(b.name() == a.name());
    CHECK(b.capacity() == a.capacity());
    CHECK(b.demands() == a.demands());
    CHECK(b.depot_mode() == mode);
    for (int i = 0; i < a.nodes(); ++i) {
      CHECK(b.point(i).x == a.point(i).x);
      CHECK(b.point(i).y == a.point(i).y);
    }
  }
}

TEST_CASE("fixture files parse") {
  for (const char* f : {"G-n9-C-s14.vrp", "G-n31-C-s11.vrp", "G-n51-E-s12.vrp", "G-n101-R-s13.vrp"}) {
    const Instance inst = read_instance(testing::kFixtures / f);
    CHECK(inst.name() + ".vrp" == f);
    CHECK(inst.depot_mode().has_value());
  }
}

TEST_CASE("generator is deterministic and respects its ranges") {
  GeneratorOptions g;
  g.seed = 7;
  g.customers = 200;
  g.depot = DepotMode::Edge;
  g.demand_min = 3;
  g.demand_max = 9;
  g.capacity = 50;
  const Instance a = generate_instance(g), b = generate_instance(g);
  CHECK(a.name() == "G-n201-E-s7");
  CHECK(format_instance(a) == format_instance(b));
  CHECK(a.point(0).x == 0);
  CHECK(a.point(0).y == 0);
  for (int i = 1; i <= a.customers(); ++i) {
    CHECK(a.demand(i) >= 3);
    CHECK(a.demand(i) <= 9);
    CHECK(a.point(i).x >= 0);
    CHECK(a.point(i).x <= 1000);
  }
  g.seed = 8;
  CHECK(format_instance(generate_instance(g)) != format_instance(a));
  g.demand_max = 60;
  CHECK_THROWS_AS(generate_instance(g), std::invalid_argument);
}

TEST_CASE("on-demand distances match the cached matrix") {
  GeneratorOptions g;
  g.customers = Instance::kMatrixCacheLimit + 1;
  const Instance big = generate_instance(g);
  CHECK_FALSE(big.has_distance_cache());
  g.customers = 300;
  const Instance small = generate_instance(g);
  CHECK(small.has_distance_cache());
  for (int i = 0; i < small.nodes(); i += 7) {
    for (int j = 0; j < small.nodes(); j += 11) {
      CHECK(small.cost(i, j) == oracle::distance(small.point(i), small.point(j)));
    }
  }
  for (int i = 0; i < big.nodes(); i += 97) {
    const int j = big.nodes() - 1 - i;
    CHECK(big.cost(i, j) == oracle::distance(big.point(i), big.point(j)));
  }
}

TEST_CASE("instance invariants") {
  CHECK_THROWS_AS(Instance("x", {{0, 0}, {1, 1}}, {0, 0}, 10), std::invalid_argument);
  CHECK_THROWS_AS(Instance("x", {{0, 0}, {1, 1}}, {0, 11}, 10), std::invalid_argument);
  CHECK_THROWS_AS(Instance("x", {{0, 0}, {1, 1}}, {0, 1}, 0), std::invalid_argument);
  CHECK_THROWS_AS(Instance("x", {{0, 0}, {NAN, 1}}, {0, 1}, 10), std::invalid_argument);
}

TEST_CASE("bundled best-known costs") {
  const auto& bks = BksRegistry::bundled();
  CHECK(bks.size() == 110);
  CHECK(bks.find("X-n101-k25") == 27591);
  CHECK(bks.find("X-n106-k14") == 26362);
  CHECK(bks.find("X-n1001-k43") == 72359);
  CHECK(bks.find("Flanders2") == 4373244);
  CHECK_FALSE(bks.find("G-n101-C-s0").has_value());

  const auto parsed = BksRegistry::parse("# comment\nA\t10\n\nB\t20\n");
  CHECK(parsed.size() == 2);
  CHECK(parsed.find("B") == 20);
  CHECK_THROWS_AS(BksRegistry::parse("A\tten\n"), ParseError);
  CHECK_THROWS_AS(BksRegistry::parse("A\t0\n"), ParseError);
}

TEST_CASE("k nearest matches a brute-force sort") {
  std::mt19937 rng(3);
  std::uniform_int_distribution<int> coord(0, 60);  // small grid: many ties and duplicates
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Point> pts(static_cast<std::size_t>(5 + trial * 13));
    for (auto& p : pts) p = {static_cast<double>(coord(rng)), static_cast<double>(coord(rng))};
    const int k = 1 + trial % 9;
    const auto knn = k_nearest(pts, k);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      std::vector<std::pair<Cost, int>> all;
      for (std::size_t j = 0; j < pts.size(); ++j) {
        if (j != i) all.emplace_back(oracle::distance(pts[i], pts[j]), static_cast<int>(j));
      }
      std::sort(all.begin(), all.end());
      std::vector<int> want;
      for (std::size_t j = 0; j < std::min<std::size_t>(static_cast<std::size_t>(k), all.size()); ++j) {
        want.push_back(all[j].second);
      }
      CHECK(knn[i] == want);
    }
  }
}

TEST_CASE("nearest_to returns the closest points in index order") {
  std::vector<Point> pts{{0, 0}, {5, 0}, {1, 0}, {3, 0}, {1, 0}, {9, 9}};
  CHECK(nearest_to(pts, {0, 0}, 3) == std::vector<int>{0, 2, 4});
  CHECK(nearest_to(pts, {0, 0}, 10).size() == pts.size());
  CHECK(nearest_to(pts, {0, 0}, 0).empty());
}
