#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "glns/construction.hpp"
#include "glns/lns.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace glns;

namespace {

Instance sample(std::uint64_t seed, int customers, int capacity, DepotMode depot = DepotMode::Central) {
  GeneratorOptions g;
  g.seed = seed;
  g.customers = customers;
  g.capacity = capacity;
  g.depot = depot;
  return generate_instance(g);
}

const NodePredicate kAll = [](int) { return true; };

std::vector<std::vector<int>> sorted_routes(std::vector<std::vector<int>> routes) {
  routes.erase(std::remove_if(routes.begin(), routes.end(), [](const auto& r) { return r.empty(); }), routes.end());
  std::sort(routes.begin(), routes.end());
  return routes;
}

constexpr long kInf = std::numeric_limits<long>::max() / 4;

// Cheapest (delta, route, pos) for c over non-empty feasible routes.
struct Option {
  long delta;
  int route;
  int pos;
};

std::vector<Option> options(const Instance& inst, const std::vector<std::vector<int>>& routes, int c) {
  std::vector<Option> out;
  for (std::size_t r = 0; r < routes.size(); ++r) {
    if (routes[r].empty()) continue;
    int load = inst.demand(c);
    for (int x : routes[r]) load += inst.demand(x);
    if (load > inst.capacity()) continue;
    Option best{kInf, static_cast<int>(r), 0};
    for (std::size_t p = 0; p <= routes[r].size(); ++p) {
      auto w = routes[r];
      w.insert(w.begin() + static_cast<std::ptrdiff_t>(p), c);
      const long d = oracle::routes_cost(inst, {w}) - oracle::routes_cost(inst, {routes[r]});
      if (d < best.delta) best = {d, static_cast<int>(r), static_cast<int>(p)};
    }
    out.push_back(best);
  }
  out.push_back({2 * oracle::distance(inst.point(0), inst.point(c)), -1, 0});
  return out;
}

std::vector<std::vector<int>> regret_oracle(const Instance& inst, std::vector<std::vector<int>> routes,
                                            std::vector<int> absent) {
  std::sort(absent.begin(), absent.end());
  while (!absent.empty()) {
    std::size_t pick = 0;
    long pick_regret = -1;
    Option pick_opt{};
    for (std::size_t k = 0; k < absent.size(); ++k) {
      auto opts = options(inst, routes, absent[k]);
      // Stable: among equal deltas, routes come first in index order, the singleton last.
      std::stable_sort(opts.begin(), opts.end(), [](const Option& a, const Option& b) { return a.delta < b.delta; });
      const long regret = opts.size() < 2 ? kInf : opts[1].delta - opts[0].delta;
      if (regret > pick_regret) {
        pick = k;
        pick_regret = regret;
        pick_opt = opts[0];
      }
    }
    const int c = absent[pick];
    if (pick_opt.route < 0) {
      routes.push_back({c});
    } else {
      auto& r = routes[static_cast<std::size_t>(pick_opt.route)];
      r.insert(r.begin() + pick_opt.pos, c);
    }
    absent.erase(absent.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  return routes;
}

class ForbidGuide final : public DestroyGuide {
 public:
  explicit ForbidGuide(std::set<int> forbidden) : forbidden_(std::move(forbidden)) {}
  void begin_iteration(long, const Solution&, bool) override { ++iterations; }
  bool allowed(int c, Rng&) override {
    ++queries;
    return !forbidden_.contains(c);
  }
  long iterations = 0;
  long queries = 0;

 private:
  std::set<int> forbidden_;
};

}  // namespace

TEST_CASE("outcome classification and omega updates") {
  CHECK(classify(-1) == Outcome::Improved);
  CHECK(classify(0) == Outcome::NearIdentical);
  CHECK(classify(5) == Outcome::Worse);

  ShakeState s;
  s.omega = {0, 1, 3, 5};
  s.omega_min = 1;
  s.omega_max = 5;
  const std::vector<int> all{1, 2, 3};
  update_omega(s, all, Outcome::Worse);
  CHECK(s.omega == std::vector<int>{0, 2, 4, 5});
  update_omega(s, all, Outcome::Improved);
  CHECK(s.omega == std::vector<int>{0, 2, 4, 5});
  for (int i = 0; i < 10; ++i) update_omega(s, all, Outcome::NearIdentical);
  CHECK(s.omega == std::vector<int>{0, 1, 1, 1});
}

TEST_CASE("initial omega") {
  const Instance inst = testing::line_instance(100, 1000);
  std::vector<std::vector<int>> routes(2);
  for (int c = 1; c <= 100; ++c) routes[c <= 70 ? 0 : 1].push_back(c);
  const ShakeState s = ShakeState::initial(Solution(inst, routes));
  CHECK(s.omega[5] == 3);  // ceil(0.05 * 50)
  CHECK(s.omega_max == 70);
  CHECK(s.omega_min == 1);
}

TEST_CASE("random removal honours size and predicate") {
  const Instance inst = sample(1, 50, 30);
  const Solution sol = clarke_wright(inst);
  Rng rng(4);
  for (int n = 1; n <= 20; ++n) {
    const auto part = destroy_random(sol, n, kAll, rng);
    CHECK(part.absent.size() == static_cast<std::size_t>(n));
    CHECK(part.shortfall == 0);
    CHECK(std::set<int>(part.absent.begin(), part.absent.end()).size() == static_cast<std::size_t>(n));
    for (int c : part.absent) CHECK_FALSE(part.solution.contains(c));
    CHECK(part.solution.total_cost() == recompute_cost(part.solution));
  }
  std::map<int, int> asked;
  const NodePredicate odd = [&](int c) {
    ++asked[c];
    return c % 2 == 1;
  };
  const auto part = destroy_random(sol, 40, odd, rng);
  CHECK(part.absent.size() == 25);
  CHECK(part.shortfall == 15);
  for (int c : part.absent) CHECK(c % 2 == 1);
  for (const auto& [c, k] : asked) CHECK(k == 1);
}

TEST_CASE("string removal takes a window around the seed") {
  const Instance inst = testing::line_instance(20, 100);
  std::vector<int> all;
  for (int c = 1; c <= 20; ++c) all.push_back(c);
  const Solution sol(inst, {all});
  const NeighborLists lists(inst);
  ShakeState shake = ShakeState::initial(sol);
  shake.omega.assign(21, 5);
  for (std::uint32_t s = 0; s < 30; ++s) {
    Rng rng(s);
    const auto part = destroy_string(sol, 10, shake, lists, kAll, rng);
    REQUIRE(part.absent.size() == 5);
    const auto [lo, hi] = std::minmax_element(part.absent.begin(), part.absent.end());
    CHECK(*hi - *lo == 4);
    CHECK(*lo <= 10);
    CHECK(*hi >= 10);
    CHECK(part.shortfall == 0);
  }
  // Prohibited customers are skipped and the window stretches past them.
  const NodePredicate no_even = [](int c) { return c % 2 == 1; };
  Rng rng(1);
  const auto part = destroy_string(sol, 11, shake, lists, no_even, rng);
  CHECK(part.absent.size() == 5);
  for (int c : part.absent) CHECK(c % 2 == 1);
  CHECK_THROWS_AS(destroy_string(sol, 10, shake, lists, no_even, rng), std::invalid_argument);
  CHECK_THROWS_AS(destroy_string(part.solution, 11, shake, lists, kAll, rng), std::invalid_argument);
}

TEST_CASE("string removal visits ceil(sqrt(omega)) routes") {
  // Three parallel rows, one route per row.
  std::vector<Point> pts{{0, 0}};
  std::vector<int> dem{0};
  std::vector<std::vector<int>> routes(3);
  for (int row = 0; row < 3; ++row) {
    for (int i = 0; i < 10; ++i) {
      pts.push_back({10.0 * i, 100.0 + 3.0 * row});
      dem.push_back(1);
      routes[static_cast<std::size_t>(row)].push_back(static_cast<int>(pts.size()) - 1);
    }
  }
  const Instance inst = testing::make_instance(pts, dem, 100);
  const Solution sol(inst, routes);
  const NeighborLists lists(inst);
  ShakeState shake = ShakeState::initial(sol);
  shake.omega.assign(31, 4);  // two strings of four
  Rng rng(2);
  const auto part = destroy_string(sol, 15, shake, lists, kAll, rng);
  CHECK(part.absent.size() == 8);
  std::set<int> hit;
  for (int c : part.absent) hit.insert(sol.route_of(c));
  CHECK(hit.size() == 2);
}

TEST_CASE("greedy repair of one customer picks the cheapest position") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Instance inst = sample(seed, 20, 25);
    const Solution sol = clarke_wright(inst);
    for (int c = 1; c <= inst.customers(); c += 3) {
      PartialSolution part{sol, {c}, 0};
      part.solution.remove(c);
      const auto base = testing::visits(part.solution);
      long best = kInf;
      for (const auto& o : options(inst, base, c)) best = std::min(best, o.delta);
      Rng rng(0);
      const Solution repaired = repair_greedy(part, rng);
      CHECK(repaired.total_cost() == oracle::routes_cost(inst, base) + best);
      CHECK(validate(repaired).empty());
    }
  }
}

TEST_CASE("regret-2 repair matches an insertion-order oracle") {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const Instance inst = sample(seed, 18, 20 + static_cast<int>(seed % 4) * 10);
    const Solution sol = clarke_wright(inst);
    Rng rng(static_cast<std::uint32_t>(seed));
    const auto part = destroy_random(sol, 2 + static_cast<int>(seed % 7), kAll, rng);
    const auto want = regret_oracle(inst, testing::visits(part.solution), part.absent);
    const Solution got = repair_regret2(part);
    CHECK(sorted_routes(testing::visits(got)) == sorted_routes(want));
    CHECK(validate(got).empty());
  }
}

TEST_CASE("granular repair stays feasible") {
  const Instance inst = sample(9, 200, 40);
  const Solution sol = clarke_wright(inst);
  const NeighborLists lists(inst);
  Rng rng(5);
  auto part = destroy_random(sol, 30, kAll, rng);
  CHECK(validate(repair_greedy(part, rng, &lists)).empty());
  CHECK(validate(repair_regret2(part, &lists)).empty());
}

TEST_CASE("zero iterations return the start solution") {
  const Instance inst = sample(2, 30, 30);
  const Solution start = clarke_wright(inst);
  LnsConfig cfg;
  cfg.max_iterations = 0;
  const auto res = run_lns(inst, start, cfg);
  CHECK(testing::visits(res.best) == testing::visits(start));
  CHECK(res.trace.iterations.empty());
}

TEST_CASE("search is deterministic for a seed and never loses the best") {
  const Instance inst = sample(3, 60, 40, DepotMode::Edge);
  const Solution start = clarke_wright(inst);
  LnsConfig cfg;
  cfg.max_iterations = 800;
  cfg.seed = 17;
  cfg.record_removed = true;
  const auto a = run_lns(inst, start, cfg);
  const auto b = run_lns(inst, start, cfg);
  CHECK(a.trace.iterations == b.trace.iterations);
  CHECK(testing::visits(a.best) == testing::visits(b.best));
  CHECK(validate(a.best).empty());
  CHECK(a.best.total_cost() <= start.total_cost());
  Cost prev = start.total_cost();
  for (const auto& r : a.trace.iterations) {
    CHECK(r.best <= prev);
    CHECK(r.best <= r.current);
    CHECK(r.removed >= 1);
    prev = r.best;
  }
  CHECK(a.trace.iterations.back().best == a.best.total_cost());
  CHECK(a.trace.iterations.front().temperature == doctest::Approx(1e-3 * start.total_cost()));
  cfg.seed = 18;
  CHECK_FALSE(run_lns(inst, start, cfg).trace.iterations == a.trace.iterations);
  cfg.repair = RepairKind::Regret2;
  cfg.max_iterations = 200;
  CHECK(validate(run_lns(inst, start, cfg).best).empty());
}

TEST_CASE("trace csv") {
  const Instance inst = sample(3, 20, 40);
  LnsConfig cfg;
  cfg.max_iterations = 3;
  const auto csv = run_lns(inst, clarke_wright(inst), cfg).trace.to_csv();
  CHECK(csv.starts_with("iteration,current,best,accepted,removed,temperature,shortfall\n"));
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
}

TEST_CASE("a guide restricts which customers move") {
  const Instance inst = sample(4, 40, 30);
  const std::set<int> forbidden{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  ForbidGuide guide(forbidden);
  LnsConfig cfg;
  cfg.max_iterations = 400;
  cfg.record_removed = true;
  const auto res = run_lns(inst, clarke_wright(inst), cfg, &guide);
  CHECK(guide.iterations == 400);
  CHECK(guide.queries > 0);
  for (const auto& r : res.trace.iterations) {
    for (int c : r.removed_ids) CHECK_FALSE(forbidden.contains(c));
  }
  CHECK(validate(res.best).empty());
}

TEST_CASE("config checks") {
  LnsConfig cfg;
  CHECK_NOTHROW(cfg.check());
  cfg.max_iterations = -1;
  CHECK_THROWS_AS(cfg.check(), std::invalid_argument);
  cfg = {};
  cfg.random_remove_fraction = 0;
  CHECK_THROWS_AS(cfg.check(), std::invalid_argument);
  cfg = {};
  cfg.sa_initial_temp = 1;
  cfg.sa_final_temp = 2;
  CHECK_THROWS_AS(cfg.check(), std::invalid_argument);
  cfg = {};
  cfg.random_remove_floor = -1;
  CHECK_THROWS_AS(cfg.check(), std::invalid_argument);
}

TEST_CASE("search reaches the optimum of tiny instances; both oracles agree") {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    GeneratorOptions g;
    g.seed = 900 + seed;
    g.customers = 5 + static_cast<int>(seed % 3);
    g.capacity = 20;
    g.depot = static_cast<DepotMode>(seed % 3);
    const Instance inst = generate_instance(g);
    const auto opt = oracle::optimum_by_partition(inst);
    CHECK(opt == oracle::optimum_by_permutation(inst));
    LnsConfig cfg;
    cfg.max_iterations = 3000;
    cfg.seed = static_cast<std::uint32_t>(seed);
    CHECK(run_lns(inst, clarke_wright(inst), cfg).best.total_cost() == opt);
  }
}
