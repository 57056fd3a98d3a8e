#include "glns/construction.hpp"

#include <algorithm>
#include <limits>
#include <tuple>

#include "glns/local_search.hpp"
#include "glns/spatial.hpp"

namespace glns {

std::string_view to_string(Constructor kind) {
  return kind == Constructor::ClarkeWright ? "clarke-wright" : "nearest-neighbor";
}

std::optional<Constructor> parse_constructor(std::string_view text) {
  if (text == "clarke-wright" || text == "cw") return Constructor::ClarkeWright;
  if (text == "nearest-neighbor" || text == "nn") return Constructor::NearestNeighbor;
  return std::nullopt;
}

namespace {

struct Saving {
  Cost value;
  int i;  // i < j
  int j;
};

constexpr int kSparseSavingsNeighbors = 50;

std::vector<Saving> collect_savings(const Instance& inst) {
  const int n = inst.customers();
  std::vector<Saving> savings;
  auto add = [&](int i, int j) {
    const Cost s = inst.cost(0, i) + inst.cost(0, j) - inst.cost(i, j);
    if (s > 0) savings.push_back({s, i, j});
  };
  if (n <= Instance::kMatrixCacheLimit) {
    savings.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(n - 1) / 2);
    for (int i = 1; i <= n; ++i) {
      for (int j = i + 1; j <= n; ++j) add(i, j);
    }
  } else {
    const auto knn = k_nearest(inst.points(), kSparseSavingsNeighbors);
    for (int i = 1; i <= n; ++i) {
      for (int j : knn[static_cast<std::size_t>(i)]) {
        if (j == 0) continue;
        // Keep each pair once even when only one side lists the other.
        const int a = std::min(i, j), b = std::max(i, j);
        add(a, b);
      }
    }
    std::sort(savings.begin(), savings.end(),
              [](const Saving& x, const Saving& y) { return std::tie(x.i, x.j) < std::tie(y.i, y.j); });
    savings.erase(std::unique(savings.begin(), savings.end(),
                              [](const Saving& x, const Saving& y) { return x.i == y.i && x.j == y.j; }),
                  savings.end());
  }
  std::sort(savings.begin(), savings.end(), [](const Saving& x, const Saving& y) {
    if (x.value != y.value) return x.value > y.value;
    return std::tie(x.i, x.j) < std::tie(y.i, y.j);
  });
  return savings;
}

}  // namespace

Solution clarke_wright(const Instance& inst, bool polish) {
  const int n = inst.customers();
  std::vector<std::vector<int>> chains(static_cast<std::size_t>(n) + 1);
  std::vector<int> load(static_cast<std::size_t>(n) + 1, 0);
  std::vector<int> chain_of(static_cast<std::size_t>(n) + 1, 0);
  for (int c = 1; c <= n; ++c) {
    chains[static_cast<std::size_t>(c)] = {c};
    load[static_cast<std::size_t>(c)] = inst.demand(c);
    chain_of[static_cast<std::size_t>(c)] = c;
  }

  for (const auto& s : collect_savings(inst)) {
    const int a = chain_of[static_cast<std::size_t>(s.i)];
    const int b = chain_of[static_cast<std::size_t>(s.j)];
    if (a == b) continue;
    auto& ca = chains[static_cast<std::size_t>(a)];
    auto& cb = chains[static_cast<std::size_t>(b)];
    if (load[static_cast<std::size_t>(a)] + load[static_cast<std::size_t>(b)] > inst.capacity()) continue;
    const bool i_front = ca.front() == s.i, i_back = ca.back() == s.i;
    const bool j_front = cb.front() == s.j, j_back = cb.back() == s.j;
    if (!(i_front || i_back) || !(j_front || j_back)) continue;

    // Orient both chains so that i ends A and j starts B, then concatenate.
    if (!i_back) std::reverse(ca.begin(), ca.end());
    if (!j_front) std::reverse(cb.begin(), cb.end());
    int keep = a, drop = b;
    if (cb.size() > ca.size()) {
      cb.insert(cb.begin(), ca.begin(), ca.end());
      std::swap(keep, drop);
    } else {
      ca.insert(ca.end(), cb.begin(), cb.end());
    }
    for (int c : chains[static_cast<std::size_t>(drop)]) chain_of[static_cast<std::size_t>(c)] = keep;
    chains[static_cast<std::size_t>(drop)].clear();
    load[static_cast<std::size_t>(keep)] += load[static_cast<std::size_t>(drop)];
    load[static_cast<std::size_t>(drop)] = 0;
  }

  std::vector<std::vector<int>> routes;
  for (int c = 1; c <= n; ++c) {
    if (!chains[static_cast<std::size_t>(c)].empty()) routes.push_back(std::move(chains[static_cast<std::size_t>(c)]));
  }
  Solution sol(inst, routes);
  if (polish) {
    for (int r = 0; r < sol.route_count(); ++r) two_opt(sol, r);
  }
  return sol;
}

Solution nearest_neighbor(const Instance& inst) {
  const int n = inst.customers();
  std::vector<char> visited(static_cast<std::size_t>(n) + 1, 0);
  std::vector<std::vector<int>> routes;
  std::vector<int> current;
  int load = 0;
  int at = 0;
  int remaining = n;
  while (remaining > 0) {
    int best = -1;
    Cost best_d = std::numeric_limits<Cost>::max();
    for (int c = 1; c <= n; ++c) {
      if (visited[static_cast<std::size_t>(c)] || load + inst.demand(c) > inst.capacity()) continue;
      const Cost d = inst.cost(at, c);
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    if (best < 0) {
      routes.push_back(std::move(current));
      current.clear();
      load = 0;
      at = 0;
      continue;
    }
    visited[static_cast<std::size_t>(best)] = 1;
    current.push_back(best);
    load += inst.demand(best);
    at = best;
    --remaining;
  }
  if (!current.empty()) routes.push_back(std::move(current));
  return Solution(inst, routes);
}

Solution construct(const Instance& instance, Constructor kind) {
  return kind == Constructor::ClarkeWright ? clarke_wright(instance) : nearest_neighbor(instance);
}

}  // namespace glns
