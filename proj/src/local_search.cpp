#include "glns/local_search.hpp"

#include <algorithm>
#include <numeric>

#include "glns/spatial.hpp"

namespace glns {

NeighborLists::NeighborLists(const Instance& instance, int k)
    : k_(std::min(k, instance.nodes() - 1)), lists_(k_nearest(instance.points(), k)) {}

bool two_opt(Solution& solution, int r) {
  const Instance& inst = solution.instance();
  bool changed = false;
  bool improved = true;
  while (improved) {
    improved = false;
    const auto& v = solution.route(r).visits;
    const int len = static_cast<int>(v.size());
    if (len < 2) return changed;
    // s = [0, v..., 0]; edge i joins s[i] and s[i+1].
    auto at = [&](int i) { return (i == 0 || i == len + 1) ? 0 : v[static_cast<std::size_t>(i - 1)]; };
    for (int i = 0; i < len && !improved; ++i) {
      const int a = at(i);
      const int b = at(i + 1);
      const Cost ab = inst.cost(a, b);
      for (int j = i + 2; j <= len; ++j) {
        const int c = at(j);
        const int d = at(j + 1);
        const Cost delta = inst.cost(a, c) + inst.cost(b, d) - ab - inst.cost(c, d);
        if (delta < 0) {
          solution.reverse(r, i, j - 1);
          improved = changed = true;
          break;
        }
      }
    }
  }
  return changed;
}

namespace {

template <typename List, typename Touch>
bool relocate_pass(Solution& sol, const NeighborLists& lists, const List& customers, Touch&& touch) {
  const Instance& inst = sol.instance();
  bool changed = false;
  auto try_customer = [&](int u) {
    if (!sol.contains(u)) return;
    const int from = sol.route_of(u);
    const Cost removal = sol.removal_delta(u);
    for (int v : lists.of(u)) {
      if (v == 0 || !sol.contains(v)) continue;
      const int to = sol.route_of(v);
      if (to == from) continue;
      if (sol.route(to).load + inst.demand(u) > inst.capacity()) continue;
      const int pv = sol.position_of(v);
      for (int pos : {pv, pv + 1}) {
        const Cost delta = removal + sol.insertion_delta(u, to, pos);
        if (delta < 0) {
          touch(sol.prev_of(u));
          touch(sol.next_of(u));
          sol.remove(u);
          sol.insert(u, to, pos);
          touch(u);
          touch(v);
          changed = true;
          return;
        }
      }
    }
  };
  if (customers.empty()) {
    for (int u = 1; u <= inst.customers(); ++u) try_customer(u);
  } else {
    // `customers` may grow through touch(); re-read size and elements each step.
    for (std::size_t i = 0; i < customers.size(); ++i) try_customer(customers[i]);
  }
  if (changed) sol.prune_empty_routes();
  return changed;
}

template <typename List, typename Touch>
bool swap_pass(Solution& sol, const NeighborLists& lists, const List& customers, Touch&& touch) {
  const Instance& inst = sol.instance();
  bool changed = false;
  auto try_customer = [&](int u) {
    if (!sol.contains(u)) return;
    const int ru = sol.route_of(u);
    const int pu = sol.prev_of(u);
    const int nu = sol.next_of(u);
    const Cost out_u = inst.cost(pu, u) + inst.cost(u, nu);
    const int qu = inst.demand(u);
    for (int v : lists.of(u)) {
      if (v == 0 || !sol.contains(v)) continue;
      const int rv = sol.route_of(v);
      if (rv == ru) continue;
      const int qv = inst.demand(v);
      if (sol.route(ru).load - qu + qv > inst.capacity()) continue;
      if (sol.route(rv).load - qv + qu > inst.capacity()) continue;
      const int pv = sol.prev_of(v);
      const int nv = sol.next_of(v);
      const Cost delta = inst.cost(pu, v) + inst.cost(v, nu) - out_u + inst.cost(pv, u) + inst.cost(u, nv) -
                         inst.cost(pv, v) - inst.cost(v, nv);
      if (delta < 0) {
        sol.exchange(u, v);
        touch(u);
        touch(v);
        changed = true;
        return;
      }
    }
  };
  if (customers.empty()) {
    for (int u = 1; u <= inst.customers(); ++u) try_customer(u);
  } else {
    for (std::size_t i = 0; i < customers.size(); ++i) try_customer(customers[i]);
  }
  return changed;
}

}  // namespace

bool relocate(Solution& solution, const NeighborLists& lists, std::span<const int> customers) {
  return relocate_pass(solution, lists, customers, [](int) {});
}

bool swap_move(Solution& solution, const NeighborLists& lists, std::span<const int> customers) {
  return swap_pass(solution, lists, customers, [](int) {});
}

Cost run_local_search(Solution& solution, const NeighborLists& lists, std::vector<Cost>* trace) {
  const Cost start = solution.total_cost();
  bool changed = true;
  while (changed) {
    changed = false;
    for (int r = 0; r < solution.route_count(); ++r) changed |= two_opt(solution, r);
    changed |= relocate(solution, lists);
    changed |= swap_move(solution, lists);
    if (trace) trace->push_back(solution.total_cost());
  }
  return start - solution.total_cost();
}

Cost run_local_search(Solution& solution, const NeighborLists& lists, std::span<const int> focus) {
  const Instance& inst = solution.instance();
  const Cost start = solution.total_cost();
  std::vector<int> customers;
  std::vector<char> in_focus(static_cast<std::size_t>(inst.nodes()), 0);
  auto touch = [&](int c) {
    if (c > 0 && !in_focus[static_cast<std::size_t>(c)]) {
      in_focus[static_cast<std::size_t>(c)] = 1;
      customers.push_back(c);
    }
  };
  for (int c : focus) touch(c);
  if (customers.empty()) return 0;

  std::vector<int> routes;
  bool changed = true;
  while (changed) {
    changed = false;
    routes.clear();
    for (int c : customers) {
      if (solution.contains(c)) routes.push_back(solution.route_of(c));
    }
    std::sort(routes.begin(), routes.end());
    routes.erase(std::unique(routes.begin(), routes.end()), routes.end());
    for (int r : routes) changed |= two_opt(solution, r);
    changed |= relocate_pass(solution, lists, customers, touch);
    changed |= swap_pass(solution, lists, customers, touch);
  }
  return start - solution.total_cost();
}

}  // namespace glns
