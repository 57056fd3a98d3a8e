#include "glns/lns.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include <fmt/format.h>

namespace glns {

ShakeState ShakeState::initial(const Solution& start) {
  ShakeState s;
  int non_empty = 0;
  int present = 0;
  int longest = 0;
  for (const auto& r : start.routes()) {
    if (r.visits.empty()) continue;
    ++non_empty;
    present += static_cast<int>(r.visits.size());
    longest = std::max(longest, static_cast<int>(r.visits.size()));
  }
  s.omega_min = 1;
  s.omega_max = std::max(1, longest);
  const double avg = non_empty > 0 ? static_cast<double>(present) / non_empty : 1.0;
  const int init = std::clamp(static_cast<int>(std::ceil(0.05 * avg)), s.omega_min, s.omega_max);
  s.omega.assign(static_cast<std::size_t>(start.instance().nodes()), init);
  return s;
}

Outcome classify(Cost delta) noexcept {
  if (delta < 0) return Outcome::Improved;
  if (delta == 0) return Outcome::NearIdentical;
  return Outcome::Worse;
}

void update_omega(ShakeState& shake, std::span<const int> touched, Outcome outcome) {
  if (outcome == Outcome::Improved) return;
  const int step = outcome == Outcome::Worse ? 1 : -1;
  for (int c : touched) {
    auto& w = shake.omega[static_cast<std::size_t>(c)];
    w = std::clamp(w + step, shake.omega_min, shake.omega_max);
  }
}

PartialSolution destroy_random(const Solution& solution, int n_remove, const NodePredicate& allowed, Rng& rng) {
  PartialSolution part{solution, {}, 0};
  const Instance& inst = solution.instance();
  std::vector<int> pool;
  pool.reserve(static_cast<std::size_t>(inst.customers()));
  for (int c = 1; c <= inst.customers(); ++c) {
    if (solution.contains(c)) pool.push_back(c);
  }
  const int size = static_cast<int>(pool.size());
  for (int k = 0; k < size && static_cast<int>(part.absent.size()) < n_remove; ++k) {
    const int j = uniform_int(rng, k, size - 1);
    std::swap(pool[static_cast<std::size_t>(k)], pool[static_cast<std::size_t>(j)]);
    const int c = pool[static_cast<std::size_t>(k)];
    if (!allowed(c)) continue;
    part.solution.remove(c);
    part.absent.push_back(c);
  }
  part.shortfall = std::max(0, n_remove - static_cast<int>(part.absent.size()));
  return part;
}

PartialSolution destroy_string(const Solution& solution, int seed, const ShakeState& shake,
                               const NeighborLists& lists, const NodePredicate& allowed, Rng& rng) {
  std::unordered_map<int, bool> memo;
  auto ok = [&](int c) {
    auto [it, fresh] = memo.try_emplace(c, false);
    if (fresh) it->second = allowed(c);
    return it->second;
  };
  if (seed < 1 || seed >= solution.instance().nodes() || !solution.contains(seed)) {
    throw std::invalid_argument(fmt::format("string seed {} is not a routed customer", seed));
  }
  if (!ok(seed)) throw std::invalid_argument(fmt::format("string seed {} is not allowed", seed));

  PartialSolution part{solution, {}, 0};
  Solution& sol = part.solution;
  const int budget = std::max(1, shake.omega[static_cast<std::size_t>(seed)]);
  const int strings = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(budget))));

  auto remove_string = [&](int start) {
    const auto visits = sol.route(sol.route_of(start)).visits;
    const int n = static_cast<int>(visits.size());
    const int p = sol.position_of(start);
    std::vector<int> chosen{start};
    int need = budget - 1;
    int left = p - 1, right = p + 1;
    auto take_left = [&](int count) {
      while (count > 0 && left >= 0) {
        const int c = visits[static_cast<std::size_t>(left--)];
        if (ok(c)) {
          chosen.push_back(c);
          --count;
          --need;
        }
      }
    };
    auto take_right = [&](int count) {
      while (count > 0 && right < n) {
        const int c = visits[static_cast<std::size_t>(right++)];
        if (ok(c)) {
          chosen.push_back(c);
          --count;
          --need;
        }
      }
    };
    take_left(uniform_int(rng, 0, budget - 1));
    take_right(need);
    take_left(need);
    for (int c : chosen) {
      sol.remove(c);
      part.absent.push_back(c);
    }
    return static_cast<int>(chosen.size());
  };

  std::vector<int> visited_routes{solution.route_of(seed)};
  int expected = budget;
  remove_string(seed);
  int done = 1;
  for (int nb : lists.of(seed)) {
    if (done >= strings) break;
    if (nb == 0 || !sol.contains(nb)) continue;
    const int r = sol.route_of(nb);
    if (std::find(visited_routes.begin(), visited_routes.end(), r) != visited_routes.end()) continue;
    if (!ok(nb)) continue;
    visited_routes.push_back(r);
    remove_string(nb);
    expected += budget;
    ++done;
  }
  part.shortfall = std::max(0, expected - static_cast<int>(part.absent.size()));
  return part;
}

namespace {

constexpr Cost kNoOption = std::numeric_limits<Cost>::max() / 4;

struct Placement {
  Cost delta = kNoOption;
  int route = -1;  // -1: new singleton route
  int pos = 0;
};

// Candidate routes for `c`: every non-empty route, or those of its neighbours.
void candidate_routes(const Solution& sol, int c, const NeighborLists* granular, std::vector<int>& out) {
  out.clear();
  if (!granular) {
    for (int r = 0; r < sol.route_count(); ++r) {
      if (!sol.route(r).visits.empty()) out.push_back(r);
    }
    return;
  }
  for (int nb : granular->of(c)) {
    if (nb != 0 && sol.contains(nb)) out.push_back(sol.route_of(nb));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
}

// Cheapest feasible position in route r.
Placement best_in_route(const Solution& sol, int c, int r) {
  const Instance& inst = sol.instance();
  Placement best;
  const auto& route = sol.route(r);
  if (route.load + inst.demand(c) > inst.capacity()) return best;
  const auto& v = route.visits;
  int prev = 0;
  for (std::size_t pos = 0; pos <= v.size(); ++pos) {
    const int next = pos == v.size() ? 0 : v[pos];
    const Cost delta = inst.cost(prev, c) + inst.cost(c, next) - inst.cost(prev, next);
    if (delta < best.delta) best = {delta, r, static_cast<int>(pos)};
    prev = next;
  }
  return best;
}

void apply(Solution& sol, int c, const Placement& p) {
  if (p.route < 0) {
    sol.add_route(c);
  } else {
    sol.insert(c, p.route, p.pos);
  }
}

}  // namespace

Solution repair_greedy(PartialSolution part, Rng& rng, const NeighborLists* granular) {
  Solution& sol = part.solution;
  auto& order = part.absent;
  for (std::size_t i = order.size(); i > 1; --i) {
    const int j = uniform_int(rng, 0, static_cast<int>(i) - 1);
    std::swap(order[i - 1], order[static_cast<std::size_t>(j)]);
  }
  std::vector<int> routes;
  for (int c : order) {
    Placement best;
    candidate_routes(sol, c, granular, routes);
    for (int r : routes) {
      const Placement p = best_in_route(sol, c, r);
      if (p.delta < best.delta) best = p;
    }
    const Cost singleton = 2 * sol.instance().cost(0, c);
    if (singleton < best.delta) best = {singleton, -1, 0};
    apply(sol, c, best);
  }
  sol.prune_empty_routes();
  return std::move(part.solution);
}

Solution repair_regret2(PartialSolution part, const NeighborLists* granular) {
  Solution& sol = part.solution;
  std::vector<int> remaining = part.absent;
  std::sort(remaining.begin(), remaining.end());
  std::vector<int> routes;
  while (!remaining.empty()) {
    std::size_t pick = 0;
    Cost pick_regret = -1;
    Placement pick_place;
    for (std::size_t k = 0; k < remaining.size(); ++k) {
      const int c = remaining[k];
      Placement best, second;
      candidate_routes(sol, c, granular, routes);
      for (int r : routes) {
        const Placement p = best_in_route(sol, c, r);
        if (p.delta < best.delta) {
          second = best;
          best = p;
        } else if (p.delta < second.delta) {
          second = p;
        }
      }
      const Placement singleton{2 * sol.instance().cost(0, c), -1, 0};
      if (singleton.delta < best.delta) {
        second = best;
        best = singleton;
      } else if (singleton.delta < second.delta) {
        second = singleton;
      }
      const Cost regret = second.delta >= kNoOption ? kNoOption : second.delta - best.delta;
      if (regret > pick_regret) {
        pick = k;
        pick_regret = regret;
        pick_place = best;
      }
    }
    apply(sol, remaining[pick], pick_place);
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  sol.prune_empty_routes();
  return std::move(part.solution);
}

void LnsConfig::check() const {
  if (max_iterations < 0) throw std::invalid_argument("max_iterations must be non-negative");
  if (sa_initial_temp && !(*sa_initial_temp > 0)) throw std::invalid_argument("initial temperature must be positive");
  if (sa_final_temp && !(*sa_final_temp > 0)) throw std::invalid_argument("final temperature must be positive");
  if (sa_initial_temp && sa_final_temp && *sa_final_temp > *sa_initial_temp) {
    throw std::invalid_argument("final temperature exceeds initial temperature");
  }
  if (random_remove_cap < 1) throw std::invalid_argument("random_remove_cap must be at least 1");
  if (random_remove_floor < 0) throw std::invalid_argument("random_remove_floor must be non-negative");
  if (!(random_remove_fraction > 0 && random_remove_fraction <= 1)) {
    throw std::invalid_argument("random_remove_fraction must lie in (0, 1]");
  }
  if (neighbors < 1) throw std::invalid_argument("neighbors must be at least 1");
}

std::string RunTrace::to_csv() const {
  std::string out = "iteration,current,best,accepted,removed,temperature,shortfall\n";
  for (const auto& r : iterations) {
    out += fmt::format("{},{},{},{},{},{:.6g},{}\n", r.iteration, r.current, r.best, r.accepted ? 1 : 0, r.removed,
                       r.temperature, r.shortfall);
  }
  return out;
}

LnsResult run_lns(const Instance& instance, const Solution& start, const LnsConfig& config, DestroyGuide* guide) {
  config.check();
  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); };

  LnsResult result{start, {}};
  RunTrace& trace = result.trace;
  trace.start_cost = start.total_cost();
  if (config.max_iterations == 0) {
    trace.wall_time_s = elapsed();
    return result;
  }

  Rng rng(config.seed);
  const NeighborLists lists(instance, config.neighbors);
  const NeighborLists* granular = instance.customers() > Instance::kMatrixCacheLimit ? &lists : nullptr;
  Solution current = start;
  Solution& best = result.best;
  ShakeState shake = ShakeState::initial(start);

  const double base = static_cast<double>(std::max<Cost>(start.total_cost(), 1));
  const double t_start = config.sa_initial_temp.value_or(1e-3 * base);
  const double t_end = std::min(config.sa_final_temp.value_or(1e-4 * base), t_start);
  const int n = instance.customers();
  const int by_fraction = static_cast<int>(std::ceil(config.random_remove_fraction * n));
  const int max_remove = std::clamp(std::max(by_fraction, std::min(n, config.random_remove_floor)), 1,
                                    config.random_remove_cap);

  std::vector<int> seed_order(static_cast<std::size_t>(n));
  std::iota(seed_order.begin(), seed_order.end(), 1);
  std::unordered_map<int, bool> memo;
  NodePredicate allowed = [](int) { return true; };
  if (guide) {
    allowed = [&](int c) {
      auto [it, fresh] = memo.try_emplace(c, false);
      if (fresh) it->second = guide->allowed(c, rng);
      return it->second;
    };
  }

  trace.iterations.reserve(static_cast<std::size_t>(std::min<long>(config.max_iterations, 1 << 20)));
  bool new_best = false;
  for (long it = 0; it < config.max_iterations; ++it) {
    if (config.time_limit_s > 0 && elapsed() >= config.time_limit_s) {
      trace.hit_time_limit = true;
      break;
    }
    if (guide) guide->begin_iteration(it, current, new_best);
    new_best = false;
    memo.clear();

    const double progress = static_cast<double>(it) / static_cast<double>(config.max_iterations);
    const double temperature = t_start * std::pow(t_end / t_start, progress);

    IterationRecord rec;
    rec.iteration = it;
    PartialSolution part = [&] {
      if (uniform_int(rng, 0, 1) == 0) {
        rec.destroy = DestroyKind::Random;
        return destroy_random(current, uniform_int(rng, 1, max_remove), allowed, rng);
      }
      rec.destroy = DestroyKind::String;
      for (int k = 0; k < n; ++k) {
        const int j = uniform_int(rng, k, n - 1);
        std::swap(seed_order[static_cast<std::size_t>(k)], seed_order[static_cast<std::size_t>(j)]);
        const int seed = seed_order[static_cast<std::size_t>(k)];
        if (allowed(seed)) return destroy_string(current, seed, shake, lists, allowed, rng);
      }
      return PartialSolution{current, {}, 1};
    }();
    rec.removed = static_cast<int>(part.absent.size());
    rec.shortfall = part.shortfall;
    const std::vector<int> removed = part.absent;
    if (config.record_removed) rec.removed_ids = removed;

    Solution candidate = config.repair == RepairKind::Greedy ? repair_greedy(std::move(part), rng, granular)
                                                             : repair_regret2(std::move(part), granular);
    run_local_search(candidate, lists, std::span<const int>(removed));

    const Cost delta = candidate.total_cost() - current.total_cost();
    update_omega(shake, removed, classify(delta));
    const bool accept = delta <= 0 || uniform01(rng) < std::exp(-static_cast<double>(delta) / temperature);
    rec.candidate = candidate.total_cost();
    rec.accepted = accept;
    rec.temperature = temperature;
    if (accept) {
      current = std::move(candidate);
      if (current.total_cost() < best.total_cost()) {
        best = current;
        new_best = true;
      }
    }
    rec.current = current.total_cost();
    rec.best = best.total_cost();
    trace.iterations.push_back(std::move(rec));
  }
  trace.wall_time_s = elapsed();
  return result;
}

}  // namespace glns
