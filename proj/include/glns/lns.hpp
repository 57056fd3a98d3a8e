#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "glns/instance.hpp"
#include "glns/local_search.hpp"
#include "glns/random.hpp"
#include "glns/solution.hpp"

namespace glns {

/// Per-customer disruption intensity (omega) for string removals.
struct ShakeState {
  std::vector<int> omega;  // indexed by node; entry 0 unused
  int omega_min = 1;
  int omega_max = 1;

  /// omega_i = max(1, ceil(0.05 * average route length)), bounded by
  /// [1, longest route of `start`].
  static ShakeState initial(const Solution& start);
};

enum class Outcome { Improved, NearIdentical, Worse };

/// Classifies a cost change: < 0 improved, == 0 near-identical, > 0 worse.
Outcome classify(Cost delta) noexcept;

/// Worse raises omega for the touched customers, NearIdentical lowers it,
/// Improved leaves it alone; always clamped to [omega_min, omega_max].
void update_omega(ShakeState& shake, std::span<const int> touched, Outcome outcome);

/// Whether a customer may be removed in the current destroy call.
using NodePredicate = std::function<bool(int)>;

/// Removes min(n_remove, #allowed) customers chosen uniformly among allowed ones.
/// Candidates are drawn in random order and the predicate is asked once per
/// candidate, so stochastic predicates behave as a per-call decision.
PartialSolution destroy_random(const Solution& solution, int n_remove, const NodePredicate& allowed, Rng& rng);

/// String removal around `seed`: up to omega[seed] allowed customers forming a
/// window around the seed in its route (prohibited customers are skipped and
/// the window extends past them), then further strings of the same budget
/// started from the seed's nearest neighbours in routes not yet visited. The
/// number of strings is ceil(sqrt(omega[seed])).
/// Throws std::invalid_argument if `seed` is absent or not allowed.
PartialSolution destroy_string(const Solution& solution, int seed, const ShakeState& shake,
                               const NeighborLists& lists, const NodePredicate& allowed, Rng& rng);

/// Reinserts absent customers in random order, each at the cheapest feasible
/// position over all routes or a new singleton route (used only when strictly
/// cheaper). With `granular`, only routes holding one of the customer's listed
/// neighbours are scanned. Empty routes are pruned.
Solution repair_greedy(PartialSolution part, Rng& rng, const NeighborLists* granular = nullptr);

/// Regret-2 insertion: repeatedly inserts the customer with the largest gap
/// between its best and second-best route (a singleton route counts as an
/// option); ties go to the lowest customer index.
Solution repair_regret2(PartialSolution part, const NeighborLists* granular = nullptr);

enum class RepairKind { Greedy, Regret2 };

struct LnsConfig {
  long max_iterations = 100000;      // core iterations
  double time_limit_s = 0.0;         // <= 0: no wall-clock limit
  std::optional<double> sa_initial_temp;  // default 1e-3 of the start cost
  std::optional<double> sa_final_temp;    // default 1e-4 of the start cost
  // destroy_random size is uniform in [1, min(cap, max(ceil(fraction * N), min(N, floor)))]
  int random_remove_cap = 100;
  double random_remove_fraction = 0.1;
  int random_remove_floor = 10;
  int neighbors = NeighborLists::kDefaultSize;
  RepairKind repair = RepairKind::Greedy;
  std::uint32_t seed = 0;
  bool record_removed = false;       // keep removed ids per iteration in the trace

  /// Throws std::invalid_argument when the settings are inconsistent.
  void check() const;
};

/// Hook through which the guidance layer restricts the destroy phase.
class DestroyGuide {
 public:
  virtual ~DestroyGuide() = default;
  /// Called at the start of every iteration with the incumbent.
  virtual void begin_iteration(long iteration, const Solution& current, bool new_best) = 0;
  /// Per (customer, destroy call) decision; may consume the run RNG.
  virtual bool allowed(int customer, Rng& rng) = 0;
};

enum class DestroyKind { Random, String };

struct IterationRecord {
  long iteration = 0;
  Cost current = 0;
  Cost best = 0;
  Cost candidate = 0;
  bool accepted = false;
  DestroyKind destroy = DestroyKind::Random;
  int removed = 0;
  int shortfall = 0;
  double temperature = 0.0;
  std::vector<int> removed_ids;

  friend bool operator==(const IterationRecord&, const IterationRecord&) = default;
};

struct RunTrace {
  std::vector<IterationRecord> iterations;
  Cost start_cost = 0;
  double wall_time_s = 0.0;
  bool hit_time_limit = false;

  /// iteration,current,best,accepted,removed,temperature
  std::string to_csv() const;
};

struct LnsResult {
  Solution best;
  RunTrace trace;
};

/// Destroy (50/50 random or string) -> repair -> localized local search ->
/// simulated-annealing acceptance, for max_iterations or until time_limit_s.
/// A null guide allows every customer. Deterministic for a fixed seed unless
/// the time limit binds.
LnsResult run_lns(const Instance& instance, const Solution& start, const LnsConfig& config,
                  DestroyGuide* guide = nullptr);

}  // namespace glns
