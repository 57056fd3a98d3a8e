#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "glns/instance.hpp"

namespace glns {

/// Customer sequence of one vehicle; the depot is implicit at both ends.
struct Route {
  std::vector<int> visits;
  int load = 0;
  Cost cost = 0;
};

/// A set of routes bound to an instance with incrementally maintained cost.
///
/// The mutators assume a well-formed solution (each present customer appears
/// once). Solutions assembled from external data may violate that; use
/// validate() before mutating them.
class Solution {
 public:
  explicit Solution(const Instance& instance);
  /// Builds routes from raw visit lists. Throws std::out_of_range for indices
  /// outside 1..N; duplicates and missing customers are left for validate().
  Solution(const Instance& instance, const std::vector<std::vector<int>>& routes);

  const Instance& instance() const noexcept { return *instance_; }
  const std::vector<Route>& routes() const noexcept { return routes_; }
  const Route& route(int r) const { return routes_[static_cast<std::size_t>(r)]; }
  int route_count() const noexcept { return static_cast<int>(routes_.size()); }
  Cost total_cost() const noexcept { return total_cost_; }

  bool contains(int customer) const { return route_of_[static_cast<std::size_t>(customer)] >= 0; }
  /// -1 when the customer is absent.
  int route_of(int customer) const { return route_of_[static_cast<std::size_t>(customer)]; }
  int position_of(int customer) const { return position_of_[static_cast<std::size_t>(customer)]; }
  /// Neighbouring nodes in the route, 0 for the depot.
  int prev_of(int customer) const;
  int next_of(int customer) const;

  /// Cost change of inserting `customer` at `pos` (0..size) of route `r`.
  Cost insertion_delta(int customer, int r, int pos) const;
  /// Cost change of removing a present customer (negative or zero in metric spaces).
  Cost removal_delta(int customer) const;

  void insert(int customer, int r, int pos);
  /// Appends a singleton route and returns its index.
  int add_route(int customer);
  void remove(int customer);
  /// Reverses visits[i..j] (inclusive) of route r.
  void reverse(int r, int i, int j);
  /// Exchanges two present customers (any routes, any positions).
  void exchange(int a, int b);
  /// Drops empty routes; indices of the surviving routes may change.
  void prune_empty_routes();

 private:
  void reindex(int r, int from);
  Cost route_cost(const std::vector<int>& visits) const;

  const Instance* instance_;
  std::vector<Route> routes_;
  std::vector<int> route_of_;
  std::vector<int> position_of_;
  Cost total_cost_ = 0;
};

/// A solution with customers removed and awaiting reinsertion.
struct PartialSolution {
  Solution solution;
  std::vector<int> absent;
  /// Customers requested but not removable (prohibited or unavailable).
  int shortfall = 0;
};

struct Violation {
  enum class Kind { DuplicateVisit, Unvisited, CapacityExceeded, CostMismatch };
  Kind kind;
  int customer = -1;
  int route = -1;
  Cost value = 0;

  std::string describe() const;
  friend bool operator==(const Violation&, const Violation&) = default;
};

/// Empty iff the solution is feasible and its tracked cost is exact.
std::vector<Violation> validate(const Solution& solution);

/// Full from-scratch cost.
Cost recompute_cost(const Solution& solution);

/// Percentage gap of `cost` over `bks`; throws std::domain_error if bks <= 0.
double gap(double cost, Cost bks);
/// Three-decimal rendering used in reports ("0.083").
std::string format_gap(double gap_percent);

/// Undirected edges (min, max) of all routes, deduplicated and sorted.
std::vector<std::pair<int, int>> solution_edges(const Solution& solution);
/// All consecutive node pairs including depot legs, with multiplicity.
std::vector<std::pair<int, int>> solution_edge_list(const Solution& solution);

/// CVRPLIB solution text: "Route #i: c1 c2 ..." lines followed by "Cost <int>".
std::string format_solution(const Solution& solution);
Solution parse_solution(const Instance& instance, std::string_view text);
void write_solution(const Solution& solution, const std::filesystem::path& path);
Solution read_solution(const Instance& instance, const std::filesystem::path& path);

struct SolutionMeta {
  std::optional<double> gap;
  std::optional<std::uint64_t> seed;
  std::optional<double> wall_time_s;
};

/// JSON document with routes, cost, and the optional metadata.
std::string solution_to_json(const Solution& solution, const SolutionMeta& meta = {});

}  // namespace glns
