#pragma once

#include <span>
#include <vector>

#include "glns/instance.hpp"
#include "glns/solution.hpp"

namespace glns {

/// For every node (depot included) its k nearest other nodes, ascending by
/// (distance, index). Used to prune move evaluation to nearby pairs.
class NeighborLists {
 public:
  static constexpr int kDefaultSize = 10;

  NeighborLists(const Instance& instance, int k = kDefaultSize);

  std::span<const int> of(int node) const { return lists_[static_cast<std::size_t>(node)]; }
  int k() const noexcept { return k_; }

 private:
  int k_;
  std::vector<std::vector<int>> lists_;
};

/// First-improvement 2-opt on route r until no improving reversal remains.
/// Returns true if the route changed.
bool two_opt(Solution& solution, int r);

/// One first-improvement sweep of inter-route customer relocation over the
/// given customers (all customers when empty). Strictly improving moves only.
bool relocate(Solution& solution, const NeighborLists& lists, std::span<const int> customers = {});

/// One first-improvement sweep of inter-route customer exchange.
bool swap_move(Solution& solution, const NeighborLists& lists, std::span<const int> customers = {});

/// Alternates two_opt / relocate / swap_move until none improves. `trace`, when
/// given, receives the cost after every round. Returns the total improvement.
Cost run_local_search(Solution& solution, const NeighborLists& lists, std::vector<Cost>* trace = nullptr);

/// Same fixpoint restricted to the neighbourhood of `focus`: 2-opt on the
/// routes they occupy, relocate/swap driven from them. Customers touched by an
/// applied move join the focus.
Cost run_local_search(Solution& solution, const NeighborLists& lists, std::span<const int> focus);

}  // namespace glns
