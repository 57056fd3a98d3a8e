#pragma once

#include <optional>
#include <string_view>

#include "glns/instance.hpp"
#include "glns/solution.hpp"

namespace glns {

enum class Constructor { ClarkeWright, NearestNeighbor };

std::string_view to_string(Constructor kind);
std::optional<Constructor> parse_constructor(std::string_view text);

/// Parallel savings: start from out-and-back routes and merge route endpoints
/// in decreasing s(i,j) = d(0,i) + d(0,j) - d(i,j) while the merged load fits.
/// Ties go to the lexicographically smaller (min, max) pair. Only positive
/// savings merge. Above Instance::kMatrixCacheLimit customers the savings list
/// is restricted to each customer's 50 nearest neighbours.
/// With `polish`, every route then gets a 2-opt pass.
Solution clarke_wright(const Instance& instance, bool polish = true);

/// Greedy chain from the depot to the nearest unvisited customer that still
/// fits; a new route opens when none fits.
Solution nearest_neighbor(const Instance& instance);

Solution construct(const Instance& instance, Constructor kind);

}  // namespace glns
