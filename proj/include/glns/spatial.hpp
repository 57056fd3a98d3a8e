#pragma once

#include <span>
#include <vector>

#include "glns/instance.hpp"

namespace glns {

/// For each point, the indices of its `k` nearest other points ordered by
/// (rounded distance, index). Uses a uniform bucket grid, so the cost is close
/// to linear for spread-out inputs.
std::vector<std::vector<int>> k_nearest(std::span<const Point> points, int k);

/// Indices of the `count` points nearest to `origin` by (rounded distance, index),
/// returned in ascending index order.
std::vector<int> nearest_to(std::span<const Point> points, const Point& origin, int count);

}  // namespace glns
