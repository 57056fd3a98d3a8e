#include "glns/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <utility>

namespace glns {

namespace {

struct Grid {
  double min_x = 0, min_y = 0, cell = 1;
  int side = 1;
  std::vector<std::vector<int>> buckets;

  explicit Grid(std::span<const Point> points) {
    double max_x = 0, max_y = 0;
    if (!points.empty()) {
      min_x = max_x = points[0].x;
      min_y = max_y = points[0].y;
    }
    for (const auto& p : points) {
      min_x = std::min(min_x, p.x);
      max_x = std::max(max_x, p.x);
      min_y = std::min(min_y, p.y);
      max_y = std::max(max_y, p.y);
    }
    side = std::max(1, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(points.size()) / 2.0))));
    const double extent = std::max(max_x - min_x, max_y - min_y);
    cell = extent > 0 ? extent / side : 1.0;
    buckets.resize(static_cast<std::size_t>(side) * static_cast<std::size_t>(side));
    for (std::size_t i = 0; i < points.size(); ++i) {
      const auto [cx, cy] = cell_of(points[i]);
      buckets[static_cast<std::size_t>(cy * side + cx)].push_back(static_cast<int>(i));
    }
  }

  std::pair<int, int> cell_of(const Point& p) const {
    const int cx = std::clamp(static_cast<int>((p.x - min_x) / cell), 0, side - 1);
    const int cy = std::clamp(static_cast<int>((p.y - min_y) / cell), 0, side - 1);
    return {cx, cy};
  }

  // Visits the cells at Chebyshev distance exactly r from (cx, cy).
  template <typename F>
  void ring(int cx, int cy, int r, F&& visit) const {
    for (int y = cy - r; y <= cy + r; ++y) {
      if (y < 0 || y >= side) continue;
      const bool edge_row = (y == cy - r || y == cy + r);
      const int step = edge_row ? 1 : 2 * r;
      for (int x = cx - r; x <= cx + r; x += std::max(step, 1)) {
        if (x >= 0 && x < side) {
          for (int idx : buckets[static_cast<std::size_t>(y * side + x)]) visit(idx);
        }
      }
    }
  }
};

using Candidate = std::pair<Cost, int>;  // (rounded distance, index); max-heap top is the worst kept

std::vector<int> query(const Grid& grid, std::span<const Point> points, const Point& origin, int exclude,
                       std::size_t k) {
  std::priority_queue<Candidate> heap;
  const auto [cx, cy] = grid.cell_of(origin);
  for (int r = 0; r <= grid.side; ++r) {
    grid.ring(cx, cy, r, [&](int idx) {
      if (idx == exclude) return;
      const Candidate c{rounded_distance(origin, points[static_cast<std::size_t>(idx)]), idx};
      if (heap.size() < k) {
        heap.push(c);
      } else if (c < heap.top()) {
        heap.pop();
        heap.push(c);
      }
    });
    if (heap.size() == k) {
      const auto bound = static_cast<Cost>(std::floor(r * grid.cell + 0.5));
      if (bound > heap.top().first) break;
    }
  }
  std::vector<int> out(heap.size());
  for (std::size_t i = out.size(); i-- > 0;) {
    out[i] = heap.top().second;
    heap.pop();
  }
  return out;
}

}  // namespace

std::vector<std::vector<int>> k_nearest(std::span<const Point> points, int k) {
  std::vector<std::vector<int>> out(points.size());
  if (points.empty() || k <= 0) return out;
  const auto kk = std::min(static_cast<std::size_t>(k), points.size() - 1);
  if (kk == 0) return out;
  const Grid grid(points);
  for (std::size_t i = 0; i < points.size(); ++i) {
    out[i] = query(grid, points, points[i], static_cast<int>(i), kk);
  }
  return out;
}

std::vector<int> nearest_to(std::span<const Point> points, const Point& origin, int count) {
  const auto kk = std::min(static_cast<std::size_t>(std::max(count, 0)), points.size());
  if (kk == 0) return {};
  std::vector<Candidate> all(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) all[i] = {rounded_distance(origin, points[i]), static_cast<int>(i)};
  std::nth_element(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(kk - 1), all.end());
  std::vector<int> out;
  out.reserve(kk);
  for (std::size_t i = 0; i < kk; ++i) out.push_back(all[i].second);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace glns
