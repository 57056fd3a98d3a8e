#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "glns/instance.hpp"
#include "glns/solution.hpp"

namespace testing {

inline const std::filesystem::path kFixtures = GLNS_FIXTURE_DIR;

/// Instance from parallel coordinate / demand lists; index 0 is the depot.
inline glns::Instance make_instance(const std::vector<glns::Point>& pts, const std::vector<int>& demands, int capacity,
                                    const std::string& name = "T") {
  return glns::Instance(name, pts, demands, capacity);
}

/// Customers on a horizontal line at x = 10, 20, ...; depot at the origin.
inline glns::Instance line_instance(int customers, int capacity, int demand = 1) {
  std::vector<glns::Point> pts{{0, 0}};
  std::vector<int> dem{0};
  for (int i = 1; i <= customers; ++i) {
    pts.push_back({10.0 * i, 0});
    dem.push_back(demand);
  }
  return glns::Instance("line", pts, dem, capacity);
}

inline std::vector<std::vector<int>> visits(const glns::Solution& s) {
  std::vector<std::vector<int>> out;
  for (const auto& r : s.routes()) out.push_back(r.visits);
  return out;
}

}  // namespace testing
