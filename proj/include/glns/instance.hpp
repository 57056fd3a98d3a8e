#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace glns {

using Cost = std::int64_t;

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Depot placement classes used by the X benchmark generator.
enum class DepotMode { Central, Edge, Random };

std::string_view to_string(DepotMode mode);
std::optional<DepotMode> parse_depot_mode(std::string_view text);

/// Thrown by the CVRPLIB readers. `line()` is 1-based; 0 means "end of input".
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& message);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Rounded Euclidean distance (nearest integer, halves rounded up).
Cost rounded_distance(const Point& a, const Point& b) noexcept;

/// An immutable CVRP instance. Node 0 is the depot, nodes 1..N are customers.
///
/// Distances are rounded Euclidean. For instances up to kMatrixCacheLimit
/// customers the full matrix is precomputed; larger instances compute each
/// distance on demand.
class Instance {
 public:
  static constexpr int kMatrixCacheLimit = 2000;

  /// `points[0]` is the depot; `demands[0]` is ignored and stored as 0.
  /// Throws std::invalid_argument when an invariant does not hold.
  Instance(std::string name, std::vector<Point> points, std::vector<int> demands,
           int capacity, std::optional<DepotMode> depot_mode = std::nullopt);

  const std::string& name() const noexcept { return name_; }
  int customers() const noexcept { return static_cast<int>(points_.size()) - 1; }
  int nodes() const noexcept { return static_cast<int>(points_.size()); }
  int capacity() const noexcept { return capacity_; }
  int demand(int node) const { return demands_[static_cast<std::size_t>(node)]; }
  const Point& point(int node) const { return points_[static_cast<std::size_t>(node)]; }
  const std::vector<Point>& points() const noexcept { return points_; }
  const std::vector<int>& demands() const noexcept { return demands_; }
  std::optional<DepotMode> depot_mode() const noexcept { return depot_mode_; }
  Cost total_demand() const noexcept { return total_demand_; }
  bool has_distance_cache() const noexcept { return !matrix_.empty(); }

  /// Bounds-checked distance; throws std::out_of_range.
  Cost distance(int i, int j) const;

  /// Unchecked distance for inner loops. Indices must be in [0, nodes()).
  Cost cost(int i, int j) const noexcept {
    if (!matrix_.empty()) {
      return matrix_[static_cast<std::size_t>(i) * points_.size() + static_cast<std::size_t>(j)];
    }
    return rounded_distance(points_[static_cast<std::size_t>(i)], points_[static_cast<std::size_t>(j)]);
  }

 private:
  std::string name_;
  std::vector<Point> points_;
  std::vector<int> demands_;
  int capacity_;
  std::optional<DepotMode> depot_mode_;
  Cost total_demand_ = 0;
  std::vector<std::int32_t> matrix_;
};

/// Parses a CVRPLIB/TSPLIB document (EUC_2D only, single depot).
Instance parse_instance(std::string_view text);
Instance read_instance(const std::filesystem::path& path);

/// Serializes to CVRPLIB text; parse_instance(format_instance(x)) reproduces x.
std::string format_instance(const Instance& instance);
void write_instance(const Instance& instance, const std::filesystem::path& path);

struct GeneratorOptions {
  std::uint64_t seed = 0;
  int customers = 100;
  DepotMode depot = DepotMode::Central;
  int demand_min = 1;
  int demand_max = 10;
  int capacity = 100;
};

/// Uniform customers on the [0,1000]^2 integer grid; depot at the centre,
/// the (0,0) corner, or uniformly placed. Pure function of its options.
Instance generate_instance(const GeneratorOptions& options);

/// Best-known solution costs keyed by instance name.
class BksRegistry {
 public:
  BksRegistry() = default;

  /// The table bundled with the library (X and B sets).
  static const BksRegistry& bundled();
  /// Parses `name<TAB>cost` lines; '#' starts a comment. Throws ParseError.
  static BksRegistry parse(std::string_view text);
  static BksRegistry read(const std::filesystem::path& path);

  /// nullopt for unknown names; never a zero placeholder.
  std::optional<Cost> find(std::string_view name) const;
  void insert(std::string name, Cost cost);
  std::size_t size() const noexcept { return table_.size(); }
  const std::map<std::string, Cost, std::less<>>& entries() const noexcept { return table_; }

 private:
  std::map<std::string, Cost, std::less<>> table_;
};

}  // namespace glns
