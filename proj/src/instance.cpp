#include "glns/instance.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <fmt/format.h>

namespace glns {

namespace detail {
extern const std::string_view kBundledBksTable;
}

std::string_view to_string(DepotMode mode) {
  switch (mode) {
    case DepotMode::Central: return "Central";
    case DepotMode::Edge: return "Edge";
    case DepotMode::Random: return "Random";
  }
  return "Random";
}

std::optional<DepotMode> parse_depot_mode(std::string_view text) {
  std::string lower;
  for (char c : text) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (lower == "central" || lower == "c") return DepotMode::Central;
  if (lower == "edge" || lower == "e") return DepotMode::Edge;
  if (lower == "random" || lower == "r") return DepotMode::Random;
  return std::nullopt;
}

ParseError::ParseError(std::size_t line, const std::string& message)
    : std::runtime_error(line == 0 ? message : fmt::format("line {}: {}", line, message)), line_(line) {}

Cost rounded_distance(const Point& a, const Point& b) noexcept {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return static_cast<Cost>(std::floor(std::sqrt(dx * dx + dy * dy) + 0.5));
}

Instance::Instance(std::string name, std::vector<Point> points, std::vector<int> demands, int capacity,
                   std::optional<DepotMode> depot_mode)
    : name_(std::move(name)),
      points_(std::move(points)),
      demands_(std::move(demands)),
      capacity_(capacity),
      depot_mode_(depot_mode) {
  if (points_.empty()) throw std::invalid_argument("instance needs at least a depot");
  if (points_.size() != demands_.size()) throw std::invalid_argument("points and demands differ in length");
  if (capacity_ <= 0) throw std::invalid_argument("capacity must be positive");
  demands_[0] = 0;
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!std::isfinite(points_[i].x) || !std::isfinite(points_[i].y)) {
      throw std::invalid_argument(fmt::format("node {} has non-finite coordinates", i));
    }
    if (i == 0) continue;
    if (demands_[i] <= 0) throw std::invalid_argument(fmt::format("customer {} has non-positive demand", i));
    if (demands_[i] > capacity_) {
      throw std::invalid_argument(
          fmt::format("demand exceeds capacity: customer {} demand {} > {}", i, demands_[i], capacity_));
    }
    total_demand_ += demands_[i];
  }

  if (customers() <= kMatrixCacheLimit) {
    const std::size_t n = points_.size();
    matrix_.resize(n * n);
    for (std::size_t i = 0; i < n; ++i) {
      matrix_[i * n + i] = 0;
      for (std::size_t j = i + 1; j < n; ++j) {
        const auto d = static_cast<std::int32_t>(rounded_distance(points_[i], points_[j]));
        matrix_[i * n + j] = d;
        matrix_[j * n + i] = d;
      }
    }
  }
}

Cost Instance::distance(int i, int j) const {
  if (i < 0 || j < 0 || i >= nodes() || j >= nodes()) {
    throw std::out_of_range(fmt::format("node index out of range: ({}, {}) with {} nodes", i, j, nodes()));
  }
  return cost(i, j);
}

// ---------------------------------------------------------------------------
// CVRPLIB reader

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename T>
std::optional<T> to_number(std::string_view s) {
  T value{};
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return value;
}

std::optional<double> to_double(std::string_view s) {
  // from_chars for double is missing on some toolchains still in use.
  std::string buf(s);
  char* end = nullptr;
  const double v = std::strtod(buf.c_str(), &end);
  if (buf.empty() || end != buf.c_str() + buf.size()) return std::nullopt;
  return v;
}

enum class Section { Header, Coords, Demands, Depots, Done };

bool is_keyword_line(std::string_view line) {
  return !line.empty() && std::isalpha(static_cast<unsigned char>(line.front()));
}

}  // namespace

Instance parse_instance(std::string_view text) {
  std::string name;
  std::string comment;
  std::optional<int> dimension;
  std::optional<int> capacity;
  std::vector<std::optional<Point>> coords;
  std::vector<std::optional<int>> demands;
  std::vector<std::size_t> demand_lines;
  std::vector<int> depots;
  bool saw_coords = false, saw_demands = false, saw_depots = false;

  auto require_dimension = [&](std::size_t line) {
    if (!dimension) throw ParseError(line, "section before DIMENSION");
    if (coords.empty()) {
      coords.resize(static_cast<std::size_t>(*dimension) + 1);
      demands.resize(static_cast<std::size_t>(*dimension) + 1);
      demand_lines.resize(static_cast<std::size_t>(*dimension) + 1, 0);
    }
  };

  Section section = Section::Header;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size() && section != Section::Done) {
    const std::size_t nl = text.find('\n', pos);
    const std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty()) continue;

    if (is_keyword_line(line)) {
      std::string_view key = line;
      std::string_view value;
      if (const auto colon = line.find(':'); colon != std::string_view::npos) {
        key = trim(line.substr(0, colon));
        value = trim(line.substr(colon + 1));
      } else if (const auto sp = line.find_first_of(" \t"); sp != std::string_view::npos) {
        key = trim(line.substr(0, sp));
        value = trim(line.substr(sp + 1));
      }

      if (key == "NODE_COORD_SECTION") {
        require_dimension(line_no);
        section = Section::Coords;
        saw_coords = true;
      } else if (key == "DEMAND_SECTION") {
        require_dimension(line_no);
        section = Section::Demands;
        saw_demands = true;
      } else if (key == "DEPOT_SECTION") {
        require_dimension(line_no);
        section = Section::Depots;
        saw_depots = true;
      } else if (key == "EOF") {
        section = Section::Done;
      } else if (key == "NAME") {
        name = std::string(value);
        section = Section::Header;
      } else if (key == "COMMENT") {
        comment = std::string(value);
        section = Section::Header;
      } else if (key == "DIMENSION") {
        const auto v = to_number<int>(value);
        if (!v || *v < 1) throw ParseError(line_no, fmt::format("malformed DIMENSION '{}'", value));
        dimension = *v;
        section = Section::Header;
      } else if (key == "CAPACITY") {
        const auto v = to_number<int>(value);
        if (!v || *v < 1) throw ParseError(line_no, fmt::format("malformed CAPACITY '{}'", value));
        capacity = *v;
        section = Section::Header;
      } else if (key == "EDGE_WEIGHT_TYPE") {
        if (value != "EUC_2D") throw ParseError(line_no, fmt::format("unsupported EDGE_WEIGHT_TYPE '{}'", value));
        section = Section::Header;
      } else if (key == "TYPE") {
        if (value != "CVRP") throw ParseError(line_no, fmt::format("unsupported TYPE '{}'", value));
        section = Section::Header;
      } else {
        // Unknown header keys (e.g. DISTANCE, VEHICLES) are tolerated.
        section = Section::Header;
      }
      continue;
    }

    const auto tokens = split_ws(line);
    switch (section) {
      case Section::Header:
        throw ParseError(line_no, fmt::format("unexpected data line '{}'", line));
      case Section::Coords: {
        if (tokens.size() != 3) throw ParseError(line_no, "coordinate line needs 'id x y'");
        const auto id = to_number<int>(tokens[0]);
        const auto x = to_double(tokens[1]);
        const auto y = to_double(tokens[2]);
        if (!id || !x || !y) throw ParseError(line_no, fmt::format("malformed coordinate line '{}'", line));
        if (*id < 1 || *id > *dimension) throw ParseError(line_no, fmt::format("node id {} out of range", *id));
        if (coords[static_cast<std::size_t>(*id)]) throw ParseError(line_no, fmt::format("duplicate node id {}", *id));
        if (!std::isfinite(*x) || !std::isfinite(*y)) throw ParseError(line_no, "non-finite coordinate");
        coords[static_cast<std::size_t>(*id)] = Point{*x, *y};
        break;
      }
      case Section::Demands: {
        if (tokens.size() != 2) throw ParseError(line_no, "demand line needs 'id demand'");
        const auto id = to_number<int>(tokens[0]);
        const auto q = to_number<int>(tokens[1]);
        if (!id || !q) throw ParseError(line_no, fmt::format("malformed demand line '{}'", line));
        if (*id < 1 || *id > *dimension) throw ParseError(line_no, fmt::format("node id {} out of range", *id));
        if (demands[static_cast<std::size_t>(*id)]) throw ParseError(line_no, fmt::format("duplicate demand for node {}", *id));
        if (*q < 0) throw ParseError(line_no, "negative demand");
        demands[static_cast<std::size_t>(*id)] = *q;
        demand_lines[static_cast<std::size_t>(*id)] = line_no;
        break;
      }
      case Section::Depots: {
        for (auto tok : tokens) {
          const auto id = to_number<int>(tok);
          if (!id) throw ParseError(line_no, fmt::format("malformed depot id '{}'", tok));
          if (*id == -1) {
            section = Section::Header;
            break;
          }
          if (*id < 1 || *id > *dimension) throw ParseError(line_no, fmt::format("depot id {} out of range", *id));
          depots.push_back(*id);
        }
        break;
      }
      case Section::Done: break;
    }
  }

  if (!dimension) throw ParseError(0, "missing DIMENSION");
  if (!capacity) throw ParseError(0, "missing CAPACITY");
  if (!saw_coords) throw ParseError(0, "missing NODE_COORD_SECTION");
  if (!saw_demands) throw ParseError(0, "missing DEMAND_SECTION");
  if (!saw_depots) throw ParseError(0, "missing DEPOT_SECTION");
  if (depots.empty()) throw ParseError(0, "DEPOT_SECTION lists no depot");
  if (depots.size() > 1) throw ParseError(0, "multiple depots are not supported");

  const int depot = depots.front();
  for (int id = 1; id <= *dimension; ++id) {
    if (!coords[static_cast<std::size_t>(id)]) throw ParseError(0, fmt::format("missing coordinates for node {}", id));
    if (!demands[static_cast<std::size_t>(id)]) throw ParseError(0, fmt::format("missing demand for node {}", id));
    if (id != depot && *demands[static_cast<std::size_t>(id)] > *capacity) {
      throw ParseError(demand_lines[static_cast<std::size_t>(id)],
                       fmt::format("demand exceeds capacity: node {} demand {} > {}", id,
                                   *demands[static_cast<std::size_t>(id)], *capacity));
    }
    if (id != depot && *demands[static_cast<std::size_t>(id)] == 0) {
      throw ParseError(demand_lines[static_cast<std::size_t>(id)], fmt::format("customer node {} has zero demand", id));
    }
  }

  // Depot becomes index 0; customers keep their relative id order.
  std::vector<Point> points;
  std::vector<int> q;
  points.reserve(static_cast<std::size_t>(*dimension));
  q.reserve(static_cast<std::size_t>(*dimension));
  points.push_back(*coords[static_cast<std::size_t>(depot)]);
  q.push_back(0);
  for (int id = 1; id <= *dimension; ++id) {
    if (id == depot) continue;
    points.push_back(*coords[static_cast<std::size_t>(id)]);
    q.push_back(*demands[static_cast<std::size_t>(id)]);
  }

  std::optional<DepotMode> mode;
  if (const auto at = comment.find("depot="); at != std::string::npos) {
    const auto rest = std::string_view(comment).substr(at + 6);
    mode = parse_depot_mode(rest.substr(0, rest.find_first_of(" ,;)")));
  }
  return Instance(std::move(name), std::move(points), std::move(q), *capacity, mode);
}

Instance read_instance(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot open instance file {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  Instance inst = parse_instance(ss.str());
  if (inst.name().empty()) {
    return Instance(path.stem().string(), inst.points(), inst.demands(), inst.capacity(), inst.depot_mode());
  }
  return inst;
}

std::string format_instance(const Instance& instance) {
  std::string out;
  out += fmt::format("NAME : {}\n", instance.name());
  if (instance.depot_mode()) {
    out += fmt::format("COMMENT : (depot={})\n", to_string(*instance.depot_mode()));
  }
  out += "TYPE : CVRP\n";
  out += fmt::format("DIMENSION : {}\n", instance.nodes());
  out += "EDGE_WEIGHT_TYPE : EUC_2D\n";
  out += fmt::format("CAPACITY : {}\n", instance.capacity());
  out += "NODE_COORD_SECTION\n";
  for (int i = 0; i < instance.nodes(); ++i) {
    out += fmt::format("{}\t{}\t{}\n", i + 1, instance.point(i).x, instance.point(i).y);
  }
  out += "DEMAND_SECTION\n";
  for (int i = 0; i < instance.nodes(); ++i) {
    out += fmt::format("{}\t{}\n", i + 1, instance.demand(i));
  }
  out += "DEPOT_SECTION\n\t1\n\t-1\nEOF\n";
  return out;
}

void write_instance(const Instance& instance, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write instance file {}", path.string()));
  out << format_instance(instance);
}

Instance generate_instance(const GeneratorOptions& options) {
  if (options.customers < 1) throw std::invalid_argument("generator needs at least one customer");
  if (options.capacity < 1) throw std::invalid_argument("capacity must be positive");
  if (options.demand_min < 1 || options.demand_max < options.demand_min || options.demand_max > options.capacity) {
    throw std::invalid_argument("demand range must lie within [1, capacity]");
  }
  constexpr int kGrid = 1000;
  std::mt19937_64 rng(options.seed);
  std::uniform_int_distribution<int> coord(0, kGrid);
  std::uniform_int_distribution<int> demand(options.demand_min, options.demand_max);

  std::vector<Point> points(static_cast<std::size_t>(options.customers) + 1);
  std::vector<int> demands(points.size(), 0);
  switch (options.depot) {
    case DepotMode::Central: points[0] = {kGrid / 2.0, kGrid / 2.0}; break;
    case DepotMode::Edge: points[0] = {0.0, 0.0}; break;
    case DepotMode::Random: {
      const int x = coord(rng);
      const int y = coord(rng);
      points[0] = {static_cast<double>(x), static_cast<double>(y)};
      break;
    }
  }
  for (std::size_t i = 1; i < points.size(); ++i) {
    const int x = coord(rng);
    const int y = coord(rng);
    points[i] = {static_cast<double>(x), static_cast<double>(y)};
    demands[i] = demand(rng);
  }
  const char tag = to_string(options.depot).front();
  std::string name = fmt::format("G-n{}-{}-s{}", options.customers + 1, tag, options.seed);
  return Instance(std::move(name), std::move(points), std::move(demands), options.capacity, options.depot);
}

// ---------------------------------------------------------------------------
// BKS registry

const BksRegistry& BksRegistry::bundled() {
  static const BksRegistry registry = parse(detail::kBundledBksTable);
  return registry;
}

BksRegistry BksRegistry::parse(std::string_view text) {
  BksRegistry reg;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto tokens = split_ws(line);
    if (tokens.size() != 2) throw ParseError(line_no, "BKS line needs 'name<TAB>cost'");
    const auto cost = to_number<Cost>(tokens[1]);
    if (!cost || *cost <= 0) throw ParseError(line_no, fmt::format("malformed BKS cost '{}'", tokens[1]));
    reg.table_[std::string(tokens[0])] = *cost;
  }
  return reg;
}

BksRegistry BksRegistry::read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot open BKS table {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::optional<Cost> BksRegistry::find(std::string_view name) const {
  const auto it = table_.find(name);
  if (it == table_.end()) return std::nullopt;
  return it->second;
}

void BksRegistry::insert(std::string name, Cost cost) {
  if (cost <= 0) throw std::invalid_argument("BKS cost must be positive");
  table_[std::move(name)] = cost;
}

}  // namespace glns
