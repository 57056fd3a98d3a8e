#include "glns/solution.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>
#include <json.hpp>

namespace glns {

Solution::Solution(const Instance& instance)
    : instance_(&instance),
      route_of_(static_cast<std::size_t>(instance.nodes()), -1),
      position_of_(static_cast<std::size_t>(instance.nodes()), -1) {}

Solution::Solution(const Instance& instance, const std::vector<std::vector<int>>& routes) : Solution(instance) {
  routes_.reserve(routes.size());
  for (const auto& visits : routes) {
    Route route;
    route.visits = visits;
    for (std::size_t p = 0; p < visits.size(); ++p) {
      const int c = visits[p];
      if (c < 1 || c > instance.customers()) {
        throw std::out_of_range(fmt::format("customer index {} outside 1..{}", c, instance.customers()));
      }
      route.load += instance.demand(c);
      route_of_[static_cast<std::size_t>(c)] = static_cast<int>(routes_.size());
      position_of_[static_cast<std::size_t>(c)] = static_cast<int>(p);
    }
    route.cost = route_cost(route.visits);
    total_cost_ += route.cost;
    routes_.push_back(std::move(route));
  }
}

Cost Solution::route_cost(const std::vector<int>& visits) const {
  if (visits.empty()) return 0;
  Cost c = instance_->cost(0, visits.front()) + instance_->cost(visits.back(), 0);
  for (std::size_t i = 1; i < visits.size(); ++i) c += instance_->cost(visits[i - 1], visits[i]);
  return c;
}

int Solution::prev_of(int customer) const {
  const auto& v = routes_[static_cast<std::size_t>(route_of(customer))].visits;
  const int p = position_of(customer);
  return p == 0 ? 0 : v[static_cast<std::size_t>(p - 1)];
}

int Solution::next_of(int customer) const {
  const auto& v = routes_[static_cast<std::size_t>(route_of(customer))].visits;
  const auto p = static_cast<std::size_t>(position_of(customer));
  return p + 1 == v.size() ? 0 : v[p + 1];
}

Cost Solution::insertion_delta(int customer, int r, int pos) const {
  const auto& v = routes_[static_cast<std::size_t>(r)].visits;
  const int p = pos == 0 ? 0 : v[static_cast<std::size_t>(pos - 1)];
  const int n = static_cast<std::size_t>(pos) == v.size() ? 0 : v[static_cast<std::size_t>(pos)];
  return instance_->cost(p, customer) + instance_->cost(customer, n) - instance_->cost(p, n);
}

Cost Solution::removal_delta(int customer) const {
  const int p = prev_of(customer);
  const int n = next_of(customer);
  return instance_->cost(p, n) - instance_->cost(p, customer) - instance_->cost(customer, n);
}

void Solution::reindex(int r, int from) {
  const auto& v = routes_[static_cast<std::size_t>(r)].visits;
  for (std::size_t p = static_cast<std::size_t>(from); p < v.size(); ++p) {
    route_of_[static_cast<std::size_t>(v[p])] = r;
    position_of_[static_cast<std::size_t>(v[p])] = static_cast<int>(p);
  }
}

void Solution::insert(int customer, int r, int pos) {
  const Cost delta = insertion_delta(customer, r, pos);
  auto& route = routes_[static_cast<std::size_t>(r)];
  route.visits.insert(route.visits.begin() + pos, customer);
  route.load += instance_->demand(customer);
  route.cost += delta;
  total_cost_ += delta;
  reindex(r, pos);
}

int Solution::add_route(int customer) {
  Route route;
  route.visits.push_back(customer);
  route.load = instance_->demand(customer);
  route.cost = 2 * instance_->cost(0, customer);
  total_cost_ += route.cost;
  routes_.push_back(std::move(route));
  const int r = route_count() - 1;
  reindex(r, 0);
  return r;
}

void Solution::remove(int customer) {
  const int r = route_of(customer);
  const int pos = position_of(customer);
  const Cost delta = removal_delta(customer);
  auto& route = routes_[static_cast<std::size_t>(r)];
  route.visits.erase(route.visits.begin() + pos);
  route.load -= instance_->demand(customer);
  route.cost += delta;
  total_cost_ += delta;
  route_of_[static_cast<std::size_t>(customer)] = -1;
  position_of_[static_cast<std::size_t>(customer)] = -1;
  reindex(r, pos);
}

void Solution::reverse(int r, int i, int j) {
  if (i >= j) return;
  auto& route = routes_[static_cast<std::size_t>(r)];
  auto& v = route.visits;
  const int p = i == 0 ? 0 : v[static_cast<std::size_t>(i - 1)];
  const int n = static_cast<std::size_t>(j) + 1 == v.size() ? 0 : v[static_cast<std::size_t>(j + 1)];
  const int first = v[static_cast<std::size_t>(i)];
  const int last = v[static_cast<std::size_t>(j)];
  const Cost delta =
      instance_->cost(p, last) + instance_->cost(first, n) - instance_->cost(p, first) - instance_->cost(last, n);
  std::reverse(v.begin() + i, v.begin() + j + 1);
  route.cost += delta;
  total_cost_ += delta;
  reindex(r, i);
}

void Solution::exchange(int a, int b) {
  const int ra = route_of(a);
  const int rb = route_of(b);
  const int pa = position_of(a);
  const int pb = position_of(b);
  auto& route_a = routes_[static_cast<std::size_t>(ra)];
  auto& route_b = routes_[static_cast<std::size_t>(rb)];
  route_a.visits[static_cast<std::size_t>(pa)] = b;
  route_b.visits[static_cast<std::size_t>(pb)] = a;
  route_of_[static_cast<std::size_t>(a)] = rb;
  position_of_[static_cast<std::size_t>(a)] = pb;
  route_of_[static_cast<std::size_t>(b)] = ra;
  position_of_[static_cast<std::size_t>(b)] = pa;
  if (ra != rb) {
    route_a.load += instance_->demand(b) - instance_->demand(a);
    route_b.load += instance_->demand(a) - instance_->demand(b);
  }
  for (auto* route : {&route_a, &route_b}) {
    const Cost fresh = route_cost(route->visits);
    total_cost_ += fresh - route->cost;
    route->cost = fresh;
    if (ra == rb) break;
  }
}

void Solution::prune_empty_routes() {
  int r = 0;
  while (r < route_count()) {
    if (!routes_[static_cast<std::size_t>(r)].visits.empty()) {
      ++r;
      continue;
    }
    if (r != route_count() - 1) {
      routes_[static_cast<std::size_t>(r)] = std::move(routes_.back());
      routes_.pop_back();
      reindex(r, 0);
    } else {
      routes_.pop_back();
    }
  }
}

std::string Violation::describe() const {
  switch (kind) {
    case Kind::DuplicateVisit: return fmt::format("DuplicateVisit({})", customer);
    case Kind::Unvisited: return fmt::format("Unvisited({})", customer);
    case Kind::CapacityExceeded: return fmt::format("CapacityExceeded(route {}, load {})", route, value);
    case Kind::CostMismatch: return fmt::format("CostMismatch(recomputed {})", value);
  }
  return "Unknown";
}

std::vector<Violation> validate(const Solution& solution) {
  const Instance& inst = solution.instance();
  std::vector<Violation> out;
  std::vector<int> seen(static_cast<std::size_t>(inst.nodes()), 0);
  for (int r = 0; r < solution.route_count(); ++r) {
    const auto& route = solution.route(r);
    Cost load = 0;
    for (int c : route.visits) {
      load += inst.demand(c);
      if (++seen[static_cast<std::size_t>(c)] == 2) {
        out.push_back({Violation::Kind::DuplicateVisit, c, r, 0});
      }
    }
    if (load > inst.capacity()) out.push_back({Violation::Kind::CapacityExceeded, -1, r, load});
  }
  for (int c = 1; c <= inst.customers(); ++c) {
    if (seen[static_cast<std::size_t>(c)] == 0) out.push_back({Violation::Kind::Unvisited, c, -1, 0});
  }
  const Cost fresh = recompute_cost(solution);
  if (fresh != solution.total_cost()) out.push_back({Violation::Kind::CostMismatch, -1, -1, fresh});
  return out;
}

Cost recompute_cost(const Solution& solution) {
  const Instance& inst = solution.instance();
  Cost total = 0;
  for (const auto& route : solution.routes()) {
    if (route.visits.empty()) continue;
    total += inst.cost(0, route.visits.front()) + inst.cost(route.visits.back(), 0);
    for (std::size_t i = 1; i < route.visits.size(); ++i) total += inst.cost(route.visits[i - 1], route.visits[i]);
  }
  return total;
}

double gap(double cost, Cost bks) {
  if (bks <= 0) throw std::domain_error("BKS must be positive to compute a gap");
  return (cost - static_cast<double>(bks)) / static_cast<double>(bks) * 100.0;
}

std::string format_gap(double gap_percent) { return fmt::format("{:.3f}", gap_percent); }

std::vector<std::pair<int, int>> solution_edge_list(const Solution& solution) {
  std::vector<std::pair<int, int>> edges;
  for (const auto& route : solution.routes()) {
    if (route.visits.empty()) continue;
    int prev = 0;
    for (int c : route.visits) {
      edges.emplace_back(prev, c);
      prev = c;
    }
    edges.emplace_back(prev, 0);
  }
  return edges;
}

std::vector<std::pair<int, int>> solution_edges(const Solution& solution) {
  auto edges = solution_edge_list(solution);
  for (auto& e : edges) {
    if (e.first > e.second) std::swap(e.first, e.second);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

std::string format_solution(const Solution& solution) {
  std::string out;
  int index = 1;
  for (const auto& route : solution.routes()) {
    if (route.visits.empty()) continue;
    out += fmt::format("Route #{}:", index++);
    for (int c : route.visits) out += fmt::format(" {}", c);
    out += '\n';
  }
  out += fmt::format("Cost {}\n", solution.total_cost());
  return out;
}

Solution parse_solution(const Instance& instance, std::string_view text) {
  std::vector<std::vector<int>> routes;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.remove_suffix(1);
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.front()))) line.remove_prefix(1);
    if (line.empty()) continue;
    if (line.starts_with("Cost")) continue;
    if (!line.starts_with("Route")) throw ParseError(line_no, fmt::format("unexpected line '{}'", line));
    const auto colon = line.find(':');
    if (colon == std::string_view::npos) throw ParseError(line_no, "route line lacks ':'");
    std::vector<int> visits;
    std::string_view rest = line.substr(colon + 1);
    while (!rest.empty()) {
      while (!rest.empty() && std::isspace(static_cast<unsigned char>(rest.front()))) rest.remove_prefix(1);
      if (rest.empty()) break;
      int value = 0;
      auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), value);
      if (ec != std::errc()) throw ParseError(line_no, "malformed customer index");
      if (value < 1 || value > instance.customers()) {
        throw ParseError(line_no, fmt::format("customer index {} outside 1..{}", value, instance.customers()));
      }
      visits.push_back(value);
      rest.remove_prefix(static_cast<std::size_t>(ptr - rest.data()));
    }
    routes.push_back(std::move(visits));
  }
  return Solution(instance, routes);
}

void write_solution(const Solution& solution, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(fmt::format("cannot write solution file {}", path.string()));
  out << format_solution(solution);
}

Solution read_solution(const Instance& instance, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot open solution file {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_solution(instance, ss.str());
}

std::string solution_to_json(const Solution& solution, const SolutionMeta& meta) {
  nlohmann::json doc;
  doc["instance"] = solution.instance().name();
  doc["cost"] = solution.total_cost();
  auto routes = nlohmann::json::array();
  for (const auto& route : solution.routes()) {
    if (!route.visits.empty()) routes.push_back(route.visits);
  }
  doc["routes"] = std::move(routes);
  if (meta.gap) doc["gap"] = *meta.gap;
  if (meta.seed) doc["seed"] = *meta.seed;
  if (meta.wall_time_s) doc["wall_time_s"] = *meta.wall_time_s;
  return doc.dump(2);
}

}  // namespace glns
