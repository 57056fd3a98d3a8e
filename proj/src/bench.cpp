#include "glns/bench.hpp"

#include <fnmatch.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "glns/solution.hpp"

namespace glns {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  T value{};
  const auto t = trim(text);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty()) {
    throw std::invalid_argument(fmt::format("{}: invalid number '{}'", key, text));
  }
  return value;
}

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  while (!text.empty()) {
    const auto comma = text.find(',');
    const auto item = trim(text.substr(0, comma));
    if (!item.empty()) out.emplace_back(item);
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Plans

GuidanceConfig Variant::resolve(const Instance& instance) const {
  GuidanceConfig g = guidance;
  if (preset) {
    Preset p{};
    if (*preset == "hgs" || *preset == "filo") {
      p = preset_for(*preset, instance);
    } else if (auto found = find_preset(*preset)) {
      p = *found;
    } else {
      throw std::invalid_argument("unknown preset: " + *preset);
    }
    g.threshold = p.threshold;
    g.p_theta = p.p_theta;
  }
  if (threshold) g.threshold = *threshold;
  if (p_theta) g.p_theta = *p_theta;
  return g;
}

void ExperimentPlan::check() const {
  if (runs < 1) throw std::invalid_argument("runs must be >= 1");
  if (variants.empty()) throw std::invalid_argument("plan needs at least one variant");
  if (workers < 1) throw std::invalid_argument("workers must be >= 1");
  std::set<std::string> names;
  for (const auto& v : variants) {
    if (!names.insert(v.name).second) throw std::invalid_argument("duplicate variant name: " + v.name);
  }
  lns.check();
}

void PlanSettings::set(std::string_view key, std::string_view value) {
  const auto v = trim(value);
  if (key == "instances" || key == "instance") {
    for (auto& s : split_list(v)) instances.push_back(std::move(s));
  } else if (key == "variant" || key == "variants") {
    for (auto& s : split_list(v)) variants.push_back(std::move(s));
  } else if (key == "selector") {
    selector = v;
  } else if (key == "preset") {
    preset = v;
  } else if (key == "weights") {
    weights = v;
  } else if (key == "quantile") {
    quantile = parse_number<double>(key, v);
  } else if (key == "threshold") {
    threshold = parse_number<double>(key, v);
  } else if (key == "aspiration" || key == "p_theta") {
    aspiration = parse_number<double>(key, v);
  } else if (key == "remark") {
    remark = v;
  } else if (key == "remark_every") {
    remark_every = parse_number<long>(key, v);
  } else if (key == "runs") {
    runs = parse_number<int>(key, v);
  } else if (key == "iterations") {
    iterations = parse_number<long>(key, v);
  } else if (key == "time_limit" || key == "time-limit") {
    time_limit = parse_number<double>(key, v);
  } else if (key == "constructor") {
    constructor = v;
  } else if (key == "workers") {
    workers = parse_number<int>(key, v);
  } else if (key == "bks") {
    bks = v;
  } else if (key == "out") {
    out = v;
  } else {
    throw std::invalid_argument(fmt::format("unknown plan key '{}'", key));
  }
}

PlanSettings parse_plan(std::string_view text) {
  PlanSettings settings;
  int line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw std::invalid_argument(fmt::format("line {}: expected key = value", line_no));
    try {
      settings.set(trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(fmt::format("line {}: {}", line_no, e.what()));
    }
  }
  return settings;
}

PlanSettings read_plan(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open plan file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_plan(buf.str());
}

std::vector<std::filesystem::path> expand_instances(const std::string& pattern) {
  namespace fs = std::filesystem;
  std::vector<fs::path> out;
  const fs::path p(pattern);
  if (fs::is_directory(p)) {
    for (const auto& entry : fs::directory_iterator(p)) {
      if (entry.is_regular_file() && entry.path().extension() == ".vrp") out.push_back(entry.path());
    }
  } else if (pattern.find_first_of("*?[") != std::string::npos) {
    const fs::path dir = p.has_parent_path() ? p.parent_path() : fs::path(".");
    const std::string glob = p.filename().string();
    if (fs::is_directory(dir)) {
      for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && fnmatch(glob.c_str(), entry.path().filename().c_str(), 0) == 0) {
          out.push_back(entry.path());
        }
      }
    }
  } else if (fs::is_regular_file(p)) {
    out.push_back(p);
  }
  if (out.empty()) throw std::invalid_argument("no instances match " + pattern);
  std::sort(out.begin(), out.end());
  return out;
}

ExperimentPlan make_plan(const PlanSettings& settings) {
  ExperimentPlan plan;
  std::vector<std::filesystem::path> paths;
  for (const auto& pattern : settings.instances) {
    for (auto& p : expand_instances(pattern)) paths.push_back(std::move(p));
  }
  std::sort(paths.begin(), paths.end());
  paths.erase(std::unique(paths.begin(), paths.end()), paths.end());
  for (auto& p : paths) plan.instances.push_back({std::move(p), nullptr});

  const auto kind = parse_constructor(settings.constructor);
  if (!kind) throw std::invalid_argument("unknown constructor: " + settings.constructor);
  plan.constructor = *kind;
  const auto remark = parse_remark_policy(settings.remark);
  if (!remark) throw std::invalid_argument("unknown remark policy: " + settings.remark);

  std::vector<std::string> names = settings.variants;
  if (names.empty()) names = {"baseline", "guided"};
  for (const auto& name : names) {
    Variant v;
    v.name = name;
    if (name == "baseline") {
      v.guidance.selector = SelectorKind::Null;
    } else if (name == "guided") {
      std::string sel = settings.selector;
      if (sel == "auto") sel = settings.weights.empty() ? "heuristic" : "gnn";
      const auto sk = parse_selector_kind(sel);
      if (!sk) throw std::invalid_argument("unknown selector: " + settings.selector);
      v.guidance.selector = *sk;
      v.guidance.weights = settings.weights;
      v.guidance.quantile = settings.quantile;
      v.guidance.remark = *remark;
      v.guidance.remark_every = settings.remark_every;
      if (!settings.preset.empty()) v.preset = settings.preset;
      v.threshold = settings.threshold;
      v.p_theta = settings.aspiration;
    } else {
      throw std::invalid_argument("unknown variant: " + name + " (expected baseline or guided)");
    }
    plan.variants.push_back(std::move(v));
  }

  plan.runs = settings.runs;
  plan.workers = settings.workers;
  plan.lns.max_iterations = settings.iterations;
  plan.lns.time_limit_s = settings.time_limit;
  if (!settings.bks.empty()) {
    for (const auto& [name, cost] : BksRegistry::read(settings.bks).entries()) plan.bks.insert(name, cost);
  }
  plan.check();
  return plan;
}

// ---------------------------------------------------------------------------
// Results

std::vector<Cell> aggregate(std::span<const RunRecord> records) {
  std::vector<Cell> cells;
  std::map<std::pair<std::string, std::string>, std::size_t> index;
  std::vector<std::vector<const RunRecord*>> groups;
  for (const auto& r : records) {
    const auto [it, inserted] = index.try_emplace({r.instance, r.variant}, cells.size());
    if (inserted) {
      Cell c;
      c.instance = r.instance;
      c.variant = r.variant;
      c.customers = r.customers;
      c.depot = r.depot;
      cells.push_back(std::move(c));
      groups.emplace_back();
    }
    groups[it->second].push_back(&r);
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    auto& c = cells[i];
    const auto& g = groups[i];
    c.runs = static_cast<int>(g.size());
    double cost_sum = 0.0, time_sum = 0.0, gap_sum = 0.0;
    bool all_gaps = true;
    c.best_cost = g.front()->cost;
    for (const auto* r : g) {
      cost_sum += static_cast<double>(r->cost);
      time_sum += r->time_s;
      c.best_cost = std::min(c.best_cost, r->cost);
      if (r->gap) {
        gap_sum += *r->gap;
        c.best_gap = c.best_gap ? std::min(*c.best_gap, *r->gap) : *r->gap;
      } else {
        all_gaps = false;
      }
    }
    c.avg_cost = cost_sum / c.runs;
    c.avg_time_s = time_sum / c.runs;
    if (all_gaps) {
      c.avg_gap = gap_sum / c.runs;
    } else {
      c.best_gap.reset();
    }
  }
  return cells;
}

ResultTable run_experiment(const ExperimentPlan& plan) {
  plan.check();
  ResultTable table;

  struct Loaded {
    std::string name;
    std::shared_ptr<const Instance> instance;
    std::optional<Solution> start;
    double construct_s = 0.0;
    std::optional<Cost> bks;
  };
  std::vector<Loaded> loaded(plan.instances.size());
  for (std::size_t i = 0; i < plan.instances.size(); ++i) {
    const auto& src = plan.instances[i];
    auto& l = loaded[i];
    l.name = src.instance ? src.instance->name() : src.path.stem().string();
    try {
      l.instance = src.instance ? src.instance : std::make_shared<const Instance>(read_instance(src.path));
      l.name = l.instance->name();
      const auto t0 = std::chrono::steady_clock::now();
      l.start.emplace(construct(*l.instance, plan.constructor));
      l.construct_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      l.bks = plan.bks.find(l.name);
    } catch (const std::exception& e) {
      table.failures.push_back({l.name, "", e.what()});
      l.instance.reset();
    }
  }

  std::vector<std::shared_ptr<const SelectorModel>> models(plan.variants.size());
  std::vector<std::string> variant_error(plan.variants.size());
  for (std::size_t v = 0; v < plan.variants.size(); ++v) {
    const auto& var = plan.variants[v];
    if (var.guidance.selector != SelectorKind::Gnn) continue;
    try {
      models[v] = var.model ? var.model : std::make_shared<const SelectorModel>(load_weights(var.guidance.weights));
    } catch (const std::exception& e) {
      variant_error[v] = e.what();
    }
  }

  struct Job {
    std::size_t instance, variant;
    int run;
  };
  std::vector<Job> jobs;
  for (std::size_t i = 0; i < loaded.size(); ++i) {
    if (!loaded[i].instance) continue;
    for (std::size_t v = 0; v < plan.variants.size(); ++v) {
      if (!variant_error[v].empty()) {
        table.failures.push_back({loaded[i].name, plan.variants[v].name, variant_error[v]});
        continue;
      }
      for (int r = 1; r <= plan.runs; ++r) jobs.push_back({i, v, r});
    }
  }

  std::vector<std::optional<RunRecord>> slots(jobs.size());
  std::vector<std::string> errors(jobs.size());
  auto execute = [&](std::size_t j) {
    const auto& job = jobs[j];
    const auto& l = loaded[job.instance];
    const auto& var = plan.variants[job.variant];
    try {
      LnsConfig cfg = plan.lns;
      cfg.seed = static_cast<std::uint32_t>(job.run - 1);
      const NodeSelector selector(var.resolve(*l.instance), models[job.variant]);
      Guide guide(selector, *l.instance);
      const auto result = run_lns(*l.instance, *l.start, cfg, &guide);
      if (const auto bad = validate(result.best); !bad.empty()) {
        throw std::runtime_error("infeasible result: " + bad.front().describe());
      }
      RunRecord rec;
      rec.instance = l.name;
      rec.variant = var.name;
      rec.run = job.run;
      rec.seed = cfg.seed;
      rec.cost = result.best.total_cost();
      if (l.bks) rec.gap = gap(static_cast<double>(rec.cost), *l.bks);
      rec.time_s = l.construct_s + result.trace.wall_time_s;
      rec.customers = l.instance->customers();
      rec.depot = l.instance->depot_mode();
      rec.marked = guide.marks().size();
      for (const auto& it : result.trace.iterations) rec.shortfall += it.shortfall;
      slots[j] = std::move(rec);
    } catch (const std::exception& e) {
      errors[j] = e.what();
    }
  };

  const auto threads = std::min<std::size_t>(static_cast<std::size_t>(plan.workers), jobs.size());
  if (threads <= 1) {
    for (std::size_t j = 0; j < jobs.size(); ++j) execute(j);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t j = next++; j < jobs.size(); j = next++) execute(j);
      });
    }
  }

  for (std::size_t j = 0; j < jobs.size(); ++j) {
    if (slots[j]) {
      table.records.push_back(std::move(*slots[j]));
    } else {
      table.failures.push_back({loaded[jobs[j].instance].name, plan.variants[jobs[j].variant].name,
                                fmt::format("run {}: {}", jobs[j].run, errors[j])});
    }
  }
  table.cells = aggregate(table.records);
  return table;
}

// ---------------------------------------------------------------------------
// Statistics

WilcoxonResult wilcoxon_one_tailed(std::span<const std::pair<double, double>> pairs, WilcoxonMethod method) {
  std::vector<double> diffs;
  for (const auto& [base, variant] : pairs) {
    const double d = base - variant;
    if (d != 0.0) diffs.push_back(d);
  }
  WilcoxonResult res;
  res.n = static_cast<int>(diffs.size());
  if (res.n < 5) return res;
  res.sufficient = true;

  std::vector<std::size_t> order(diffs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(diffs[a]) < std::abs(diffs[b]);
  });
  // Ranks are doubled so that average ranks of ties stay integral.
  std::vector<int> rank2(diffs.size());
  double tie_term = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && std::abs(diffs[order[j + 1]]) == std::abs(diffs[order[i]])) ++j;
    const int avg2 = static_cast<int>(i + 1 + j + 1);
    for (std::size_t k = i; k <= j; ++k) rank2[order[k]] = avg2;
    const double t = static_cast<double>(j - i + 1);
    tie_term += t * t * t - t;
    i = j + 1;
  }
  int w2 = 0, total2 = 0;
  for (std::size_t i = 0; i < diffs.size(); ++i) {
    total2 += rank2[i];
    if (diffs[i] > 0) w2 += rank2[i];
  }
  res.w_plus = w2 / 2.0;
  res.w_minus = (total2 - w2) / 2.0;

  const double n = res.n;
  const bool exact = method == WilcoxonMethod::Exact || (method == WilcoxonMethod::Auto && res.n <= 20);
  res.exact = exact;
  if (exact) {
    // counts[s]: sign patterns whose positive doubled-rank sum is s.
    std::vector<double> counts(static_cast<std::size_t>(total2) + 1, 0.0);
    counts[0] = 1.0;
    int reach = 0;
    for (int r : rank2) {
      for (int s = reach; s >= 0; --s) counts[static_cast<std::size_t>(s + r)] += counts[static_cast<std::size_t>(s)];
      reach += r;
    }
    double tail = 0.0;
    for (int s = w2; s <= total2; ++s) tail += counts[static_cast<std::size_t>(s)];
    res.p_value = tail / std::ldexp(1.0, res.n);
  } else {
    const double mean = n * (n + 1) / 4.0;
    const double var = n * (n + 1) * (2 * n + 1) / 24.0 - tie_term / 48.0;
    const double z = (res.w_plus - mean - 0.5) / std::sqrt(var);
    res.p_value = 0.5 * std::erfc(z / std::sqrt(2.0));
  }
  res.p_value = std::clamp(res.p_value, 0.0, 1.0);
  return res;
}

std::vector<std::pair<double, double>> paired_means(std::span<const RunRecord> records, const std::string& baseline,
                                                    const std::string& variant, bool use_gap) {
  struct Acc {
    double sum = 0.0;
    int count = 0;
  };
  std::map<std::string, std::pair<Acc, Acc>> by_instance;
  std::vector<std::string> order;
  for (const auto& r : records) {
    const bool is_base = r.variant == baseline;
    if (!is_base && r.variant != variant) continue;
    if (use_gap && !r.gap) continue;
    auto [it, inserted] = by_instance.try_emplace(r.instance);
    if (inserted) order.push_back(r.instance);
    auto& acc = is_base ? it->second.first : it->second.second;
    acc.sum += use_gap ? *r.gap : static_cast<double>(r.cost);
    ++acc.count;
  }
  std::vector<std::pair<double, double>> pairs;
  for (const auto& name : order) {
    const auto& [b, v] = by_instance[name];
    if (b.count > 0 && v.count > 0) pairs.emplace_back(b.sum / b.count, v.sum / v.count);
  }
  return pairs;
}

std::vector<Comparison> compare_variants(const ResultTable& table, const std::string& baseline, double alpha) {
  std::vector<Comparison> out;
  const bool use_gap = !table.records.empty() &&
                       std::all_of(table.records.begin(), table.records.end(), [](const auto& r) { return r.gap.has_value(); });
  std::vector<std::string> variants;
  for (const auto& r : table.records) {
    if (r.variant != baseline && std::find(variants.begin(), variants.end(), r.variant) == variants.end()) {
      variants.push_back(r.variant);
    }
  }
  for (const auto& v : variants) {
    Comparison c;
    c.baseline = baseline;
    c.variant = v;
    c.metric = use_gap ? "mean_gap" : "mean_cost";
    c.alpha = alpha;
    const auto pairs = paired_means(table.records, baseline, v, use_gap);
    c.test = wilcoxon_one_tailed(pairs);
    out.push_back(std::move(c));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reports

namespace {

std::string opt_gap(const std::optional<double>& g) { return g ? format_gap(*g) : std::string(); }

std::string depot_letter(const std::optional<DepotMode>& d) {
  if (!d) return "";
  switch (*d) {
    case DepotMode::Central: return "C";
    case DepotMode::Edge: return "E";
    case DepotMode::Random: return "R";
  }
  return "";
}

std::string decision(const Comparison& c) {
  if (!c.test.sufficient) return "insufficient data";
  return c.rejects_null() ? "reject H0" : "fail to reject H0";
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace

std::string size_band(int nodes) {
  if (nodes >= 100 && nodes <= 200) return "100-200";
  if (nodes >= 204 && nodes <= 491) return "204-491";
  if (nodes >= 502 && nodes <= 749) return "502-749";
  if (nodes >= 766 && nodes <= 1001) return "766-1001";
  return "other";
}

std::string results_csv(std::span<const RunRecord> records, const ReportOptions& options) {
  std::string out = "instance,variant,run,seed,cost,gap,time_s,customers,depot,marked,shortfall\n";
  for (const auto& r : records) {
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", r.instance, r.variant, r.run, r.seed, r.cost,
                       opt_gap(r.gap), options.include_timing ? fmt::format("{:.3f}", r.time_s) : "", r.customers,
                       depot_letter(r.depot), r.marked, r.shortfall);
  }
  return out;
}

std::string summary_csv(std::span<const Cell> cells, const ReportOptions& options) {
  std::string out = "instance,variant,runs,avg_cost,best_cost,avg_gap,best_gap,avg_time_s\n";
  for (const auto& c : cells) {
    out += fmt::format("{},{},{},{:.1f},{},{},{},{}\n", c.instance, c.variant, c.runs, c.avg_cost, c.best_cost,
                       opt_gap(c.avg_gap), opt_gap(c.best_gap),
                       options.include_timing ? fmt::format("{:.3f}", c.avg_time_s) : "");
  }
  return out;
}

std::string summary_text(const ResultTable& table, std::span<const Comparison> tests, const ReportOptions& options) {
  std::string out;
  std::size_t w = 8;
  for (const auto& c : table.cells) w = std::max(w, c.instance.size());
  std::size_t vw = 7;
  for (const auto& c : table.cells) vw = std::max(vw, c.variant.size());

  out += fmt::format("{:<{}}  {:<{}}  {:>12}  {:>8}  {:>10}  {:>8}  {:>9}\n", "Instance", w, "Variant", vw, "Avg Cost",
                     "Avg Gap", "Best Cost", "Best Gap", "Time (s)");
  for (const auto& c : table.cells) {
    out += fmt::format("{:<{}}  {:<{}}  {:>12.1f}  {:>8}  {:>10}  {:>8}  {:>9}\n", c.instance, w, c.variant, vw,
                       c.avg_cost, c.avg_gap ? format_gap(*c.avg_gap) : "-", c.best_cost,
                       c.best_gap ? format_gap(*c.best_gap) : "-",
                       options.include_timing ? fmt::format("{:.2f}", c.avg_time_s) : "-");
  }

  std::vector<std::string> variants;
  for (const auto& c : table.cells) {
    if (std::find(variants.begin(), variants.end(), c.variant) == variants.end()) variants.push_back(c.variant);
  }
  // Mean of per-cell avg gaps over the cells picked by `pick`; "-" if any lacks a gap.
  auto group_gap = [&](const std::string& variant, auto pick) -> std::pair<int, std::string> {
    int count = 0;
    double sum = 0.0;
    bool complete = true;
    for (const auto& c : table.cells) {
      if (c.variant != variant || !pick(c)) continue;
      ++count;
      if (c.avg_gap) {
        sum += *c.avg_gap;
      } else {
        complete = false;
      }
    }
    if (count == 0 || !complete) return {count, "-"};
    return {count, format_gap(sum / count)};
  };

  if (!table.cells.empty()) {
    out += "\nAverage gap by size band\n";
    for (const char* band : {"100-200", "204-491", "502-749", "766-1001", "other"}) {
      for (const auto& v : variants) {
        const auto [count, g] = group_gap(v, [&](const Cell& c) { return size_band(c.customers + 1) == band; });
        if (count > 0) out += fmt::format("  {:<9} {:<{}}  n={:<4} gap={}\n", band, v, vw, count, g);
      }
    }
    const bool any_depot = std::any_of(table.cells.begin(), table.cells.end(), [](const Cell& c) { return c.depot; });
    if (any_depot) {
      out += "\nAverage gap by depot position\n";
      for (DepotMode d : {DepotMode::Central, DepotMode::Edge, DepotMode::Random}) {
        for (const auto& v : variants) {
          const auto [count, g] = group_gap(v, [&](const Cell& c) { return c.depot == d; });
          if (count > 0) out += fmt::format("  {:<9} {:<{}}  n={:<4} gap={}\n", depot_letter(d), v, vw, count, g);
        }
      }
    }
  }

  if (!tests.empty()) {
    out += "\nOne-tailed Wilcoxon signed-rank tests (H1: variant < baseline)\n";
    for (const auto& c : tests) {
      if (!c.test.sufficient) {
        out += fmt::format("  {} vs {} ({}): n={} insufficient data\n", c.variant, c.baseline, c.metric, c.test.n);
        continue;
      }
      out += fmt::format("  {} vs {} ({}): n={} W+={} W-={} p={:.5f} ({}) alpha={} -> {}\n", c.variant, c.baseline,
                         c.metric, c.test.n, c.test.w_plus, c.test.w_minus, c.test.p_value,
                         c.test.exact ? "exact" : "normal", c.alpha, decision(c));
    }
  }
  if (!table.failures.empty()) {
    out += "\nFailures\n";
    for (const auto& f : table.failures) {
      out += fmt::format("  {} {}: {}\n", f.instance, f.variant.empty() ? "-" : f.variant, f.message);
    }
  }
  return out;
}

std::string stats_json(std::span<const Comparison> tests) {
  auto arr = nlohmann::json::array();
  for (const auto& c : tests) {
    nlohmann::json j;
    j["baseline"] = c.baseline;
    j["variant"] = c.variant;
    j["metric"] = c.metric;
    j["n"] = c.test.n;
    j["sufficient"] = c.test.sufficient;
    j["test_statistic"] = c.test.w_plus;
    j["w_minus"] = c.test.w_minus;
    j["p_value"] = c.test.sufficient ? nlohmann::json(c.test.p_value) : nlohmann::json(nullptr);
    j["method"] = c.test.exact ? "exact" : "normal";
    j["alpha"] = c.alpha;
    j["decision"] = decision(c);
    arr.push_back(std::move(j));
  }
  return arr.dump(2) + "\n";
}

void emit_report(const ResultTable& table, std::span<const Comparison> tests, const std::filesystem::path& dir,
                 const ReportOptions& options) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
  write_file(dir / "results.csv", results_csv(table.records, options));
  write_file(dir / "summary.csv", summary_csv(table.cells, options));
  write_file(dir / "summary.txt", summary_text(table, tests, options));
  write_file(dir / "stats.json", stats_json(tests));
}

std::vector<RunRecord> read_results_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || !line.starts_with("instance,variant,run,seed,cost,gap,time_s")) {
    throw std::runtime_error(path.string() + ": not a results.csv file");
  }
  std::vector<RunRecord> out;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string> f;
    std::string_view rest = line;
    for (;;) {
      const auto comma = rest.find(',');
      f.emplace_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (f.size() < 7) throw std::runtime_error(fmt::format("{}:{}: expected at least 7 fields", path.string(), line_no));
    try {
      RunRecord r;
      r.instance = f[0];
      r.variant = f[1];
      r.run = parse_number<int>("run", f[2]);
      r.seed = parse_number<std::uint32_t>("seed", f[3]);
      r.cost = parse_number<Cost>("cost", f[4]);
      if (!f[5].empty()) r.gap = parse_number<double>("gap", f[5]);
      if (!f[6].empty()) r.time_s = parse_number<double>("time_s", f[6]);
      if (f.size() > 7 && !f[7].empty()) r.customers = parse_number<int>("customers", f[7]);
      if (f.size() > 8 && !f[8].empty()) {
        r.depot = f[8] == "C" ? DepotMode::Central : f[8] == "E" ? DepotMode::Edge : DepotMode::Random;
      }
      if (f.size() > 9 && !f[9].empty()) r.marked = parse_number<std::size_t>("marked", f[9]);
      if (f.size() > 10 && !f[10].empty()) r.shortfall = parse_number<long>("shortfall", f[10]);
      out.push_back(std::move(r));
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error(fmt::format("{}:{}: {}", path.string(), line_no, e.what()));
    }
  }
  return out;
}

}  // namespace glns
