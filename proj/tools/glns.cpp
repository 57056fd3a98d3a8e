#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "glns/bench.hpp"
#include "glns/construction.hpp"
#include "glns/guidance.hpp"
#include "glns/instance.hpp"
#include "glns/lns.hpp"
#include "glns/selector.hpp"
#include "glns/solution.hpp"

namespace {

using namespace glns;

struct GuidanceFlags {
  std::string selector = "null";
  std::string weights;
  std::string preset;
  std::optional<double> threshold;
  std::optional<double> aspiration;
  double quantile = 0.5;
  std::string remark = "once";
  long remark_every = 1000;
  int knn = 25;
  bool s0_only = false;

  void add_to(CLI::App* app) {
    app->add_option("--selector", selector, "null, heuristic or gnn")->capture_default_str();
    app->add_option("--weights", weights, "selector weight file (gnn)");
    app->add_option("--preset", preset, "preset name, or hgs / filo to pick by instance size");
    app->add_option("--threshold", threshold, "edge probability threshold t");
    app->add_option("--aspiration", aspiration, "aspiration probability p_theta");
    app->add_option("--quantile", quantile, "heuristic selector: fraction of shortest edges")->capture_default_str();
    app->add_option("--remark", remark, "once, every-k or on-new-best")->capture_default_str();
    app->add_option("--remark-every", remark_every, "period for every-k")->capture_default_str();
    app->add_option("--knn", knn, "graph nearest neighbours")->capture_default_str();
    app->add_flag("--s0-only", s0_only, "graph keeps only initial-solution edges and self-loops");
  }

  Variant variant() const {
    Variant v;
    v.name = "solve";
    const auto kind = parse_selector_kind(selector);
    if (!kind) throw std::invalid_argument("unknown selector: " + selector);
    v.guidance.selector = *kind;
    v.guidance.weights = weights;
    v.guidance.quantile = quantile;
    const auto policy = parse_remark_policy(remark);
    if (!policy) throw std::invalid_argument("unknown remark policy: " + remark);
    v.guidance.remark = *policy;
    v.guidance.remark_every = remark_every;
    v.guidance.graph.k = knn;
    v.guidance.graph.include_knn = !s0_only;
    if (!preset.empty()) v.preset = preset;
    v.threshold = threshold;
    v.p_theta = aspiration;
    return v;
  }
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << text;
}

int cmd_solve(const std::string& path, const GuidanceFlags& flags, long iterations, double time_limit,
              std::uint32_t seed, const std::string& constructor, std::optional<Cost> bks_flag,
              const std::string& out, const std::string& json_out, const std::string& trace_out) {
  const Instance inst = read_instance(path);
  const auto kind = parse_constructor(constructor);
  if (!kind) throw std::invalid_argument("unknown constructor: " + constructor);
  const Solution start = construct(inst, *kind);

  LnsConfig cfg;
  cfg.max_iterations = iterations;
  cfg.time_limit_s = time_limit;
  cfg.seed = seed;
  const Variant variant = flags.variant();
  const NodeSelector selector(variant.resolve(inst));
  Guide guide(selector, inst);
  const auto result = run_lns(inst, start, cfg, &guide);

  const auto bks = bks_flag ? bks_flag : BksRegistry::bundled().find(inst.name());
  SolutionMeta meta;
  meta.seed = seed;
  meta.wall_time_s = result.trace.wall_time_s;
  if (bks) meta.gap = gap(static_cast<double>(result.best.total_cost()), *bks);

  fmt::print("instance {} customers {} start {} best {}", inst.name(), inst.customers(), start.total_cost(),
             result.best.total_cost());
  if (meta.gap) fmt::print(" gap {}", format_gap(*meta.gap));
  fmt::print(" marked {} time {:.2f}s\n", guide.marks().size(), result.trace.wall_time_s);

  if (!out.empty()) write_solution(result.best, out);
  if (!json_out.empty()) write_text(json_out, solution_to_json(result.best, meta));
  if (!trace_out.empty()) write_text(trace_out, result.trace.to_csv());
  return 0;
}

int cmd_bench(const std::string& plan_file, const std::vector<std::pair<std::string, std::string>>& overrides,
              bool no_timing) {
  PlanSettings settings = plan_file.empty() ? PlanSettings{} : read_plan(plan_file);
  for (const auto& [key, value] : overrides) {
    // Flags replace list-valued plan entries instead of extending them.
    if (key == "instances") settings.instances.clear();
    if (key == "variant") settings.variants.clear();
  }
  for (const auto& [key, value] : overrides) settings.set(key, value);
  if (settings.instances.empty()) throw std::invalid_argument("no instances given (plan key 'instances' or --instances)");

  const ExperimentPlan plan = make_plan(settings);
  const ResultTable table = run_experiment(plan);
  std::vector<Comparison> tests;
  const bool has_baseline = std::any_of(plan.variants.begin(), plan.variants.end(),
                                        [](const Variant& v) { return v.name == "baseline"; });
  if (has_baseline) tests = compare_variants(table, "baseline");
  ReportOptions options;
  options.include_timing = !no_timing;
  emit_report(table, tests, settings.out, options);
  std::cout << summary_text(table, tests, options);
  fmt::print("\nreport written to {}\n", settings.out);
  return table.failures.empty() ? 0 : 2;
}

int cmd_stats(const std::vector<std::string>& files, const std::string& baseline, const std::string& variant,
              std::string metric, double alpha) {
  std::vector<RunRecord> records;
  for (std::size_t i = 0; i < files.size(); ++i) {
    auto part = read_results_csv(files[i]);
    if (files.size() == 2) {
      for (auto& r : part) r.variant = i == 0 ? baseline : variant;
    }
    records.insert(records.end(), part.begin(), part.end());
  }
  if (metric == "auto") {
    metric = std::all_of(records.begin(), records.end(), [](const RunRecord& r) { return r.gap.has_value(); }) ? "gap"
                                                                                                                : "cost";
  }
  if (metric != "gap" && metric != "cost") throw std::invalid_argument("metric must be gap, cost or auto");
  Comparison c;
  c.baseline = baseline;
  c.variant = variant;
  c.metric = metric == "gap" ? "mean_gap" : "mean_cost";
  c.alpha = alpha;
  c.test = wilcoxon_one_tailed(paired_means(records, baseline, variant, metric == "gap"));
  std::cout << stats_json(std::vector<Comparison>{c});
  return 0;
}

int cmd_inspect(const std::string& path, const GuidanceFlags& flags, const std::string& constructor,
                const std::string& solution_file, const std::string& graph_out, const std::string& probs_out) {
  const Instance inst = read_instance(path);
  const auto kind = parse_constructor(constructor);
  if (!kind) throw std::invalid_argument("unknown constructor: " + constructor);
  const Solution s0 = solution_file.empty() ? construct(inst, *kind) : read_solution(inst, solution_file);
  const GuidanceConfig cfg = flags.variant().resolve(inst);

  MarkSet marks;
  if (cfg.selector == SelectorKind::Gnn) {
    const auto model = load_weights(cfg.weights);
    const auto graph = build_graph(inst, s0, cfg.graph);
    const auto probs = forward(model, graph);
    marks = decode_marks(probs, graph, cfg.threshold);
    if (!graph_out.empty()) write_text(graph_out, graph_to_json(graph));
    if (!probs_out.empty()) write_text(probs_out, graph_to_json(graph, &probs));
  } else {
    marks = NodeSelector(cfg).mark(inst, s0);
    if (!graph_out.empty()) write_text(graph_out, graph_to_json(build_graph(inst, s0, cfg.graph)));
  }
  nlohmann::json j;
  j["instance"] = inst.name();
  j["source"] = std::string(to_string(marks.source));
  j["threshold"] = marks.threshold;
  j["customers"] = inst.customers();
  j["marked_count"] = marks.size();
  j["marked"] = marks.marked;
  std::cout << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CVRP large neighbourhood search with learned destroy guidance"};
  app.require_subcommand(1);

  // solve
  auto* solve = app.add_subcommand("solve", "solve one instance");
  std::string solve_path, solve_out, solve_json, solve_trace, solve_ctor = "clarke-wright";
  long solve_iters = 100000;
  double solve_time = 0.0;
  std::uint32_t solve_seed = 0;
  std::optional<Cost> solve_bks;
  GuidanceFlags solve_flags;
  solve->add_option("instance", solve_path, "CVRPLIB instance file")->required();
  solve->add_option("--iterations", solve_iters, "LNS iterations")->capture_default_str();
  solve->add_option("--time-limit", solve_time, "wall-clock limit in seconds (0 = none)");
  solve->add_option("--seed", solve_seed, "random seed")->capture_default_str();
  solve->add_option("--constructor", solve_ctor, "clarke-wright or nearest-neighbor")->capture_default_str();
  solve->add_option("--bks", solve_bks, "best-known cost for the gap (default: bundled table)");
  solve->add_option("--out", solve_out, "write the best solution (CVRPLIB format)");
  solve->add_option("--json", solve_json, "write the best solution as JSON");
  solve->add_option("--trace", solve_trace, "write the per-iteration trace as CSV");
  solve_flags.add_to(solve);

  // bench
  auto* bench = app.add_subcommand("bench", "run an experiment plan");
  std::string plan_file;
  bool no_timing = false;
  bench->add_option("plan", plan_file, "plan file with key = value lines");
  bench->add_flag("--no-timing", no_timing, "blank time columns for reproducible reports");
  const std::vector<std::pair<std::string, std::string>> bench_keys = {
      {"--instances", "instances"}, {"--variant", "variant"},     {"--selector", "selector"},
      {"--preset", "preset"},       {"--weights", "weights"},     {"--quantile", "quantile"},
      {"--runs", "runs"},           {"--iterations", "iterations"}, {"--time-limit", "time_limit"},
      {"--threshold", "threshold"}, {"--aspiration", "aspiration"}, {"--remark", "remark"},
      {"--remark-every", "remark_every"}, {"--constructor", "constructor"}, {"--workers", "workers"},
      {"--bks", "bks"},             {"--out", "out"}};
  std::vector<std::vector<std::string>> bench_values(bench_keys.size());
  for (std::size_t i = 0; i < bench_keys.size(); ++i) {
    bench->add_option(bench_keys[i].first, bench_values[i], "overrides plan key " + bench_keys[i].second);
  }

  // stats
  auto* stats = app.add_subcommand("stats", "one-tailed Wilcoxon test on results.csv files");
  std::vector<std::string> stats_files;
  std::string stats_base = "baseline", stats_variant = "guided", stats_metric = "auto";
  double stats_alpha = 0.05;
  stats->add_option("files", stats_files, "one results.csv, or baseline and variant files")->required()->expected(1, 2);
  stats->add_option("--baseline", stats_base, "baseline variant name")->capture_default_str();
  stats->add_option("--variant", stats_variant, "compared variant name")->capture_default_str();
  stats->add_option("--metric", stats_metric, "gap, cost or auto")->capture_default_str();
  stats->add_option("--alpha", stats_alpha, "significance level")->capture_default_str();

  // inspect-marks
  auto* inspect = app.add_subcommand("inspect-marks", "print the marks a selector assigns to a solution");
  std::string inspect_path, inspect_solution, inspect_graph, inspect_probs, inspect_ctor = "clarke-wright";
  GuidanceFlags inspect_flags;
  inspect_flags.selector = "heuristic";
  inspect->add_option("instance", inspect_path, "CVRPLIB instance file")->required();
  inspect->add_option("--solution", inspect_solution, "initial solution file (default: constructed)");
  inspect->add_option("--constructor", inspect_ctor, "clarke-wright or nearest-neighbor")->capture_default_str();
  inspect->add_option("--dump-graph", inspect_graph, "write the selector graph as JSON");
  inspect->add_option("--dump-probs", inspect_probs, "write the graph with edge probabilities (gnn)");
  inspect_flags.add_to(inspect);

  // generate
  auto* generate = app.add_subcommand("generate", "write random instances");
  GeneratorOptions gen;
  std::string gen_depot = "central", gen_dir = ".";
  int gen_count = 1;
  generate->add_option("--customers", gen.customers, "customer count")->capture_default_str();
  generate->add_option("--seed", gen.seed, "first seed")->capture_default_str();
  generate->add_option("--count", gen_count, "instances to write (consecutive seeds)")->capture_default_str();
  generate->add_option("--depot", gen_depot, "central, edge or random")->capture_default_str();
  generate->add_option("--demand-min", gen.demand_min)->capture_default_str();
  generate->add_option("--demand-max", gen.demand_max)->capture_default_str();
  generate->add_option("--capacity", gen.capacity)->capture_default_str();
  generate->add_option("--dir", gen_dir, "output directory")->capture_default_str();

  // random-weights
  auto* weights = app.add_subcommand("random-weights", "write a randomly initialised selector weight file");
  int w_layers = 10, w_hidden = 120, w_mlp = 3;
  std::uint32_t w_seed = 0;
  std::string w_out;
  weights->add_option("--layers", w_layers)->capture_default_str();
  weights->add_option("--hidden", w_hidden)->capture_default_str();
  weights->add_option("--mlp-layers", w_mlp)->capture_default_str();
  weights->add_option("--seed", w_seed)->capture_default_str();
  weights->add_option("--out", w_out, "output file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*solve) {
      return cmd_solve(solve_path, solve_flags, solve_iters, solve_time, solve_seed, solve_ctor, solve_bks, solve_out,
                       solve_json, solve_trace);
    }
    if (*bench) {
      std::vector<std::pair<std::string, std::string>> overrides;
      for (std::size_t i = 0; i < bench_keys.size(); ++i) {
        for (const auto& v : bench_values[i]) overrides.emplace_back(bench_keys[i].second, v);
      }
      return cmd_bench(plan_file, overrides, no_timing);
    }
    if (*stats) return cmd_stats(stats_files, stats_base, stats_variant, stats_metric, stats_alpha);
    if (*inspect) {
      return cmd_inspect(inspect_path, inspect_flags, inspect_ctor, inspect_solution, inspect_graph, inspect_probs);
    }
    if (*generate) {
      const auto depot = parse_depot_mode(gen_depot);
      if (!depot) throw std::invalid_argument("unknown depot mode: " + gen_depot);
      gen.depot = *depot;
      std::filesystem::create_directories(gen_dir);
      const auto first = gen.seed;
      for (int i = 0; i < gen_count; ++i) {
        gen.seed = first + static_cast<std::uint64_t>(i);
        const Instance inst = generate_instance(gen);
        const auto path = std::filesystem::path(gen_dir) / (inst.name() + ".vrp");
        write_instance(inst, path);
        fmt::print("{}\n", path.string());
      }
      return 0;
    }
    if (*weights) {
      save_weights(random_model(w_layers, w_hidden, w_mlp, w_seed), std::filesystem::path(w_out));
      return 0;
    }
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}
