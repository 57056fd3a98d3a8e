#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "glns/construction.hpp"
#include "glns/guidance.hpp"
#include "glns/instance.hpp"
#include "glns/lns.hpp"

namespace glns {

// ---------------------------------------------------------------------------
// Plans

struct InstanceSource {
  std::filesystem::path path;               // read lazily when `instance` is empty
  std::shared_ptr<const Instance> instance;
};

/// An algorithm variant. The Null selector is the unguided baseline.
struct Variant {
  std::string name;
  GuidanceConfig guidance;
  /// A preset name, or a family ("hgs", "filo") whose preset is picked per
  /// instance. Sets threshold and p_theta; the overrides below take precedence.
  std::optional<std::string> preset;
  std::optional<double> threshold;
  std::optional<double> p_theta;
  std::shared_ptr<const SelectorModel> model;  // loaded from guidance.weights when empty

  /// Effective guidance for one instance.
  GuidanceConfig resolve(const Instance& instance) const;
};

struct ExperimentPlan {
  std::vector<InstanceSource> instances;
  std::vector<Variant> variants;
  int runs = 5;                       // run r uses seed r - 1
  LnsConfig lns;                      // seed is overwritten per run
  Constructor constructor = Constructor::ClarkeWright;
  int workers = 1;
  BksRegistry bks = BksRegistry::bundled();

  /// Throws std::invalid_argument when runs < 1, no variants, duplicate
  /// variant names or workers < 1.
  void check() const;
};

/// Line-oriented plan settings (`key = value`, `#` comments); CLI flags map
/// onto the same keys.
struct PlanSettings {
  std::vector<std::string> instances;  // files, directories (every *.vrp) or file-name globs
  std::vector<std::string> variants;   // baseline, guided; default both
  std::string selector = "auto";       // gnn, heuristic, null; auto = gnn with weights else heuristic
  std::string preset = "hgs";          // preset name, or family hgs / filo chosen per instance
  std::string weights;
  double quantile = 0.5;
  std::optional<double> threshold;
  std::optional<double> aspiration;
  std::string remark = "once";
  long remark_every = 1000;
  int runs = 5;
  long iterations = 100000;
  double time_limit = 0.0;
  std::string constructor = "clarke-wright";
  int workers = 1;
  std::string bks;                     // extra BKS table merged over the bundled one
  std::string out = "results";

  /// Throws std::invalid_argument for unknown keys or malformed values.
  void set(std::string_view key, std::string_view value);
};

/// Throws std::invalid_argument with the offending line number.
PlanSettings parse_plan(std::string_view text);
PlanSettings read_plan(const std::filesystem::path& path);
/// Expands instance patterns (sorted, duplicates removed) and builds variants.
ExperimentPlan make_plan(const PlanSettings& settings);

/// Expands one instance pattern. Throws std::invalid_argument if nothing matches.
std::vector<std::filesystem::path> expand_instances(const std::string& pattern);

// ---------------------------------------------------------------------------
// Results

struct RunRecord {
  std::string instance;
  std::string variant;
  int run = 1;
  std::uint32_t seed = 0;
  Cost cost = 0;
  std::optional<double> gap;
  double time_s = 0.0;
  int customers = 0;
  std::optional<DepotMode> depot;
  std::size_t marked = 0;
  long shortfall = 0;      // removal slots left empty because only marked nodes remained
};

struct Cell {
  std::string instance;
  std::string variant;
  int runs = 0;
  double avg_cost = 0.0;
  Cost best_cost = 0;
  std::optional<double> avg_gap;
  std::optional<double> best_gap;
  double avg_time_s = 0.0;
  int customers = 0;
  std::optional<DepotMode> depot;
};

struct Failure {
  std::string instance;
  std::string variant;  // empty when the instance itself failed to load
  std::string message;
};

struct ResultTable {
  std::vector<RunRecord> records;   // ordered by (instance, variant, run) in plan order
  std::vector<Cell> cells;
  std::vector<Failure> failures;
};

/// Groups records by (instance, variant) keeping first-appearance order.
std::vector<Cell> aggregate(std::span<const RunRecord> records);

/// Runs every (instance, variant, run) combination; failures are recorded per
/// instance and never abort the table.
ResultTable run_experiment(const ExperimentPlan& plan);

// ---------------------------------------------------------------------------
// Statistics

enum class WilcoxonMethod { Auto, Exact, Normal };

struct WilcoxonResult {
  bool sufficient = false;  // false when fewer than 5 non-zero differences
  int n = 0;                // non-zero differences
  double w_plus = 0.0;      // rank sum of differences favouring the variant
  double w_minus = 0.0;
  double p_value = 1.0;
  bool exact = false;
};

/// One-tailed signed-rank test of "variant < baseline" on (baseline, variant)
/// pairs. Zero differences are dropped and tied magnitudes get average ranks.
/// Auto enumerates sign patterns for n <= 20 and otherwise uses the normal
/// approximation with tie and continuity corrections.
WilcoxonResult wilcoxon_one_tailed(std::span<const std::pair<double, double>> pairs,
                                   WilcoxonMethod method = WilcoxonMethod::Auto);

struct Comparison {
  std::string baseline;
  std::string variant;
  std::string metric;  // "mean_gap" when every instance has a BKS, else "mean_cost"
  WilcoxonResult test;
  double alpha = 0.05;

  bool rejects_null() const noexcept { return test.sufficient && test.p_value < alpha; }
};

/// Per-instance (mean baseline, mean variant) pairs over instances present in both.
std::vector<std::pair<double, double>> paired_means(std::span<const RunRecord> records, const std::string& baseline,
                                                    const std::string& variant, bool use_gap);

/// Compares every other variant against `baseline`.
std::vector<Comparison> compare_variants(const ResultTable& table, const std::string& baseline, double alpha = 0.05);

// ---------------------------------------------------------------------------
// Reports

struct ReportOptions {
  bool include_timing = true;  // false blanks time columns for byte-stable output
};

std::string results_csv(std::span<const RunRecord> records, const ReportOptions& options = {});
std::string summary_csv(std::span<const Cell> cells, const ReportOptions& options = {});
/// Aligned table, size-band and depot-position breakdowns, test decisions.
std::string summary_text(const ResultTable& table, std::span<const Comparison> tests, const ReportOptions& options = {});
std::string stats_json(std::span<const Comparison> tests);

/// Writes results.csv, summary.csv, summary.txt and stats.json into `dir`
/// (created if needed). Throws std::runtime_error on I/O failure.
void emit_report(const ResultTable& table, std::span<const Comparison> tests, const std::filesystem::path& dir,
                 const ReportOptions& options = {});

/// Reads a results.csv written by emit_report. Throws std::runtime_error.
std::vector<RunRecord> read_results_csv(const std::filesystem::path& path);

/// Size band label for an instance with `nodes` nodes (depot included):
/// "100-200", "204-491", "502-749", "766-1001" or "other".
std::string size_band(int nodes);

}  // namespace glns
