#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "glns/instance.hpp"
#include "glns/lns.hpp"
#include "glns/random.hpp"
#include "glns/selector.hpp"
#include "glns/solution.hpp"

namespace glns {

enum class RemarkPolicy { Once, EveryK, OnNewBest };

std::string_view to_string(SelectorKind kind);
std::optional<SelectorKind> parse_selector_kind(std::string_view text);
std::string_view to_string(RemarkPolicy policy);
std::optional<RemarkPolicy> parse_remark_policy(std::string_view text);

struct GuidanceConfig {
  SelectorKind selector = SelectorKind::Null;
  std::filesystem::path weights;  // Gnn only
  double threshold = 0.8;         // t, Gnn decode threshold
  double quantile = 0.5;          // Heuristic only
  double p_theta = 0.65;          // aspiration: a marked node moves when U[0,1) > p_theta
  RemarkPolicy remark = RemarkPolicy::Once;
  long remark_every = 1000;       // EveryK period
  GraphOptions graph;

  /// Throws std::invalid_argument for out-of-range values.
  void check() const;
};

/// Threshold / aspiration pairs tuned per baseline family and instance class.
struct Preset {
  std::string_view name;
  double threshold;
  double p_theta;
};

std::span<const Preset> presets();
std::optional<Preset> find_preset(std::string_view name);
/// Picks the preset of a baseline family ("hgs" or "filo") for an instance:
/// X-like sets below / above 300 customers, and the Belgium-scale set (filo
/// only) above 1000 customers.
Preset preset_for(std::string_view family, const Instance& instance);

/// Unmarked nodes are always allowed; a marked node draws R ~ U[0,1) and is
/// allowed iff R > p_theta.
bool allowed(const MarkSet& marks, double p_theta, int node, Rng& rng);

/// Once: iteration 0 only. EveryK: iteration % remark_every == 0. OnNewBest: new_best.
bool should_remark(const GuidanceConfig& config, long iteration, bool new_best);

/// Produces marks for a solution. Holds the loaded model, which is immutable and
/// may be shared between concurrent runs.
class NodeSelector {
 public:
  /// Loads the weight file for Gnn configurations (throws ModelError).
  explicit NodeSelector(GuidanceConfig config);
  NodeSelector(GuidanceConfig config, std::shared_ptr<const SelectorModel> model);

  const GuidanceConfig& config() const noexcept { return config_; }
  const SelectorModel* model() const noexcept { return model_.get(); }

  MarkSet mark(const Instance& instance, const Solution& current) const;

 private:
  GuidanceConfig config_;
  std::shared_ptr<const SelectorModel> model_;
};

/// One-shot convenience: builds a selector from `config` and marks `current`.
MarkSet mark(const GuidanceConfig& config, const Instance& instance, const Solution& current);

/// Per-run adapter between a NodeSelector and the LNS destroy phase.
class Guide final : public DestroyGuide {
 public:
  Guide(const NodeSelector& selector, const Instance& instance);

  void begin_iteration(long iteration, const Solution& current, bool new_best) override;
  bool allowed(int customer, Rng& rng) override;

  const MarkSet& marks() const noexcept { return marks_; }
  long remarks() const noexcept { return remarks_; }
  long draws() const noexcept { return draws_; }
  long admits() const noexcept { return admits_; }
  double mark_time_s() const noexcept { return mark_time_s_; }
  /// Every customer marked at any point of the run.
  const std::vector<char>& ever_marked() const noexcept { return ever_marked_; }

 private:
  const NodeSelector* selector_;
  const Instance* instance_;
  MarkSet marks_;
  std::vector<char> is_marked_;
  std::vector<char> ever_marked_;
  long remarks_ = 0;
  long draws_ = 0;
  long admits_ = 0;
  double mark_time_s_ = 0.0;
};

}  // namespace glns
