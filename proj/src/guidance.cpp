#include "glns/guidance.hpp"

#include <array>
#include <chrono>
#include <stdexcept>

namespace glns {

std::string_view to_string(SelectorKind kind) {
  switch (kind) {
    case SelectorKind::Gnn: return "gnn";
    case SelectorKind::Heuristic: return "heuristic";
    case SelectorKind::Null: return "null";
  }
  return "null";
}

std::optional<SelectorKind> parse_selector_kind(std::string_view text) {
  if (text == "gnn") return SelectorKind::Gnn;
  if (text == "heuristic") return SelectorKind::Heuristic;
  if (text == "null" || text == "none") return SelectorKind::Null;
  return std::nullopt;
}

std::string_view to_string(RemarkPolicy policy) {
  switch (policy) {
    case RemarkPolicy::Once: return "once";
    case RemarkPolicy::EveryK: return "every-k";
    case RemarkPolicy::OnNewBest: return "on-new-best";
  }
  return "once";
}

std::optional<RemarkPolicy> parse_remark_policy(std::string_view text) {
  if (text == "once") return RemarkPolicy::Once;
  if (text == "every-k") return RemarkPolicy::EveryK;
  if (text == "on-new-best") return RemarkPolicy::OnNewBest;
  return std::nullopt;
}

void GuidanceConfig::check() const {
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw std::invalid_argument("threshold must lie in [0, 1]");
  if (!(quantile >= 0.0 && quantile <= 1.0)) throw std::invalid_argument("quantile must lie in [0, 1]");
  if (!(p_theta >= 0.0 && p_theta <= 1.0)) throw std::invalid_argument("p_theta must lie in [0, 1]");
  if (remark == RemarkPolicy::EveryK && remark_every < 1) throw std::invalid_argument("remark period must be >= 1");
  if (selector == SelectorKind::Gnn && weights.empty()) throw std::invalid_argument("gnn selector needs a weight file");
  if (graph.k < 0 || graph.max_customers < 1) throw std::invalid_argument("invalid graph options");
}

namespace {

constexpr std::array<Preset, 5> kPresets{{
    {"hgs-x-small", 0.8, 0.65},
    {"hgs-x-large", 0.8, 0.70},
    {"filo-x-small", 0.9, 0.60},
    {"filo-x-large", 0.85, 0.65},
    {"filo-b", 0.85, 0.60},
}};

}  // namespace

std::span<const Preset> presets() { return kPresets; }

std::optional<Preset> find_preset(std::string_view name) {
  for (const auto& p : kPresets) {
    if (p.name == name) return p;
  }
  return std::nullopt;
}

Preset preset_for(std::string_view family, const Instance& instance) {
  const int n = instance.customers();
  if (family == "hgs") return n < 300 ? kPresets[0] : kPresets[1];
  if (family == "filo") {
    if (n > 1000) return kPresets[4];
    return n < 300 ? kPresets[2] : kPresets[3];
  }
  throw std::invalid_argument("unknown baseline family: " + std::string(family));
}

bool allowed(const MarkSet& marks, double p_theta, int node, Rng& rng) {
  if (!marks.contains(node)) return true;
  return uniform01(rng) > p_theta;
}

bool should_remark(const GuidanceConfig& config, long iteration, bool new_best) {
  switch (config.remark) {
    case RemarkPolicy::Once: return iteration == 0;
    case RemarkPolicy::EveryK: return iteration % config.remark_every == 0;
    case RemarkPolicy::OnNewBest: return new_best;
  }
  return false;
}

NodeSelector::NodeSelector(GuidanceConfig config) : config_(std::move(config)) {
  config_.check();
  if (config_.selector == SelectorKind::Gnn) {
    model_ = std::make_shared<const SelectorModel>(load_weights(config_.weights));
  }
}

NodeSelector::NodeSelector(GuidanceConfig config, std::shared_ptr<const SelectorModel> model)
    : config_(std::move(config)), model_(std::move(model)) {
  if (config_.selector == SelectorKind::Gnn && !model_) throw std::invalid_argument("gnn selector needs a model");
  // A supplied model stands in for the weight file.
  if (config_.selector == SelectorKind::Gnn && config_.weights.empty()) config_.weights = "<in-memory>";
  config_.check();
}

MarkSet NodeSelector::mark(const Instance& instance, const Solution& current) const {
  switch (config_.selector) {
    case SelectorKind::Gnn: {
      const auto graph = build_graph(instance, current, config_.graph);
      return decode_marks(forward(*model_, graph), graph, config_.threshold);
    }
    case SelectorKind::Heuristic: return heuristic_selector(instance, current, config_.quantile);
    case SelectorKind::Null: break;
  }
  return MarkSet{{}, config_.threshold, SelectorKind::Null};
}

MarkSet mark(const GuidanceConfig& config, const Instance& instance, const Solution& current) {
  return NodeSelector(config).mark(instance, current);
}

Guide::Guide(const NodeSelector& selector, const Instance& instance)
    : selector_(&selector),
      instance_(&instance),
      is_marked_(static_cast<std::size_t>(instance.nodes()), 0),
      ever_marked_(static_cast<std::size_t>(instance.nodes()), 0) {}

void Guide::begin_iteration(long iteration, const Solution& current, bool new_best) {
  if (!should_remark(selector_->config(), iteration, new_best)) return;
  const auto t0 = std::chrono::steady_clock::now();
  for (int c : marks_.marked) is_marked_[static_cast<std::size_t>(c)] = 0;
  marks_ = selector_->mark(*instance_, current);
  for (int c : marks_.marked) {
    is_marked_[static_cast<std::size_t>(c)] = 1;
    ever_marked_[static_cast<std::size_t>(c)] = 1;
  }
  ++remarks_;
  mark_time_s_ += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool Guide::allowed(int customer, Rng& rng) {
  if (!is_marked_[static_cast<std::size_t>(customer)]) return true;
  ++draws_;
  const bool ok = uniform01(rng) > selector_->config().p_theta;
  if (ok) ++admits_;
  return ok;
}

}  // namespace glns
