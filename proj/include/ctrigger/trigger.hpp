#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>

#include <json.hpp>

#include "ctrigger/indicators.hpp"

namespace ctrigger {

enum class Direction { FromBelow, FromAbove };

struct TriggerConfig {
  double tau = 0.03;
  Direction direction = Direction::FromBelow;
  std::size_t confirm_steps = 0;
};

struct TriggerResult {
  bool fired = false;
  std::optional<Timestep> fire_timestep;
  double prev_value = 0.0;   // last defined value before the crossing
  double cross_value = 0.0;  // value at fire_timestep
  TriggerConfig config;
};

struct GroundTruthWindow {
  Timestep t_lo = 0;
  Timestep t_hi = 0;  // inclusive

  GroundTruthWindow() = default;
  GroundTruthWindow(Timestep lo, Timestep hi);
  bool contains(Timestep t) const { return t >= t_lo && t <= t_hi; }
};

enum class Classification { InWindow, Early, Late, None };

std::string to_string(Direction direction);
std::string to_string(Classification c);
Direction parse_direction(const std::string& text);

/// First crossing of `tau` in the configured direction between consecutive
/// defined points. A value exactly at tau counts as crossed. With
/// confirm_steps = m the next m defined values must stay on the crossed
/// side; when the series ends before m further values exist, the values
/// that do exist must all stay there.
///
/// Throws ValidationError when fewer than two points are defined.
TriggerResult detect_crossing(std::span<const IndicatorPoint> points, const TriggerConfig& config);
TriggerResult detect_crossing(const IndicatorSeries& series, const TriggerConfig& config);

/// in_window, early (fired before t_lo), late (after t_hi) or none.
Classification classify(const TriggerResult& result, const GroundTruthWindow& window);

/// Incremental form of detect_crossing for an online loop: values arrive
/// one at a time and the trigger reports the step at which its decision
/// becomes final. Without confirmation that is the crossing step itself;
/// with m confirmation steps it is the m-th confirming defined point.
class OnlineTrigger {
 public:
  explicit OnlineTrigger(TriggerConfig config) : config_(config) {}

  /// Feeds one point. Returns true exactly once, on the decision step.
  bool push(Timestep timestep, std::optional<double> value);

  bool fired() const { return decided_.has_value(); }
  /// Crossing timestep of the confirmed crossing.
  std::optional<Timestep> fire_timestep() const { return fire_; }
  /// Step at which the crossing was confirmed.
  std::optional<Timestep> decision_timestep() const { return decided_; }

 private:
  bool crossed(double prev, double cur) const;
  bool on_crossed_side(double v) const;

  TriggerConfig config_;
  std::optional<double> prev_;
  std::optional<Timestep> pending_;
  std::size_t confirmations_ = 0;
  std::optional<Timestep> fire_;
  std::optional<Timestep> decided_;
};

nlohmann::json trigger_report(const TriggerResult& result,
                              std::optional<Classification> classification = std::nullopt);

}  // namespace ctrigger
