#include "ctrigger/trigger.hpp"

#include <vector>

#include "ctrigger/errors.hpp"

namespace ctrigger {

GroundTruthWindow::GroundTruthWindow(Timestep lo, Timestep hi) : t_lo(lo), t_hi(hi) {
  if (lo > hi) throw ValidationError("ground-truth window needs t_lo <= t_hi");
}

std::string to_string(Direction direction) {
  return direction == Direction::FromBelow ? "from_below" : "from_above";
}

std::string to_string(Classification c) {
  switch (c) {
    case Classification::InWindow: return "in_window";
    case Classification::Early: return "early";
    case Classification::Late: return "late";
    case Classification::None: return "none";
  }
  return "none";
}

Direction parse_direction(const std::string& text) {
  if (text == "from_below" || text == "below") return Direction::FromBelow;
  if (text == "from_above" || text == "above") return Direction::FromAbove;
  throw ValidationError("unknown trigger direction '" + text + "'");
}

namespace {

bool above_or_at(double v, double tau) { return v >= tau; }
bool below_or_at(double v, double tau) { return v <= tau; }

}  // namespace

TriggerResult detect_crossing(std::span<const IndicatorPoint> points, const TriggerConfig& config) {
  std::vector<const IndicatorPoint*> defined;
  defined.reserve(points.size());
  for (const auto& p : points) {
    if (p.defined()) defined.push_back(&p);
  }
  if (defined.size() < 2) {
    throw ValidationError("trigger detection needs at least two defined indicator values");
  }

  const bool up = config.direction == Direction::FromBelow;
  const double tau = config.tau;
  auto on_side = [&](double v) { return up ? above_or_at(v, tau) : below_or_at(v, tau); };

  TriggerResult result;
  result.config = config;
  for (std::size_t i = 1; i < defined.size(); ++i) {
    const double prev = *defined[i - 1]->value;
    const double cur = *defined[i]->value;
    const bool prev_off = up ? prev < tau : prev > tau;
    if (!prev_off || !on_side(cur)) continue;

    bool confirmed = true;
    for (std::size_t j = i + 1; j < defined.size() && j <= i + config.confirm_steps; ++j) {
      if (!on_side(*defined[j]->value)) {
        confirmed = false;
        break;
      }
    }
    if (!confirmed) continue;

    result.fired = true;
    result.fire_timestep = defined[i]->timestep;
    result.prev_value = prev;
    result.cross_value = cur;
    return result;
  }
  return result;
}

TriggerResult detect_crossing(const IndicatorSeries& series, const TriggerConfig& config) {
  return detect_crossing(std::span<const IndicatorPoint>(series.points), config);
}

Classification classify(const TriggerResult& result, const GroundTruthWindow& window) {
  if (!result.fired || !result.fire_timestep) return Classification::None;
  const Timestep t = *result.fire_timestep;
  if (t < window.t_lo) return Classification::Early;
  if (t > window.t_hi) return Classification::Late;
  return Classification::InWindow;
}

bool OnlineTrigger::crossed(double prev, double cur) const {
  if (config_.direction == Direction::FromBelow) return prev < config_.tau && cur >= config_.tau;
  return prev > config_.tau && cur <= config_.tau;
}

bool OnlineTrigger::on_crossed_side(double v) const {
  return config_.direction == Direction::FromBelow ? v >= config_.tau : v <= config_.tau;
}

bool OnlineTrigger::push(Timestep timestep, std::optional<double> value) {
  if (decided_ || !value) return false;
  const double v = *value;
  const auto prev = prev_;
  prev_ = v;

  if (pending_) {
    if (on_crossed_side(v)) {
      if (++confirmations_ >= config_.confirm_steps) {
        fire_ = pending_;
        decided_ = timestep;
        return true;
      }
      return false;
    }
    pending_.reset();
    confirmations_ = 0;
  }

  if (prev && crossed(*prev, v)) {
    if (config_.confirm_steps == 0) {
      fire_ = timestep;
      decided_ = timestep;
      return true;
    }
    pending_ = timestep;
    confirmations_ = 0;
  }
  return false;
}

nlohmann::json trigger_report(const TriggerResult& result,
                              std::optional<Classification> classification) {
  nlohmann::json j = {
      {"fired", result.fired},
      {"fire_timestep", result.fire_timestep ? nlohmann::json(*result.fire_timestep)
                                             : nlohmann::json(nullptr)},
      {"tau", result.config.tau},
      {"direction", to_string(result.config.direction)},
      {"confirm_steps", result.config.confirm_steps},
  };
  if (result.fired) {
    j["prev_value"] = result.prev_value;
    j["cross_value"] = result.cross_value;
  }
  if (classification) j["classification"] = to_string(*classification);
  return j;
}

}  // namespace ctrigger
