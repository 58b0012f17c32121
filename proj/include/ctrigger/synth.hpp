#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>

#include <json.hpp>

#include "ctrigger/field_model.hpp"
#include "ctrigger/trigger.hpp"

namespace ctrigger {

/// Two-mode mixture field generator. A fraction `top_fraction` of points
/// sits in an upper mode around `top_level` whose spread shrinks linearly
/// from `spread_max` to `spread_min` at `t_ignite` and then grows at
/// `post_ignite_spread_rate` per step. The remaining points form a
/// stationary bulk.
struct SynthConfig {
  std::size_t n_steps = 200;
  std::size_t n_ranks = 16;
  std::size_t points_per_rank = 4096;
  Timestep t_ignite = 120;
  Timestep window_halfwidth = 15;
  double bulk_level = 0.0;
  double bulk_spread = 1.0;
  double top_fraction = 0.1;
  double top_level = 100.0;
  double spread_max = 50.0;
  double spread_min = 0.5;
  double post_ignite_spread_rate = 2.0;
  std::uint64_t seed = 20240601;

  /// Throws ValidationError naming the first offending field.
  void validate() const;
};

nlohmann::json to_json(const SynthConfig& config);
/// Missing keys keep their defaults; unknown keys are rejected.
SynthConfig synth_config_from_json(const nlohmann::json& j);

struct GroundTruth {
  GroundTruthWindow window;
  SynthConfig config;
};

nlohmann::json to_json(const GroundTruth& truth);
GroundTruth ground_truth_from_json(const nlohmann::json& j);

GroundTruth ground_truth_for(const SynthConfig& config);

/// Standard deviation of the upper mode at step t.
double top_spread_at(const SynthConfig& config, Timestep t);

/// One snapshot; every (timestep, rank) pair has its own substream.
FieldSnapshot generate_step(const SynthConfig& config, Timestep t);

std::pair<FieldSeries, GroundTruth> generate_ensemble(const SynthConfig& config);

}  // namespace ctrigger
