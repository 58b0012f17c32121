#include "ctrigger/synth.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <set>
#include <string>

#include "ctrigger/errors.hpp"
#include "ctrigger/rng.hpp"
#include "parallel.hpp"

namespace ctrigger {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& field, const std::string& why) {
  throw ValidationError("synth config field '" + field + "' " + why);
}

}  // namespace

void SynthConfig::validate() const {
  if (n_steps == 0) bad("n_steps", "must be positive");
  if (n_ranks == 0) bad("n_ranks", "must be positive");
  if (points_per_rank == 0) bad("points_per_rank", "must be positive");
  if (t_ignite < 0 || t_ignite >= static_cast<Timestep>(n_steps)) {
    bad("t_ignite", "must lie in [0, n_steps)");
  }
  if (window_halfwidth < 0) bad("window_halfwidth", "must be non-negative");
  if (t_ignite - window_halfwidth < 0 ||
      t_ignite + window_halfwidth >= static_cast<Timestep>(n_steps)) {
    bad("window_halfwidth", "puts the ground-truth window outside [0, n_steps)");
  }
  if (!std::isfinite(bulk_level)) bad("bulk_level", "must be finite");
  if (!(bulk_spread > 0.0) || !std::isfinite(bulk_spread)) bad("bulk_spread", "must be positive");
  if (!(top_fraction > 0.0 && top_fraction < 1.0)) bad("top_fraction", "must lie in (0, 1)");
  if (!std::isfinite(top_level)) bad("top_level", "must be finite");
  if (!(spread_min > 0.0)) bad("spread_min", "must be positive");
  if (!(spread_max > spread_min) || !std::isfinite(spread_max)) {
    bad("spread_max", "must exceed spread_min");
  }
  if (!(post_ignite_spread_rate >= 0.0) || !std::isfinite(post_ignite_spread_rate)) {
    bad("post_ignite_spread_rate", "must be non-negative");
  }
}

json to_json(const SynthConfig& c) {
  return json{
      {"n_steps", c.n_steps},
      {"n_ranks", c.n_ranks},
      {"points_per_rank", c.points_per_rank},
      {"t_ignite", c.t_ignite},
      {"window_halfwidth", c.window_halfwidth},
      {"bulk_level", c.bulk_level},
      {"bulk_spread", c.bulk_spread},
      {"top_fraction", c.top_fraction},
      {"top_level", c.top_level},
      {"spread_max", c.spread_max},
      {"spread_min", c.spread_min},
      {"post_ignite_spread_rate", c.post_ignite_spread_rate},
      {"seed", c.seed},
  };
}

SynthConfig synth_config_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("synth config must be a JSON object");
  static const std::set<std::string> known = {
      "n_steps",    "n_ranks",    "points_per_rank", "t_ignite",   "window_halfwidth",
      "bulk_level", "bulk_spread", "top_fraction",   "top_level",  "spread_max",
      "spread_min", "post_ignite_spread_rate",       "seed"};
  for (const auto& [key, _] : j.items()) {
    if (!known.contains(key)) bad(key, "is not a recognised option");
  }

  SynthConfig c;
  auto read = [&](const char* key, auto& field) {
    if (!j.contains(key)) return;
    try {
      field = j.at(key).get<std::remove_reference_t<decltype(field)>>();
    } catch (const json::exception&) {
      bad(key, "has the wrong type");
    }
  };
  // Negative counts would wrap when read as size_t.
  for (const char* key : {"n_steps", "n_ranks", "points_per_rank"}) {
    if (j.contains(key) && !j.at(key).is_number_unsigned()) bad(key, "must be a positive integer");
  }
  read("n_steps", c.n_steps);
  read("n_ranks", c.n_ranks);
  read("points_per_rank", c.points_per_rank);
  read("t_ignite", c.t_ignite);
  read("window_halfwidth", c.window_halfwidth);
  read("bulk_level", c.bulk_level);
  read("bulk_spread", c.bulk_spread);
  read("top_fraction", c.top_fraction);
  read("top_level", c.top_level);
  read("spread_max", c.spread_max);
  read("spread_min", c.spread_min);
  read("post_ignite_spread_rate", c.post_ignite_spread_rate);
  read("seed", c.seed);
  c.validate();
  return c;
}

json to_json(const GroundTruth& truth) {
  return json{{"t_lo", truth.window.t_lo}, {"t_hi", truth.window.t_hi},
              {"config", to_json(truth.config)}};
}

GroundTruth ground_truth_from_json(const json& j) {
  try {
    GroundTruth g;
    g.window = GroundTruthWindow(j.at("t_lo").get<Timestep>(), j.at("t_hi").get<Timestep>());
    if (j.contains("config")) g.config = synth_config_from_json(j.at("config"));
    return g;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed ground truth: ") + e.what());
  }
}

GroundTruth ground_truth_for(const SynthConfig& config) {
  config.validate();
  return GroundTruth{GroundTruthWindow(config.t_ignite - config.window_halfwidth,
                                       config.t_ignite + config.window_halfwidth),
                     config};
}

double top_spread_at(const SynthConfig& c, Timestep t) {
  if (t <= c.t_ignite) {
    if (c.t_ignite == 0) return c.spread_min;
    const double frac = static_cast<double>(t) / static_cast<double>(c.t_ignite);
    return std::max(c.spread_min, c.spread_max - (c.spread_max - c.spread_min) * frac);
  }
  return c.spread_min + c.post_ignite_spread_rate * static_cast<double>(t - c.t_ignite);
}

FieldSnapshot generate_step(const SynthConfig& c, Timestep t) {
  const double sigma = top_spread_at(c, t);
  std::vector<double> values(c.n_ranks * c.points_per_rank);
  for (std::size_t r = 0; r < c.n_ranks; ++r) {
    auto engine =
        make_engine(derive_seed(c.seed, StreamTag::kGeneration, static_cast<std::uint64_t>(t), r));
    std::bernoulli_distribution in_top(c.top_fraction);
    std::normal_distribution<double> bulk(c.bulk_level, c.bulk_spread);
    std::normal_distribution<double> top(c.top_level, sigma);
    double* out = values.data() + r * c.points_per_rank;
    for (std::size_t i = 0; i < c.points_per_rank; ++i) {
      out[i] = in_top(engine) ? top(engine) : bulk(engine);
    }
  }
  return FieldSnapshot(t, std::move(values), std::vector<std::size_t>(c.n_ranks, c.points_per_rank));
}

std::pair<FieldSeries, GroundTruth> generate_ensemble(const SynthConfig& config) {
  auto truth = ground_truth_for(config);
  std::vector<std::optional<FieldSnapshot>> slots(config.n_steps);
  detail::parallel_for(config.n_steps, [&](std::size_t i) {
    slots[i].emplace(generate_step(config, static_cast<Timestep>(i)));
  });
  std::vector<FieldSnapshot> snapshots;
  snapshots.reserve(config.n_steps);
  for (auto& s : slots) snapshots.push_back(std::move(*s));
  return {FieldSeries(std::move(snapshots)), std::move(truth)};
}

}  // namespace ctrigger
