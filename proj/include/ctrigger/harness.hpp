#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ctrigger/field_model.hpp"
#include "ctrigger/indicators.hpp"
#include "ctrigger/synth.hpp"
#include "ctrigger/trigger.hpp"

namespace ctrigger {

/// k_per_rank value that selects the deterministic whole-field sample.
inline constexpr std::size_t kWholeField = 0;

struct RealizationReport {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  std::optional<Timestep> fire_timestep;
  std::optional<Classification> classification;  // only with ground truth

  bool fired() const { return fire_timestep.has_value(); }
};

struct SweepSummary {
  std::size_t n = 0;
  std::size_t n_fired = 0;
  double detection_rate = 0.0;
  // Fire-time statistics over fired realizations only.
  std::optional<Timestep> min_fire;
  std::optional<Timestep> max_fire;
  std::optional<double> median_fire;
  std::optional<double> q1_fire;
  std::optional<double> q3_fire;
  std::optional<Timestep> spread() const;  // max - min
  std::optional<double> iqr() const;
  std::size_t n_in_window = 0;
  std::size_t n_early = 0;
  std::size_t n_late = 0;

  bool operator==(const SweepSummary&) const = default;
};

SweepSummary summarize(const std::vector<RealizationReport>& reports);

struct SweepRow {
  double axis_value = 0.0;
  std::vector<RealizationReport> reports;
  SweepSummary summary;
};

struct SweepTable {
  std::string axis_name;  // "tau" or "k_per_rank"
  std::vector<SweepRow> rows;
};

/// Long form: axis_value,realization,seed,fired,fire_timestep,classification.
std::string sweep_csv(const SweepTable& table);
nlohmann::json sweep_summary_json(const SweepTable& table);

Sampling sampling_for_k(std::size_t k_per_rank, std::uint64_t seed);

/// Seed used by realization `index` under `master_seed`.
std::uint64_t realization_seed(std::uint64_t master_seed, std::size_t index);

/// Fixed-field realizations: only the sampling seed varies. k_per_rank ==
/// kWholeField evaluates the whole-field sample (no randomness).
std::vector<RealizationReport> run_realizations(const FieldSeries& series,
                                                const std::optional<GroundTruthWindow>& truth,
                                                const IndicatorConfig& indicator,
                                                const TriggerConfig& trigger,
                                                std::size_t k_per_rank,
                                                std::size_t n_realizations,
                                                std::uint64_t master_seed);

enum class FieldMode { Fixed, Fresh };

/// Synthetic source. Fixed mode generates once from `config.seed`; fresh
/// mode regenerates the field for every realization from a derived seed.
std::vector<RealizationReport> run_realizations(const SynthConfig& config,
                                                const IndicatorConfig& indicator,
                                                const TriggerConfig& trigger,
                                                std::size_t k_per_rank,
                                                std::size_t n_realizations,
                                                std::uint64_t master_seed,
                                                FieldMode mode = FieldMode::Fixed);

/// One detect_crossing per tau on the same indicator series. Rows are
/// sorted by tau.
SweepTable sweep_tau(const IndicatorSeries& series, std::vector<double> tau_values,
                     const TriggerConfig& base, const std::optional<GroundTruthWindow>& truth);

SweepTable sweep_samples(const FieldSeries& series, const std::optional<GroundTruthWindow>& truth,
                         const IndicatorConfig& indicator, const TriggerConfig& trigger,
                         const std::vector<std::size_t>& k_values, std::size_t n_realizations,
                         std::uint64_t master_seed);

/// {lo, lo + step, ...} up to hi inclusive (within 1e-9 of a step).
std::vector<double> uniform_axis(double lo, double hi, double step);

enum class WorkflowState { Coarse, Fine };

struct WorkflowStep {
  Timestep timestep = 0;
  WorkflowState state = WorkflowState::Coarse;
  bool io_event = false;
};

struct WorkflowTrace {
  std::vector<WorkflowStep> steps;
  std::optional<Timestep> switch_timestep;  // first fine step
  std::optional<Timestep> fire_timestep;    // crossing the switch responded to

  std::vector<Timestep> io_events() const;
};

/// Walks the series in order, evaluating the indicator on each snapshot as
/// it arrives and feeding an OnlineTrigger. Output happens every
/// `coarse_io_every` steps before the switch, at the switch step, and every
/// `fine_io_every` steps after it.
WorkflowTrace adaptive_loop(const FieldSeries& series, const IndicatorConfig& indicator,
                            const TriggerConfig& trigger, std::size_t coarse_io_every,
                            std::size_t fine_io_every, const Sampling& sampling);

std::string workflow_csv(const WorkflowTrace& trace);

}  // namespace ctrigger
