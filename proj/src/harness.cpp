#include "ctrigger/harness.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ctrigger/errors.hpp"
#include "ctrigger/rng.hpp"
#include "parallel.hpp"
#include "text_util.hpp"

namespace ctrigger {

using nlohmann::json;

std::optional<Timestep> SweepSummary::spread() const {
  if (!min_fire || !max_fire) return std::nullopt;
  return *max_fire - *min_fire;
}

std::optional<double> SweepSummary::iqr() const {
  if (!q1_fire || !q3_fire) return std::nullopt;
  return *q3_fire - *q1_fire;
}

namespace {

// Linear interpolation between order statistics (Hyndman-Fan type 7).
double interpolated_quantile(const std::vector<double>& sorted, double q) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

SweepSummary summarize(const std::vector<RealizationReport>& reports) {
  SweepSummary s;
  s.n = reports.size();
  std::vector<double> fires;
  for (const auto& r : reports) {
    if (r.fire_timestep) fires.push_back(static_cast<double>(*r.fire_timestep));
    if (r.classification) {
      switch (*r.classification) {
        case Classification::InWindow: ++s.n_in_window; break;
        case Classification::Early: ++s.n_early; break;
        case Classification::Late: ++s.n_late; break;
        case Classification::None: break;
      }
    }
  }
  s.n_fired = fires.size();
  s.detection_rate = s.n == 0 ? 0.0 : static_cast<double>(s.n_fired) / static_cast<double>(s.n);
  if (!fires.empty()) {
    std::sort(fires.begin(), fires.end());
    s.min_fire = static_cast<Timestep>(fires.front());
    s.max_fire = static_cast<Timestep>(fires.back());
    s.median_fire = interpolated_quantile(fires, 0.5);
    s.q1_fire = interpolated_quantile(fires, 0.25);
    s.q3_fire = interpolated_quantile(fires, 0.75);
  }
  return s;
}

std::string sweep_csv(const SweepTable& table) {
  std::ostringstream os;
  os << "axis_value,realization,seed,fired,fire_timestep,classification\n";
  for (const auto& row : table.rows) {
    for (const auto& r : row.reports) {
      os << detail::format_double(row.axis_value) << ',' << r.index << ',' << r.seed << ','
         << (r.fired() ? 1 : 0) << ','
         << (r.fire_timestep ? std::to_string(*r.fire_timestep) : std::string()) << ','
         << (r.classification ? to_string(*r.classification) : std::string("na")) << '\n';
    }
  }
  return os.str();
}

json sweep_summary_json(const SweepTable& table) {
  auto opt = [](const auto& v) { return v ? json(*v) : json(nullptr); };
  json rows = json::array();
  for (const auto& row : table.rows) {
    const auto& s = row.summary;
    rows.push_back({
        {"axis_value", row.axis_value},
        {"n", s.n},
        {"n_fired", s.n_fired},
        {"detection_rate", s.detection_rate},
        {"min_fire", opt(s.min_fire)},
        {"max_fire", opt(s.max_fire)},
        {"median_fire", opt(s.median_fire)},
        {"spread", opt(s.spread())},
        {"iqr", opt(s.iqr())},
        {"n_in_window", s.n_in_window},
        {"n_early", s.n_early},
        {"n_late", s.n_late},
    });
  }
  return json{{"axis", table.axis_name}, {"rows", rows}};
}

Sampling sampling_for_k(std::size_t k_per_rank, std::uint64_t seed) {
  if (k_per_rank == kWholeField) return WholeFieldSample{};
  return UniformSample{k_per_rank, seed};
}

std::uint64_t realization_seed(std::uint64_t master_seed, std::size_t index) {
  return derive_seed(master_seed, StreamTag::kRealization, index);
}

namespace {

RealizationReport report_for(const IndicatorSeries& ind, const TriggerConfig& trigger,
                             const std::optional<GroundTruthWindow>& truth, std::size_t index,
                             std::uint64_t seed) {
  RealizationReport rep{index, seed, std::nullopt, std::nullopt};
  TriggerResult result;
  result.config = trigger;
  // Too few defined points means the trigger cannot fire: recorded as a miss.
  if (ind.defined_count() >= 2) result = detect_crossing(ind, trigger);
  rep.fire_timestep = result.fire_timestep;
  if (truth) rep.classification = classify(result, *truth);
  return rep;
}

void require_realizations(std::size_t n) {
  if (n == 0) throw ValidationError("n_realizations must be at least 1");
}

}  // namespace

std::vector<RealizationReport> run_realizations(const FieldSeries& series,
                                                const std::optional<GroundTruthWindow>& truth,
                                                const IndicatorConfig& indicator,
                                                const TriggerConfig& trigger,
                                                std::size_t k_per_rank,
                                                std::size_t n_realizations,
                                                std::uint64_t master_seed) {
  require_realizations(n_realizations);
  indicator.validate();
  std::vector<RealizationReport> reports(n_realizations);
  if (k_per_rank == kWholeField) {
    // Deterministic: every realization sees the same indicator series.
    const auto ind = indicator_series(series, indicator, WholeFieldSample{});
    for (std::size_t i = 0; i < n_realizations; ++i) {
      reports[i] = report_for(ind, trigger, truth, i, realization_seed(master_seed, i));
    }
    return reports;
  }
  detail::parallel_for(n_realizations, [&](std::size_t i) {
    const auto seed = realization_seed(master_seed, i);
    const auto ind = indicator_series(series, indicator, sampling_for_k(k_per_rank, seed));
    reports[i] = report_for(ind, trigger, truth, i, seed);
  });
  return reports;
}

std::vector<RealizationReport> run_realizations(const SynthConfig& config,
                                                const IndicatorConfig& indicator,
                                                const TriggerConfig& trigger,
                                                std::size_t k_per_rank,
                                                std::size_t n_realizations,
                                                std::uint64_t master_seed, FieldMode mode) {
  require_realizations(n_realizations);
  if (mode == FieldMode::Fixed) {
    const auto [series, truth] = generate_ensemble(config);
    return run_realizations(series, truth.window, indicator, trigger, k_per_rank, n_realizations,
                            master_seed);
  }
  indicator.validate();
  std::vector<RealizationReport> reports(n_realizations);
  for (std::size_t i = 0; i < n_realizations; ++i) {
    SynthConfig fresh = config;
    fresh.seed = derive_seed(master_seed, StreamTag::kFreshField, i);
    const auto [series, truth] = generate_ensemble(fresh);
    const auto seed = realization_seed(master_seed, i);
    const auto ind = indicator_series(series, indicator, sampling_for_k(k_per_rank, seed));
    reports[i] = report_for(ind, trigger, truth.window, i, seed);
  }
  return reports;
}

SweepTable sweep_tau(const IndicatorSeries& series, std::vector<double> tau_values,
                     const TriggerConfig& base, const std::optional<GroundTruthWindow>& truth) {
  if (tau_values.empty()) throw ValidationError("tau_values must not be empty");
  std::sort(tau_values.begin(), tau_values.end());
  std::uint64_t seed = 0;
  if (const auto* u = std::get_if<UniformSample>(&series.source)) seed = u->seed;

  SweepTable table{"tau", {}};
  for (double tau : tau_values) {
    TriggerConfig cfg = base;
    cfg.tau = tau;
    SweepRow row{tau, {report_for(series, cfg, truth, 0, seed)}, {}};
    row.summary = summarize(row.reports);
    table.rows.push_back(std::move(row));
  }
  return table;
}

SweepTable sweep_samples(const FieldSeries& series, const std::optional<GroundTruthWindow>& truth,
                         const IndicatorConfig& indicator, const TriggerConfig& trigger,
                         const std::vector<std::size_t>& k_values, std::size_t n_realizations,
                         std::uint64_t master_seed) {
  if (k_values.empty()) throw ValidationError("k_values must not be empty");
  SweepTable table{"k_per_rank", {}};
  for (std::size_t k : k_values) {
    SweepRow row{static_cast<double>(k),
                 run_realizations(series, truth, indicator, trigger, k, n_realizations,
                                  master_seed),
                 {}};
    row.summary = summarize(row.reports);
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::vector<double> uniform_axis(double lo, double hi, double step) {
  if (!(step > 0.0)) throw ValidationError("axis step must be positive");
  if (!(hi >= lo)) throw ValidationError("axis maximum below minimum");
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = lo + static_cast<double>(i) * step;
  return out;
}

std::vector<Timestep> WorkflowTrace::io_events() const {
  std::vector<Timestep> out;
  for (const auto& s : steps) {
    if (s.io_event) out.push_back(s.timestep);
  }
  return out;
}

WorkflowTrace adaptive_loop(const FieldSeries& series, const IndicatorConfig& indicator,
                            const TriggerConfig& trigger, std::size_t coarse_io_every,
                            std::size_t fine_io_every, const Sampling& sampling) {
  if (fine_io_every < 1 || coarse_io_every < fine_io_every) {
    throw ValidationError("adaptive loop needs coarse_io_every >= fine_io_every >= 1");
  }
  indicator.validate();

  WorkflowTrace trace;
  OnlineTrigger online(trigger);
  std::optional<std::size_t> switch_index;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& snap = series[i];
    if (!switch_index && online.push(snap.timestep(), indicator_at(snap, indicator, sampling))) {
      switch_index = i;
      trace.switch_timestep = snap.timestep();
      trace.fire_timestep = online.fire_timestep();
    }
    WorkflowStep step{snap.timestep(), WorkflowState::Coarse, false};
    if (switch_index) {
      step.state = WorkflowState::Fine;
      step.io_event = (i - *switch_index) % fine_io_every == 0;
    } else {
      step.io_event = i % coarse_io_every == 0;
    }
    trace.steps.push_back(step);
  }
  return trace;
}

std::string workflow_csv(const WorkflowTrace& trace) {
  std::ostringstream os;
  os << "timestep,state,io_event\n";
  for (const auto& s : trace.steps) {
    os << s.timestep << ',' << (s.state == WorkflowState::Fine ? "fine" : "coarse") << ','
       << (s.io_event ? 1 : 0) << '\n';
  }
  return os.str();
}

}  // namespace ctrigger
