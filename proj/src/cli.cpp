#include "ctrigger/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <optional>

#include "ctrigger/errors.hpp"
#include "ctrigger/field_model.hpp"
#include "ctrigger/harness.hpp"
#include "ctrigger/indicators.hpp"
#include "ctrigger/synth.hpp"
#include "ctrigger/trigger.hpp"
#include "text_util.hpp"

namespace ctrigger {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct InputOptions {
  std::string manifest;
  std::string csv;
  std::string synth;  // path to a synth config JSON, or "default"
  std::string ground_truth;
  std::vector<Timestep> window;
};

struct IndicatorOptions {
  std::string kind = "C";
  std::optional<double> alpha;
  std::optional<double> beta;
  double gamma = 0.01;
  double step = 0.01;
  std::string variant = "cov";
};

struct SamplingOptions {
  std::string k;  // empty: exact; "whole": whole-field sample; else k_per_rank
  std::uint64_t seed = 1;
};

struct TriggerOptions {
  double tau = 0.03;
  std::string direction = "from_below";
  std::size_t confirm = 0;
};

void add_input(CLI::App* app, InputOptions& o) {
  auto* m = app->add_option("--manifest", o.manifest, "Field series manifest (JSON)");
  auto* c = app->add_option("--csv", o.csv, "Field series as timestep,rank,value rows");
  auto* s = app->add_option("--synth", o.synth,
                            "Generate the field in memory from a synth config JSON "
                            "('default' for built-in defaults)");
  m->excludes(c)->excludes(s);
  c->excludes(s);
  app->add_option("--ground-truth", o.ground_truth,
                  "Ground-truth JSON written by 'synth' (enables classification)");
  app->add_option("--window", o.window, "Ground-truth window as t_lo,t_hi")
      ->delimiter(',')
      ->expected(2);
}

void add_indicator(CLI::App* app, IndicatorOptions& o) {
  app->add_option("--kind", o.kind, "Indicator kind")
      ->check(CLI::IsMember({"C", "P"}))
      ->capture_default_str();
  app->add_option("--alpha", o.alpha,
                  "Lower percentile (default 0.92 for C, 0.94 for P)");
  app->add_option("--beta", o.beta, "Upper percentile (default 0.99 for C, 0.98 for P)");
  app->add_option("--gamma", o.gamma, "Reference percentile for P")->capture_default_str();
  app->add_option("--step", o.step, "Percentile grid step for C")->capture_default_str();
  app->add_option("--variant", o.variant,
                  "C normalization: cov (std/mean) or literal (extra mean factor)")
      ->check(CLI::IsMember({"cov", "literal"}))
      ->capture_default_str();
}

void add_sampling(CLI::App* app, SamplingOptions& o) {
  app->add_option("--k", o.k,
                  "Samples per rank; omit for exact percentiles, 'whole' for the "
                  "whole-field sample");
  app->add_option("--seed", o.seed, "Master seed for all sampling")->capture_default_str();
}

void add_trigger(CLI::App* app, TriggerOptions& o, bool with_tau) {
  if (with_tau) {
    app->add_option("--tau", o.tau, "Threshold; viable C range is roughly [0.01, 0.05]")
        ->capture_default_str();
  }
  app->add_option("--direction", o.direction, "Crossing direction")
      ->check(CLI::IsMember({"from_below", "from_above"}))
      ->capture_default_str();
  app->add_option("--confirm", o.confirm, "Defined values that must confirm a crossing")
      ->capture_default_str();
}

struct LoadedInput {
  FieldSeries series;
  std::optional<GroundTruthWindow> truth;
  std::optional<SynthConfig> synth;
};

SynthConfig read_synth_config(const std::string& path) {
  if (path.empty() || path == "default") return SynthConfig{};
  std::ifstream in(path);
  if (!in) throw IoError("cannot open synth config: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ValidationError("malformed synth config " + path + ": " + e.what());
  }
  return synth_config_from_json(j);
}

LoadedInput load_input(const InputOptions& o) {
  const int sources = !o.manifest.empty() + !o.csv.empty() + !o.synth.empty();
  if (sources != 1) {
    throw ValidationError("exactly one of --manifest, --csv, --synth is required");
  }
  std::optional<GroundTruthWindow> truth;
  std::optional<SynthConfig> synth;
  std::optional<FieldSeries> series;
  if (!o.synth.empty()) {
    synth = read_synth_config(o.synth);
    auto [s, g] = generate_ensemble(*synth);
    series.emplace(std::move(s));
    truth = g.window;
  } else if (!o.manifest.empty()) {
    series.emplace(load_series(o.manifest));
  } else {
    series.emplace(load_csv_series(o.csv));
  }
  if (!o.ground_truth.empty()) {
    std::ifstream in(o.ground_truth);
    if (!in) throw IoError("cannot open ground truth: " + o.ground_truth);
    json j;
    try {
      in >> j;
    } catch (const json::parse_error& e) {
      throw ValidationError("malformed ground truth " + o.ground_truth + ": " + e.what());
    }
    truth = ground_truth_from_json(j).window;
  }
  if (!o.window.empty()) truth = GroundTruthWindow(o.window[0], o.window[1]);
  return {std::move(*series), truth, synth};
}

IndicatorConfig resolve_indicator(const IndicatorOptions& o) {
  IndicatorConfig c = o.kind == "P" ? IndicatorConfig::p_defaults() : IndicatorConfig::c_defaults();
  if (o.alpha) c.alpha = *o.alpha;
  if (o.beta) c.beta = *o.beta;
  c.gamma = o.gamma;
  c.grid_step = o.step;
  c.c_variant = o.variant == "literal" ? CVariant::LiteralEq1 : CVariant::StandardCov;
  c.validate();
  return c;
}

std::size_t parse_k(const std::string& text) {
  if (text == "whole") return kWholeField;
  std::size_t k = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), k);
  if (ec != std::errc{} || ptr != text.data() + text.size() || k == 0) {
    throw ValidationError("--k must be a positive integer or 'whole', got '" + text + "'");
  }
  return k;
}

Sampling resolve_sampling(const SamplingOptions& o) {
  if (o.k.empty()) return ExactPercentiles{};
  return sampling_for_k(parse_k(o.k), o.seed);
}

TriggerConfig resolve_trigger(const TriggerOptions& o) {
  return TriggerConfig{o.tau, parse_direction(o.direction), o.confirm};
}

json indicator_json(const IndicatorConfig& c) {
  json j = {{"kind", to_string(c.kind)}, {"alpha", c.alpha}, {"beta", c.beta}};
  if (c.kind == IndicatorKind::P) {
    j["gamma"] = c.gamma;
  } else {
    j["grid_step"] = c.grid_step;
    j["variant"] = to_string(c.c_variant);
  }
  return j;
}

json trigger_json(const TriggerConfig& c) {
  return {{"tau", c.tau}, {"direction", to_string(c.direction)}, {"confirm_steps", c.confirm_steps}};
}

json input_json(const InputOptions& o, const LoadedInput& in) {
  json j;
  if (!o.manifest.empty()) j["manifest"] = o.manifest;
  if (!o.csv.empty()) j["csv"] = o.csv;
  if (in.synth) j["synth"] = to_json(*in.synth);
  if (in.truth) j["ground_truth_window"] = {in.truth->t_lo, in.truth->t_hi};
  return j;
}

void write_json(const fs::path& path, const json& j) {
  detail::write_text_file(path, j.dump(2) + "\n");
}

// Sidecar carrying the resolved configuration next to an output file. Only
// file names are recorded so that reruns into another directory match.
void write_sidecar(const fs::path& output, json config) {
  config["output"] = output.filename().string();
  write_json(fs::path(output.string() + ".json"), config);
}

void ensure_parent(const fs::path& file) {
  if (file.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(file.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + file.parent_path().string());
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"In-situ percentile indicators and threshold triggers", "ctrigger"};
  app.require_subcommand(1);

  // synth
  std::string synth_config_path;
  std::string synth_out;
  std::optional<std::uint64_t> synth_seed;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic ignition ensemble");
  synth->add_option("--config", synth_config_path, "Synth config JSON (defaults if omitted)");
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--seed", synth_seed, "Override the config seed");

  // indicator
  InputOptions ind_in;
  IndicatorOptions ind_opt;
  SamplingOptions ind_samp;
  std::string ind_out;
  auto* indicator = app.add_subcommand("indicator", "Evaluate an indicator series to CSV");
  add_input(indicator, ind_in);
  add_indicator(indicator, ind_opt);
  add_sampling(indicator, ind_samp);
  indicator->add_option("--out", ind_out, "Output CSV")->required();

  // trigger
  InputOptions trg_in;
  IndicatorOptions trg_ind;
  SamplingOptions trg_samp;
  TriggerOptions trg_opt;
  std::string trg_out;
  auto* trigger = app.add_subcommand("trigger", "Detect the first threshold crossing");
  add_input(trigger, trg_in);
  add_indicator(trigger, trg_ind);
  add_sampling(trigger, trg_samp);
  add_trigger(trigger, trg_opt, true);
  trigger->add_option("--out", trg_out, "Output report JSON")->required();

  // sweep-tau
  InputOptions st_in;
  IndicatorOptions st_ind;
  SamplingOptions st_samp;
  TriggerOptions st_trg;
  double tau_min = 0.01, tau_max = 0.05, tau_step = 0.005;
  std::vector<double> tau_list;
  std::string st_out;
  auto* sweep_tau_cmd = app.add_subcommand("sweep-tau", "Fire time as a function of tau");
  add_input(sweep_tau_cmd, st_in);
  add_indicator(sweep_tau_cmd, st_ind);
  add_sampling(sweep_tau_cmd, st_samp);
  add_trigger(sweep_tau_cmd, st_trg, false);
  sweep_tau_cmd->add_option("--tau-min", tau_min, "Smallest tau")->capture_default_str();
  sweep_tau_cmd->add_option("--tau-max", tau_max, "Largest tau")->capture_default_str();
  sweep_tau_cmd->add_option("--tau-step", tau_step, "Tau grid step")->capture_default_str();
  sweep_tau_cmd->add_option("--tau", tau_list, "Explicit tau list (overrides the grid)")
      ->delimiter(',');
  sweep_tau_cmd->add_option("--out", st_out, "Output long-form CSV")->required();

  // sweep-samples
  InputOptions ss_in;
  IndicatorOptions ss_ind;
  TriggerOptions ss_trg;
  std::vector<std::string> k_list{"5", "10", "20", "40", "80"};
  std::size_t realizations = 50;
  std::uint64_t ss_seed = 1;
  bool fresh_field = false;
  std::string ss_out;
  auto* sweep_samples_cmd =
      app.add_subcommand("sweep-samples", "Fire-time variability against samples per rank");
  add_input(sweep_samples_cmd, ss_in);
  add_indicator(sweep_samples_cmd, ss_ind);
  add_trigger(sweep_samples_cmd, ss_trg, true);
  sweep_samples_cmd->add_option("--k", k_list, "Samples per rank list ('whole' allowed)")
      ->delimiter(',')
      ->capture_default_str();
  sweep_samples_cmd->add_option("--realizations", realizations, "Realizations per k")
      ->capture_default_str();
  sweep_samples_cmd->add_option("--seed", ss_seed, "Master seed")->capture_default_str();
  sweep_samples_cmd->add_flag("--fresh-field", fresh_field,
                              "Regenerate the synthetic field per realization (--synth only)");
  sweep_samples_cmd->add_option("--out", ss_out, "Output long-form CSV")->required();

  // adaptive
  InputOptions ad_in;
  IndicatorOptions ad_ind;
  SamplingOptions ad_samp;
  TriggerOptions ad_trg;
  std::size_t coarse_every = 50, fine_every = 1;
  std::string ad_out;
  auto* adaptive = app.add_subcommand("adaptive", "Simulate the coarse-to-fine output switch");
  add_input(adaptive, ad_in);
  add_indicator(adaptive, ad_ind);
  add_sampling(adaptive, ad_samp);
  add_trigger(adaptive, ad_trg, true);
  adaptive->add_option("--coarse-every", coarse_every, "Output cadence before the switch")
      ->capture_default_str();
  adaptive->add_option("--fine-every", fine_every, "Output cadence after the switch")
      ->capture_default_str();
  adaptive->add_option("--out", ad_out, "Output trace CSV")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (synth->parsed()) {
      SynthConfig cfg = read_synth_config(synth_config_path);
      if (synth_seed) cfg.seed = *synth_seed;
      cfg.validate();
      auto [series, truth] = generate_ensemble(cfg);
      const fs::path dir(synth_out);
      const auto manifest = write_series(series, dir, "series");
      write_json(dir / "ground_truth.json", to_json(truth));
      write_json(dir / "synth_config.json", to_json(cfg));
      out << manifest.string() << '\n';
    } else if (indicator->parsed()) {
      const auto in = load_input(ind_in);
      const auto cfg = resolve_indicator(ind_opt);
      const auto sampling = resolve_sampling(ind_samp);
      const auto result = indicator_series(in.series, cfg, sampling);
      const fs::path path(ind_out);
      ensure_parent(path);
      write_indicator_csv(result, path);
      write_sidecar(path, {{"subcommand", "indicator"},
                           {"input", input_json(ind_in, in)},
                           {"indicator", indicator_json(cfg)},
                           {"sampling", describe(sampling)}});
    } else if (trigger->parsed()) {
      const auto in = load_input(trg_in);
      const auto cfg = resolve_indicator(trg_ind);
      const auto sampling = resolve_sampling(trg_samp);
      const auto tcfg = resolve_trigger(trg_opt);
      const auto series = indicator_series(in.series, cfg, sampling);
      const auto result = detect_crossing(series, tcfg);
      std::optional<Classification> cls;
      if (in.truth) cls = classify(result, *in.truth);
      const fs::path path(trg_out);
      ensure_parent(path);
      write_json(path, trigger_report(result, cls));
      write_sidecar(path, {{"subcommand", "trigger"},
                           {"input", input_json(trg_in, in)},
                           {"indicator", indicator_json(cfg)},
                           {"trigger", trigger_json(tcfg)},
                           {"sampling", describe(sampling)}});
    } else if (sweep_tau_cmd->parsed()) {
      const auto in = load_input(st_in);
      const auto cfg = resolve_indicator(st_ind);
      const auto sampling = resolve_sampling(st_samp);
      const auto base = resolve_trigger(st_trg);
      const auto taus = tau_list.empty() ? uniform_axis(tau_min, tau_max, tau_step) : tau_list;
      const auto series = indicator_series(in.series, cfg, sampling);
      const auto table = sweep_tau(series, taus, base, in.truth);
      const fs::path path(st_out);
      ensure_parent(path);
      detail::write_text_file(path, sweep_csv(table));
      write_json(path.parent_path() / (path.stem().string() + ".summary.json"),
                 sweep_summary_json(table));
      write_sidecar(path, {{"subcommand", "sweep-tau"},
                           {"input", input_json(st_in, in)},
                           {"indicator", indicator_json(cfg)},
                           {"trigger", trigger_json(base)},
                           {"tau_values", taus},
                           {"sampling", describe(sampling)}});
    } else if (sweep_samples_cmd->parsed()) {
      const auto in = load_input(ss_in);
      const auto cfg = resolve_indicator(ss_ind);
      const auto tcfg = resolve_trigger(ss_trg);
      std::vector<std::size_t> ks;
      for (const auto& k : k_list) ks.push_back(parse_k(k));
      SweepTable table;
      if (fresh_field) {
        if (!in.synth) throw ValidationError("--fresh-field requires --synth");
        table.axis_name = "k_per_rank";
        for (auto k : ks) {
          SweepRow row{static_cast<double>(k),
                       run_realizations(*in.synth, cfg, tcfg, k, realizations, ss_seed,
                                        FieldMode::Fresh),
                       {}};
          row.summary = summarize(row.reports);
          table.rows.push_back(std::move(row));
        }
      } else {
        table = sweep_samples(in.series, in.truth, cfg, tcfg, ks, realizations, ss_seed);
      }
      const fs::path path(ss_out);
      ensure_parent(path);
      detail::write_text_file(path, sweep_csv(table));
      write_json(path.parent_path() / (path.stem().string() + ".summary.json"),
                 sweep_summary_json(table));
      write_sidecar(path, {{"subcommand", "sweep-samples"},
                           {"input", input_json(ss_in, in)},
                           {"indicator", indicator_json(cfg)},
                           {"trigger", trigger_json(tcfg)},
                           {"k_per_rank", ks},
                           {"realizations", realizations},
                           {"seed", ss_seed},
                           {"field_mode", fresh_field ? "fresh" : "fixed"}});
    } else if (adaptive->parsed()) {
      const auto in = load_input(ad_in);
      const auto cfg = resolve_indicator(ad_ind);
      const auto sampling = resolve_sampling(ad_samp);
      const auto tcfg = resolve_trigger(ad_trg);
      const auto trace = adaptive_loop(in.series, cfg, tcfg, coarse_every, fine_every, sampling);
      const fs::path path(ad_out);
      ensure_parent(path);
      detail::write_text_file(path, workflow_csv(trace));
      auto opt = [](const auto& v) { return v ? json(*v) : json(nullptr); };
      write_sidecar(path, {{"subcommand", "adaptive"},
                           {"input", input_json(ad_in, in)},
                           {"indicator", indicator_json(cfg)},
                           {"trigger", trigger_json(tcfg)},
                           {"sampling", describe(sampling)},
                           {"coarse_every", coarse_every},
                           {"fine_every", fine_every},
                           {"switch_timestep", opt(trace.switch_timestep)},
                           {"fire_timestep", opt(trace.fire_timestep)}});
    }
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitOk;
}

}  // namespace ctrigger
