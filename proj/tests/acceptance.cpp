// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ctrigger/cli.hpp"
#include "ctrigger/errors.hpp"
#include "ctrigger/harness.hpp"
#include "ctrigger/quantile.hpp"
#include "test_util.hpp"

using namespace ctrigger;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

bool rel_close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b));
}

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Full sort, then the ceil(s * n / 100)-th entry in integer arithmetic.
double oracle_percentile(const std::vector<double>& sorted, int s) {
  const std::size_t n = sorted.size();
  const std::size_t idx = std::max<std::size_t>((static_cast<std::size_t>(s) * n + 99) / 100, 1);
  return sorted[idx - 1];
}

Outcome criterion1() {
  const auto start = Clock::now();
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<std::size_t> size_dist(1, 10000);
  std::size_t mismatches = 0, checks = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = size_dist(rng);
    // A small value pool forces duplicates on most arrays.
    const int pool = trial % 3 == 0 ? 5 : trial % 3 == 1 ? static_cast<int>(n / 4 + 1) : 1 << 30;
    std::uniform_int_distribution<int> v(0, pool);
    std::vector<double> a(n);
    for (auto& x : a) x = static_cast<double>(v(rng)) * 0.37;
    std::vector<double> sorted = a;
    std::sort(sorted.begin(), sorted.end());
    for (int s = 1; s <= 99; ++s) {
      ++checks;
      if (exact_percentile(a, s / 100.0) != oracle_percentile(sorted, s)) ++mismatches;
    }
  }
  const double secs = seconds_since(start);
  return {mismatches == 0 && secs < 60.0,
          fmt("%zu mismatches in %zu checks, %.1fs", mismatches, checks, secs)};
}

// Fraction of trials whose estimate of p_0.95 has rank error above 0.05.
double sampling_failure_rate(std::size_t n_points, std::size_t k_total, std::uint64_t seed) {
  const std::size_t n_ranks = 4;
  std::vector<double> values(n_points);
  for (std::size_t i = 0; i < n_points; ++i) values[i] = static_cast<double>(i + 1);
  std::shuffle(values.begin(), values.end(), std::mt19937_64(seed));
  const FieldSnapshot snap(0, values, std::vector<std::size_t>(n_ranks, n_points / n_ranks));
  // Values are 1..N, so the empirical CDF at v is v / N.
  std::size_t failures = 0;
  for (std::uint64_t trial = 0; trial < 1000; ++trial) {
    const auto sample = draw_sample(snap, k_total / n_ranks, seed * 1000003 + trial);
    const double est = estimate_percentile(sample, 0.95);
    if (std::abs(est / static_cast<double>(n_points) - 0.95) > 0.05) ++failures;
  }
  return static_cast<double>(failures) / 1000.0;
}

Outcome criterion2() {
  const auto start = Clock::now();
  const std::size_t k = required_sample_size(0.05, 0.01);
  const double big = sampling_failure_rate(1000000, k, 7);
  const double small = sampling_failure_rate(10000, k, 8);
  const double secs = seconds_since(start);
  const bool pass = k == 1060 && big <= 0.02 && std::abs(big - small) <= 0.01 && secs < 300.0;
  return {pass, fmt("k=%zu, failure rate %.3f at N=1e6, %.3f at N=1e4, %.1fs", k, big, small,
                    secs)};
}

Outcome criterion3() {
  std::mt19937_64 rng(303);
  std::uniform_int_distribution<int> len(2, 100);
  std::uniform_real_distribution<double> mag(-3.0, 3.0);
  std::size_t bad = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> p(static_cast<std::size_t>(len(rng)));
    const double scale = std::pow(10.0, mag(rng));
    for (auto& x : p) x = scale * std::exp(mag(rng));
    std::sort(p.begin(), p.end());
    double mu = 0.0;
    for (double x : p) mu += x;
    mu /= static_cast<double>(p.size());
    const double lit = c_indicator(p, CVariant::LiteralEq1);
    const double expect = std::sqrt(mu) * c_indicator(p, CVariant::StandardCov);
    const double err = std::abs(lit - expect) / std::max(std::abs(lit), std::abs(expect));
    worst = std::max(worst, err);
    if (!rel_close(lit, expect, 1e-12)) ++bad;
  }
  return {bad == 0, fmt("%zu violations, worst relative error %.2e", bad, worst)};
}

std::vector<double> random_field(std::mt19937_64& rng, std::size_t n) {
  std::uniform_int_distribution<int> shape(0, 2);
  std::lognormal_distribution<double> logn(0.0, 1.0);
  std::gamma_distribution<double> gam(2.0, 3.0);
  std::uniform_real_distribution<double> uni(0.5, 50.0);
  const int s = shape(rng);
  std::vector<double> v(n);
  for (auto& x : v) x = s == 0 ? logn(rng) : s == 1 ? gam(rng) : uni(rng);
  return v;
}

bool nondecreasing(const std::vector<double>& v) { return std::is_sorted(v.begin(), v.end()); }

Outcome criterion4() {
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> ua(0.1, 10.0), ub(-100.0, 100.0);
  const auto c_cfg = IndicatorConfig::c_defaults();
  const auto p_cfg = IndicatorConfig::p_defaults();
  const auto c_grid = percentile_grid_for(c_cfg);
  const auto all = PercentileGrid::uniform(0.01, 1.0, 0.01);
  std::size_t c_bad = 0, p_bad = 0, mono_bad = 0, vectors = 0;
  auto track = [&](const PercentileVector& pv) {
    ++vectors;
    if (!nondecreasing(pv.values)) ++mono_bad;
  };
  for (int trial = 0; trial < 200; ++trial) {
    const auto base = random_field(rng, 2000);
    const FieldSnapshot snap(0, base, {1000, 1000});
    const auto pv = exact_percentile_vector(snap, c_grid);
    track(pv);
    track(exact_percentile_vector(snap, all));
    track(estimate_percentile_vector(draw_sample(snap, 20, trial), all, SampledSource{}, 0));
    const double c0 = c_indicator(pv, c_cfg);
    for (double c : {0.1, 3.0, 1000.0}) {
      std::vector<double> scaled = base;
      for (auto& x : scaled) x *= c;
      const auto spv = exact_percentile_vector(FieldSnapshot(0, scaled, {1000, 1000}), c_grid);
      track(spv);
      if (!rel_close(c_indicator(spv, c_cfg), c0, 1e-9)) ++c_bad;
    }
    const double p0 = *indicator_at(snap, p_cfg, ExactPercentiles{});
    for (int m = 0; m < 3; ++m) {
      const double a = ua(rng), b = ub(rng);
      std::vector<double> mapped = base;
      for (auto& x : mapped) x = a * x + b;
      const FieldSnapshot ms(0, mapped, {1000, 1000});
      track(exact_percentile_vector(ms, all));
      const auto p1 = indicator_at(ms, p_cfg, ExactPercentiles{});
      if (!p1 || !rel_close(*p1, p0, 1e-9)) ++p_bad;
    }
  }
  return {c_bad == 0 && p_bad == 0 && mono_bad == 0,
          fmt("C scaling violations %zu, P affine violations %zu, non-monotone vectors %zu of %zu",
              c_bad, p_bad, mono_bad, vectors)};
}

// Straightforward scan: every adjacent pair of defined values, then a
// look-ahead over the following defined values.
std::optional<Timestep> scan_oracle(const std::vector<std::optional<double>>& v, double tau,
                                    bool from_below, std::size_t confirm) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v[i]) idx.push_back(i);
  auto above = [&](double x) { return from_below ? x >= tau : x <= tau; };
  for (std::size_t j = 1; j < idx.size(); ++j) {
    if (above(*v[idx[j - 1]]) || !above(*v[idx[j]])) continue;
    bool ok = true;
    for (std::size_t q = j + 1; q < idx.size() && q <= j + confirm; ++q) ok = ok && above(*v[idx[q]]);
    if (ok) return static_cast<Timestep>(idx[j]);
  }
  return std::nullopt;
}

std::optional<Timestep> run_detect(const std::vector<std::optional<double>>& v, double tau,
                                   Direction d, std::size_t confirm) {
  std::vector<IndicatorPoint> pts;
  for (std::size_t i = 0; i < v.size(); ++i) pts.push_back({static_cast<Timestep>(i), v[i]});
  return detect_crossing(pts, TriggerConfig{tau, d, confirm}).fire_timestep;
}

Outcome criterion5() {
  std::size_t disagreements = 0;
  using V = std::vector<std::optional<double>>;
  disagreements += run_detect(V{0.005, 0.008, 0.02, 0.04}, 0.01, Direction::FromBelow, 0) != 2;
  disagreements += run_detect(V{0.02, 0.03, 0.05, 0.04}, 0.01, Direction::FromBelow, 0).has_value();
  disagreements += run_detect(V{0.005, 0.02, 0.007, 0.03}, 0.01, Direction::FromBelow, 1) != 3;

  std::mt19937_64 rng(505);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> len(2, 60);
  std::size_t series = 0;
  while (series < 500) {
    V v(static_cast<std::size_t>(len(rng)));
    for (auto& x : v) {
      if (u(rng) < 0.15) x = std::nullopt;
      else x = std::round(u(rng) * 20.0) / 20.0;  // coarse values so ties at tau occur
    }
    if (std::count_if(v.begin(), v.end(), [](auto& x) { return x.has_value(); }) < 2) continue;
    ++series;
    const bool below = u(rng) < 0.5;
    const std::size_t confirm = static_cast<std::size_t>(series % 4);
    const double tau = std::round(u(rng) * 20.0) / 20.0;
    const auto d = below ? Direction::FromBelow : Direction::FromAbove;
    if (run_detect(v, tau, d, confirm) != scan_oracle(v, tau, below, confirm)) ++disagreements;
  }

  std::size_t monotone_bad = 0;
  std::exponential_distribution<double> inc(100.0);
  for (int trial = 0; trial < 100; ++trial) {
    V v;
    double x = 0.0;
    for (int i = 0; i < 100; ++i) v.push_back(x += inc(rng));
    std::optional<Timestep> prev;
    for (int i = 1; i <= 20; ++i) {
      const auto f = run_detect(v, 0.0025 * i, Direction::FromBelow, 0);
      if (prev && (!f || *f < *prev)) ++monotone_bad;
      prev = f;
    }
  }
  return {disagreements == 0 && monotone_bad == 0,
          fmt("%zu disagreements over 3 examples and %zu random series; %zu monotonicity "
              "violations",
              disagreements, series, monotone_bad)};
}

const std::pair<FieldSeries, GroundTruth>& default_ensemble() {
  static const auto e = generate_ensemble(SynthConfig{});
  return e;
}

Outcome criterion6() {
  const auto start = Clock::now();
  const auto& [series, truth] = default_ensemble();
  const auto reports = run_realizations(series, truth.window, IndicatorConfig::c_defaults(),
                                        TriggerConfig{0.03, Direction::FromBelow, 0}, 20, 50, 6);
  const auto s = summarize(reports);
  const double secs = seconds_since(start);
  const double good = static_cast<double>(s.n_in_window + s.n_early) / static_cast<double>(s.n);
  const bool pass = s.detection_rate >= 0.95 && good >= 0.90 && secs < 120.0;
  return {pass, fmt("fired %zu/%zu, in_window %zu, early %zu, late %zu, %.1fs", s.n_fired, s.n,
                    s.n_in_window, s.n_early, s.n_late, secs)};
}

Outcome criterion7() {
  const auto& [series, truth] = default_ensemble();
  auto median_spread = [&](std::size_t k) -> std::optional<double> {
    std::vector<double> spreads;
    for (std::uint64_t rep = 0; rep < 5; ++rep) {
      const auto s = summarize(run_realizations(series, truth.window, IndicatorConfig::c_defaults(),
                                                TriggerConfig{}, k, 50, 700 + rep));
      if (!s.spread()) return std::nullopt;
      spreads.push_back(static_cast<double>(*s.spread()));
    }
    std::sort(spreads.begin(), spreads.end());
    return spreads[2];
  };
  const auto s5 = median_spread(5);
  const auto s80 = median_spread(80);
  if (!s5 || !s80) return {false, "a repetition produced no fires"};
  return {*s80 <= *s5, fmt("median spread %.0f at k=80, %.0f at k=5", *s80, *s5)};
}

Outcome criterion8() {
  const auto& [series, truth] = default_ensemble();
  const auto ind = indicator_series(series, IndicatorConfig::c_defaults(), ExactPercentiles{});
  const auto table = sweep_tau(ind, uniform_axis(0.01, 0.05, 0.005), TriggerConfig{}, truth.window);
  bool ok = true;
  std::string fires;
  std::optional<Timestep> prev;
  for (const auto& row : table.rows) {
    const auto& r = row.reports.front();
    const bool good = r.classification == Classification::InWindow ||
                      r.classification == Classification::Early;
    ok = ok && good && r.fire_timestep && (!prev || *prev <= *r.fire_timestep);
    prev = r.fire_timestep;
    fires += (fires.empty() ? "" : " ") +
             (r.fire_timestep ? std::to_string(*r.fire_timestep) : std::string("none"));
  }
  return {ok, "fire times " + fires + " for window [" + std::to_string(truth.window.t_lo) + ", " +
                  std::to_string(truth.window.t_hi) + "]"};
}

int cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  return run_cli(args, out, err);
}

Outcome criterion9() {
  TempDir root("acceptance_repro");
  const nlohmann::json cfg = {{"n_steps", 60}, {"n_ranks", 4}, {"points_per_rank", 1024},
                              {"t_ignite", 36}, {"window_halfwidth", 5}};
  spit(root / "cfg.json", cfg.dump());
  const std::string cfg_path = (root / "cfg.json").string();

  std::size_t failures = 0;
  std::vector<std::string> compared;
  for (const char* run : {"a", "b"}) {
    const auto d = root / run;
    // Downstream commands read the first run's data so their inputs match.
    const std::string man = (root / "a" / "data" / "series_manifest.json").string();
    const std::string gt = (root / "a" / "data" / "ground_truth.json").string();
    const std::vector<std::vector<std::string>> cmds = {
        {"synth", "--config", cfg_path, "--seed", "11", "--out", (d / "data").string()},
        {"indicator", "--manifest", man, "--k", "20", "--seed", "3", "--out",
         (d / "ind.csv").string()},
        {"indicator", "--manifest", man, "--kind", "P", "--out", (d / "p.csv").string()},
        {"trigger", "--manifest", man, "--ground-truth", gt, "--k", "20", "--seed", "3", "--out",
         (d / "trig.json").string()},
        {"sweep-tau", "--manifest", man, "--ground-truth", gt, "--out", (d / "tau.csv").string()},
        {"sweep-samples", "--manifest", man, "--ground-truth", gt, "--k", "5,20,whole",
         "--realizations", "10", "--seed", "9", "--out", (d / "ks.csv").string()},
        {"sweep-samples", "--synth", cfg_path, "--fresh-field", "--k", "10", "--realizations", "3",
         "--seed", "9", "--out", (d / "fresh.csv").string()},
        {"adaptive", "--manifest", man, "--k", "20", "--seed", "3", "--out",
         (d / "adaptive.csv").string()},
    };
    for (const auto& c : cmds) failures += cli(c) != 0;
  }
  std::size_t files = 0;
  for (const auto& e : std::filesystem::recursive_directory_iterator(root / "a")) {
    if (!e.is_regular_file()) continue;
    ++files;
    const auto twin = root / "b" / std::filesystem::relative(e.path(), root / "a");
    if (!std::filesystem::exists(twin) || slurp(e.path()) != slurp(twin)) ++failures;
  }
  return {failures == 0 && files > 0,
          fmt("%zu files compared across 6 subcommands, %zu failures", files, failures)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"1 exact percentile oracle", criterion1},
      {"2 sampling concentration", criterion2},
      {"3 C variant identity", criterion3},
      {"4 invariance suite", criterion4},
      {"5 trigger semantics", criterion5},
      {"6 end-to-end detection", criterion6},
      {"7 sampling variability shape", criterion7},
      {"8 tau sweep shape", criterion8},
      {"9 CLI reproducibility", criterion9},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s criterion %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
