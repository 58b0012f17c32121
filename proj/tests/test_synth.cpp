#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <bit>

#include "ctrigger/errors.hpp"
#include "ctrigger/quantile.hpp"
#include "ctrigger/synth.hpp"

using namespace ctrigger;

namespace {

// max - min of p_0.91 .. p_1.00, from a full sort.
double top_band_spread(const FieldSnapshot& snap) {
  const auto pv = exact_percentile_vector(snap, PercentileGrid::uniform(0.91, 1.0, 0.01));
  return pv.values.back() - pv.values.front();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

TEST_CASE("top spread schedule") {
  const SynthConfig c;
  CHECK(top_spread_at(c, 0) == c.spread_max);
  CHECK(top_spread_at(c, c.t_ignite) == doctest::Approx(c.spread_min));
  CHECK(top_spread_at(c, 60) == doctest::Approx(c.spread_max - (c.spread_max - c.spread_min) * 0.5));
  CHECK(top_spread_at(c, c.t_ignite + 10) == doctest::Approx(c.spread_min + 10 * c.post_ignite_spread_rate));
  SynthConfig z = c;
  z.t_ignite = 0;
  z.window_halfwidth = 0;
  CHECK(top_spread_at(z, 0) == z.spread_min);
}

TEST_CASE("ground truth window") {
  const auto g = ground_truth_for(SynthConfig{});
  CHECK(g.window.t_lo == 105);
  CHECK(g.window.t_hi == 135);
}

TEST_CASE("config validation names the offending field") {
  auto expect_field = [](SynthConfig c, const std::string& field) {
    try {
      c.validate();
      FAIL("expected ValidationError for " << field);
    } catch (const ValidationError& e) {
      CHECK(std::string(e.what()).find("'" + field + "'") != std::string::npos);
    }
  };
  SynthConfig c;
  c.top_fraction = 0.0;
  expect_field(c, "top_fraction");
  c = {};
  c.top_fraction = 1.0;
  expect_field(c, "top_fraction");
  c = {};
  c.spread_min = 60.0;
  expect_field(c, "spread_max");
  c = {};
  c.spread_min = 0.0;
  expect_field(c, "spread_min");
  c = {};
  c.t_ignite = 200;
  expect_field(c, "t_ignite");
  c = {};
  c.window_halfwidth = 100;
  expect_field(c, "window_halfwidth");
  c = {};
  c.n_ranks = 0;
  expect_field(c, "n_ranks");
  c = {};
  c.bulk_spread = -1.0;
  expect_field(c, "bulk_spread");
}

TEST_CASE("config JSON") {
  SynthConfig c;
  c.seed = 99;
  c.top_level = 12.5;
  const auto back = synth_config_from_json(to_json(c));
  CHECK(to_json(back) == to_json(c));
  CHECK(synth_config_from_json(nlohmann::json::object()).n_steps == 200);
  CHECK_THROWS_AS(synth_config_from_json({{"n_stepz", 3}}), ValidationError);
  CHECK_THROWS_AS(synth_config_from_json({{"n_steps", -3}}), ValidationError);
  CHECK_THROWS_AS(synth_config_from_json({{"top_level", "high"}}), ValidationError);
  CHECK_THROWS_AS(synth_config_from_json({{"top_fraction", 0.0}}), ValidationError);

  const auto g = ground_truth_for(c);
  const auto gb = ground_truth_from_json(to_json(g));
  CHECK(gb.window.t_lo == g.window.t_lo);
  CHECK(gb.window.t_hi == g.window.t_hi);
}

TEST_CASE("generation is deterministic per seed") {
  SynthConfig c;
  c.n_steps = 12;
  c.t_ignite = 6;
  c.window_halfwidth = 2;
  c.n_ranks = 3;
  c.points_per_rank = 200;
  const auto [a, ga] = generate_ensemble(c);
  const auto [b, gb] = generate_ensemble(c);
  REQUIRE(a.size() == 12);
  CHECK(a.n_ranks() == 3);
  for (std::size_t s = 0; s < a.size(); ++s) {
    const auto va = a[s].values();
    const auto vb = b[s].values();
    CHECK(std::equal(va.begin(), va.end(), vb.begin(), [](double x, double y) {
      return std::bit_cast<std::uint64_t>(x) == std::bit_cast<std::uint64_t>(y);
    }));
  }
  c.seed += 1;
  const auto [other, _] = generate_ensemble(c);
  CHECK_FALSE(std::equal(a[0].values().begin(), a[0].values().end(), other[0].values().begin()));

  // A single step regenerates identically on its own.
  const auto step = generate_step(ga.config, 5);
  CHECK(std::equal(step.values().begin(), step.values().end(), a[5].values().begin()));
}

TEST_CASE("defaults: top band shrinks into t_ignite and spreads afterwards") {
  const SynthConfig c;
  const double s0 = top_band_spread(generate_step(c, 0));
  const double si = top_band_spread(generate_step(c, c.t_ignite));
  const double sf = top_band_spread(generate_step(c, static_cast<Timestep>(c.n_steps) - 1));
  CHECK(si < s0);
  CHECK(sf > si);
}

TEST_CASE("spread shape holds in the median over 20 seeds") {
  std::vector<double> ratio_in, ratio_out;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    SynthConfig c;
    c.seed = seed;
    const double s0 = top_band_spread(generate_step(c, 0));
    const double si = top_band_spread(generate_step(c, c.t_ignite));
    const double sf = top_band_spread(generate_step(c, static_cast<Timestep>(c.n_steps) - 1));
    ratio_in.push_back(si / s0);
    ratio_out.push_back(sf / si);
  }
  CHECK(median(ratio_in) < 0.5);
  CHECK(median(ratio_out) > 1.5);
}

TEST_CASE("rank exchangeability") {
  SynthConfig c;
  c.n_ranks = 4;
  c.points_per_rank = 300;
  const auto snap = generate_step(c, 30);
  std::vector<std::vector<double>> parts;
  for (std::size_t r = 0; r < 4; ++r) parts.emplace_back(snap.rank(r).begin(), snap.rank(r).end());
  std::reverse(parts.begin(), parts.end());
  std::rotate(parts.begin(), parts.begin() + 1, parts.end());
  const auto permuted = FieldSnapshot::from_ranks(30, parts);
  const auto grid = PercentileGrid::uniform(0.01, 1.0, 0.01);
  CHECK(exact_percentile_vector(snap, grid).values ==
        exact_percentile_vector(permuted, grid).values);
}
