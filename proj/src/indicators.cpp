#include "ctrigger/indicators.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "ctrigger/errors.hpp"
#include "parallel.hpp"
#include "text_util.hpp"

namespace ctrigger {

IndicatorConfig IndicatorConfig::c_defaults() { return IndicatorConfig{}; }

IndicatorConfig IndicatorConfig::p_defaults() {
  IndicatorConfig c;
  c.kind = IndicatorKind::P;
  c.alpha = 0.94;
  c.beta = 0.98;
  c.gamma = 0.01;
  return c;
}

void IndicatorConfig::validate() const {
  if (!(alpha > 0.0 && alpha < beta && beta <= 1.0)) {
    throw ValidationError("indicator needs 0 < alpha < beta <= 1");
  }
  if (kind == IndicatorKind::P && !(gamma > 0.0 && gamma < alpha)) {
    throw ValidationError("P-indicator needs 0 < gamma < alpha");
  }
  if (!(grid_step > 0.0)) throw ValidationError("grid_step must be positive");
  const double intervals = std::round((beta - alpha) / grid_step);
  if (std::abs(alpha + intervals * grid_step - beta) > 1e-9) {
    throw ValidationError("grid_step does not divide beta - alpha");
  }
}

std::string to_string(IndicatorKind kind) { return kind == IndicatorKind::C ? "C" : "P"; }

std::string to_string(CVariant variant) {
  return variant == CVariant::StandardCov ? "standard_cov" : "literal_eq1";
}

PercentileGrid percentile_grid_for(const IndicatorConfig& config) {
  config.validate();
  auto grid = PercentileGrid::uniform(config.alpha, config.beta, config.grid_step);
  if (grid.size() < 2) throw ValidationError("percentile grid needs at least two positions");
  return grid;
}

double c_indicator(std::span<const double> p, CVariant variant) {
  const auto n = p.size();
  if (n < 2) throw IndicatorUndefined("C-indicator needs at least two percentiles");
  const double mu = std::accumulate(p.begin(), p.end(), 0.0) / static_cast<double>(n);
  if (mu == 0.0) throw IndicatorUndefined("C-indicator undefined: percentile mean is zero");
  double ss = 0.0;
  for (double v : p) {
    const double d = v / mu - 1.0;
    ss += d * d;
  }
  const double scale = variant == CVariant::StandardCov ? 1.0 : mu;
  if (scale < 0.0) {
    throw IndicatorUndefined("literal C-indicator undefined: percentile mean is negative");
  }
  return std::sqrt(scale * ss / static_cast<double>(n - 1));
}

double c_indicator(const PercentileVector& pvec, const IndicatorConfig& config) {
  if (!(pvec.grid == percentile_grid_for(config))) {
    throw ValidationError("percentile vector grid does not match the indicator configuration");
  }
  return c_indicator(pvec.values, config.c_variant);
}

double p_indicator(const PercentileTriple& p) {
  const double denom = p.p_beta - p.p_gamma;
  if (denom == 0.0) throw IndicatorUndefined("P-indicator undefined: p_beta equals p_gamma");
  return (p.p_alpha - p.p_gamma) / denom;
}

std::string describe(const Sampling& sampling) {
  if (std::holds_alternative<ExactPercentiles>(sampling)) return "exact";
  if (std::holds_alternative<WholeFieldSample>(sampling)) return "whole_field";
  const auto& u = std::get<UniformSample>(sampling);
  return "uniform(k_per_rank=" + std::to_string(u.k_per_rank) + ",seed=" + std::to_string(u.seed) +
         ")";
}

std::size_t IndicatorSeries::defined_count() const {
  std::size_t n = 0;
  for (const auto& p : points) n += p.defined();
  return n;
}

namespace {

// Sorted values the percentiles are read from, per sampling mode.
std::vector<double> sorted_source(const FieldSnapshot& snapshot, const Sampling& sampling) {
  if (const auto* u = std::get_if<UniformSample>(&sampling)) {
    return draw_sample(snapshot, u->k_per_rank, u->seed).values;
  }
  // Exact percentiles and the whole-field sample read the same sorted array.
  return whole_field_sample(snapshot).values;
}

}  // namespace

std::optional<double> indicator_at(const FieldSnapshot& snapshot, const IndicatorConfig& config,
                                   const Sampling& sampling) {
  const auto sorted = sorted_source(snapshot, sampling);
  try {
    if (config.kind == IndicatorKind::C) {
      const auto grid = percentile_grid_for(config);
      std::vector<double> p;
      p.reserve(grid.size());
      for (double a : grid.positions()) p.push_back(percentile_of_sorted(sorted, a));
      return c_indicator(p, config.c_variant);
    }
    config.validate();
    return p_indicator({percentile_of_sorted(sorted, config.alpha),
                        percentile_of_sorted(sorted, config.beta),
                        percentile_of_sorted(sorted, config.gamma)});
  } catch (const IndicatorUndefined&) {
    return std::nullopt;
  }
}

IndicatorSeries indicator_series(const FieldSeries& series, const IndicatorConfig& config,
                                 const Sampling& sampling) {
  config.validate();
  IndicatorSeries out{config, std::vector<IndicatorPoint>(series.size()), sampling};
  detail::parallel_for(series.size(), [&](std::size_t i) {
    out.points[i] = {series[i].timestep(), indicator_at(series[i], config, sampling)};
  });
  return out;
}

std::string indicator_csv(const IndicatorSeries& series) {
  std::ostringstream os;
  os << "timestep,value,defined\n";
  for (const auto& p : series.points) {
    os << p.timestep << ',' << (p.value ? detail::format_double(*p.value) : std::string()) << ','
       << (p.defined() ? 1 : 0) << '\n';
  }
  return os.str();
}

void write_indicator_csv(const IndicatorSeries& series, const std::filesystem::path& path) {
  detail::write_text_file(path, indicator_csv(series));
}

}  // namespace ctrigger
