#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ctrigger/field_model.hpp"
#include "ctrigger/quantile.hpp"

namespace ctrigger {

enum class IndicatorKind { C, P };

/// How the C-indicator is normalized. `StandardCov` is the coefficient of
/// variation (sample std / mean). `LiteralEq1` keeps the extra factor of mu
/// under the square root, which makes the value scale like sqrt(field).
enum class CVariant { StandardCov, LiteralEq1 };

struct IndicatorConfig {
  IndicatorKind kind = IndicatorKind::C;
  double alpha = 0.92;
  double beta = 0.99;
  double gamma = 0.01;  // P only
  double grid_step = 0.01;
  CVariant c_variant = CVariant::StandardCov;

  /// alpha = 0.92, beta = 0.99, standard COV.
  static IndicatorConfig c_defaults();
  /// alpha = 0.94, beta = 0.98, gamma = 0.01.
  static IndicatorConfig p_defaults();

  void validate() const;
};

std::string to_string(IndicatorKind kind);
std::string to_string(CVariant variant);

/// {alpha, alpha + step, ..., beta}; needs at least two positions.
PercentileGrid percentile_grid_for(const IndicatorConfig& config);

/// Core C-indicator on raw top-percentile values.
double c_indicator(std::span<const double> percentiles, CVariant variant);
double c_indicator(const PercentileVector& pvec, const IndicatorConfig& config);

struct PercentileTriple {
  double p_alpha = 0.0;
  double p_beta = 0.0;
  double p_gamma = 0.0;
};

/// (p_alpha - p_gamma) / (p_beta - p_gamma). Throws IndicatorUndefined when
/// p_beta == p_gamma.
double p_indicator(const PercentileTriple& p);

// Sampling modes for indicator evaluation.
struct ExactPercentiles {};
struct WholeFieldSample {};
struct UniformSample {
  std::size_t k_per_rank = 20;
  std::uint64_t seed = 0;
};
using Sampling = std::variant<ExactPercentiles, WholeFieldSample, UniformSample>;

std::string describe(const Sampling& sampling);

struct IndicatorPoint {
  Timestep timestep = 0;
  std::optional<double> value;  // empty when the indicator is undefined
  bool defined() const { return value.has_value(); }
};

struct IndicatorSeries {
  IndicatorConfig config;
  std::vector<IndicatorPoint> points;
  Sampling source;

  std::size_t defined_count() const;
};

/// Indicator for one snapshot, or nullopt when undefined.
std::optional<double> indicator_at(const FieldSnapshot& snapshot, const IndicatorConfig& config,
                                   const Sampling& sampling);

IndicatorSeries indicator_series(const FieldSeries& series, const IndicatorConfig& config,
                                 const Sampling& sampling);

/// `timestep,value,defined` with an empty value for gaps.
std::string indicator_csv(const IndicatorSeries& series);
void write_indicator_csv(const IndicatorSeries& series, const std::filesystem::path& path);

}  // namespace ctrigger
