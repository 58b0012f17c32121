#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "ctrigger/field_model.hpp"

namespace ctrigger {

/// Strictly increasing percentile fractions, each in (0, 1].
class PercentileGrid {
 public:
  explicit PercentileGrid(std::vector<double> positions);

  /// {lo, lo + step, ..., hi}. `step` must divide `hi - lo` to within 1e-9.
  static PercentileGrid uniform(double lo, double hi, double step = 0.01);

  std::span<const double> positions() const { return positions_; }
  std::size_t size() const { return positions_.size(); }
  double operator[](std::size_t i) const { return positions_[i]; }

  bool operator==(const PercentileGrid&) const = default;

 private:
  std::vector<double> positions_;
};

struct ExactSource {
  bool operator==(const ExactSource&) const = default;
};
struct SampledSource {
  std::size_t k_per_rank = 0;
  std::uint64_t seed = 0;
  bool operator==(const SampledSource&) const = default;
};
using PercentileSource = std::variant<ExactSource, SampledSource>;

struct PercentileVector {
  PercentileGrid grid;
  std::vector<double> values;  // nondecreasing along the grid
  PercentileSource source;
  Timestep timestep = 0;
};

/// Sorted draws from a snapshot.
struct Sample {
  std::vector<double> values;
  std::uint64_t seed = 0;
  std::size_t k() const { return values.size(); }
};

/// 1-based index ceil(alpha * n), clamped to [1, n].
///
/// alpha * n is snapped to the nearest integer when it lies within 1e-9
/// (relative) of one, so that grid positions such as 0.92 built in binary
/// floating point select the same entry as the decimal definition.
std::size_t percentile_rank(double alpha, std::size_t n);

/// Percentile of an already sorted array; no validation of sortedness.
double percentile_of_sorted(std::span<const double> sorted, double alpha);

double exact_percentile(std::span<const double> values, double alpha);

PercentileVector exact_percentile_vector(const FieldSnapshot& snapshot,
                                         const PercentileGrid& grid);

/// Per-rank draw counts proportional to partition size:
/// round(k_per_rank * n_ranks * len_r / N), at least 1.
std::vector<std::size_t> per_rank_sample_counts(const FieldSnapshot& snapshot,
                                                std::size_t k_per_rank);

/// Uniform draws with replacement from each rank, merged and sorted. Each
/// (rank, timestep) pair uses its own substream of `seed`.
Sample draw_sample(const FieldSnapshot& snapshot, std::size_t k_per_rank, std::uint64_t seed);

/// Deterministic "sample" containing every value of the snapshot.
Sample whole_field_sample(const FieldSnapshot& snapshot);

double estimate_percentile(const Sample& sample, double alpha);

PercentileVector estimate_percentile_vector(const Sample& sample, const PercentileGrid& grid,
                                            PercentileSource source, Timestep timestep);

/// Sample size from the Dvoretzky-Kiefer-Wolfowitz inequality:
/// ceil(ln(2 / delta) / (2 epsilon^2)). Independent of the field size.
std::size_t required_sample_size(double epsilon, double delta);

}  // namespace ctrigger
