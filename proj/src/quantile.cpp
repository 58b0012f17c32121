#include "ctrigger/quantile.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "ctrigger/errors.hpp"
#include "ctrigger/rng.hpp"

namespace ctrigger {

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw ValidationError("percentile fraction must lie in (0, 1], got " + std::to_string(alpha));
  }
}

}  // namespace

PercentileGrid::PercentileGrid(std::vector<double> positions) : positions_(std::move(positions)) {
  if (positions_.empty()) throw ValidationError("percentile grid is empty");
  for (std::size_t i = 0; i < positions_.size(); ++i) {
    check_alpha(positions_[i]);
    if (i > 0 && !(positions_[i] > positions_[i - 1])) {
      throw ValidationError("percentile grid must be strictly increasing");
    }
  }
}

PercentileGrid PercentileGrid::uniform(double lo, double hi, double step) {
  if (!(step > 0.0)) throw ValidationError("grid step must be positive");
  if (!(hi >= lo)) throw ValidationError("grid upper end below lower end");
  const double intervals = (hi - lo) / step;
  const double rounded = std::round(intervals);
  if (std::abs(lo + rounded * step - hi) > 1e-9) {
    throw ValidationError("grid step does not divide the percentile range");
  }
  const auto n = static_cast<std::size_t>(rounded) + 1;
  std::vector<double> pos(n);
  for (std::size_t i = 0; i < n; ++i) pos[i] = lo + static_cast<double>(i) * step;
  pos.back() = hi;
  return PercentileGrid(std::move(pos));
}

std::size_t percentile_rank(double alpha, std::size_t n) {
  const double x = alpha * static_cast<double>(n);
  const double nearest = std::round(x);
  double idx = std::abs(x - nearest) <= 1e-9 * std::max(1.0, std::abs(x)) ? nearest
                                                                          : std::ceil(x);
  idx = std::clamp(idx, 1.0, static_cast<double>(n));
  return static_cast<std::size_t>(idx);
}

double percentile_of_sorted(std::span<const double> sorted, double alpha) {
  if (sorted.empty()) throw ValidationError("percentile of an empty array");
  check_alpha(alpha);
  return sorted[percentile_rank(alpha, sorted.size()) - 1];
}

double exact_percentile(std::span<const double> values, double alpha) {
  if (values.empty()) throw ValidationError("percentile of an empty array");
  check_alpha(alpha);
  std::vector<double> work(values.begin(), values.end());
  const auto k = percentile_rank(alpha, work.size()) - 1;
  std::nth_element(work.begin(), work.begin() + static_cast<std::ptrdiff_t>(k), work.end());
  return work[k];
}

PercentileVector exact_percentile_vector(const FieldSnapshot& snapshot,
                                         const PercentileGrid& grid) {
  std::vector<double> sorted(snapshot.values().begin(), snapshot.values().end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> values;
  values.reserve(grid.size());
  for (double a : grid.positions()) values.push_back(percentile_of_sorted(sorted, a));
  return PercentileVector{grid, std::move(values), ExactSource{}, snapshot.timestep()};
}

std::vector<std::size_t> per_rank_sample_counts(const FieldSnapshot& snapshot,
                                                std::size_t k_per_rank) {
  if (k_per_rank == 0) throw ValidationError("k_per_rank must be at least 1");
  const double scale = static_cast<double>(k_per_rank) * static_cast<double>(snapshot.n_ranks()) /
                       static_cast<double>(snapshot.size());
  std::vector<std::size_t> counts;
  counts.reserve(snapshot.n_ranks());
  for (std::size_t len : snapshot.rank_lengths()) {
    const auto k = static_cast<std::size_t>(std::llround(scale * static_cast<double>(len)));
    counts.push_back(std::max<std::size_t>(k, 1));
  }
  return counts;
}

Sample draw_sample(const FieldSnapshot& snapshot, std::size_t k_per_rank, std::uint64_t seed) {
  const auto counts = per_rank_sample_counts(snapshot, k_per_rank);
  Sample out;
  out.seed = seed;
  std::size_t total = 0;
  for (auto c : counts) total += c;
  out.values.reserve(total);
  for (std::size_t r = 0; r < snapshot.n_ranks(); ++r) {
    const auto part = snapshot.rank(r);
    auto engine = make_engine(derive_seed(seed, StreamTag::kSampling, r,
                                          static_cast<std::uint64_t>(snapshot.timestep())));
    std::uniform_int_distribution<std::size_t> pick(0, part.size() - 1);
    for (std::size_t i = 0; i < counts[r]; ++i) out.values.push_back(part[pick(engine)]);
  }
  std::sort(out.values.begin(), out.values.end());
  return out;
}

Sample whole_field_sample(const FieldSnapshot& snapshot) {
  Sample out;
  out.values.assign(snapshot.values().begin(), snapshot.values().end());
  std::sort(out.values.begin(), out.values.end());
  return out;
}

double estimate_percentile(const Sample& sample, double alpha) {
  return percentile_of_sorted(sample.values, alpha);
}

PercentileVector estimate_percentile_vector(const Sample& sample, const PercentileGrid& grid,
                                            PercentileSource source, Timestep timestep) {
  std::vector<double> values;
  values.reserve(grid.size());
  for (double a : grid.positions()) values.push_back(estimate_percentile(sample, a));
  return PercentileVector{grid, std::move(values), source, timestep};
}

std::size_t required_sample_size(double epsilon, double delta) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ValidationError("epsilon must lie in (0, 1)");
  if (!(delta > 0.0 && delta < 1.0)) throw ValidationError("delta must lie in (0, 1)");
  return static_cast<std::size_t>(std::ceil(std::log(2.0 / delta) / (2.0 * epsilon * epsilon)));
}

}  // namespace ctrigger
