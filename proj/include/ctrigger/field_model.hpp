#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace ctrigger {

using Timestep = std::int64_t;

/// One timestep of a scalar field split into contiguous rank partitions.
///
/// Values are stored flat in rank order; `rank(r)` views partition r. The
/// constructor rejects empty partitions and any non-finite value, so every
/// snapshot that exists is valid.
class FieldSnapshot {
 public:
  FieldSnapshot(Timestep timestep, std::vector<double> values,
                std::vector<std::size_t> rank_lengths);

  static FieldSnapshot from_ranks(Timestep timestep,
                                  const std::vector<std::vector<double>>& ranks);

  Timestep timestep() const { return timestep_; }
  std::size_t n_ranks() const { return rank_lengths_.size(); }
  std::size_t size() const { return values_.size(); }

  std::span<const double> values() const { return values_; }
  std::span<const double> rank(std::size_t r) const;
  std::span<const std::size_t> rank_lengths() const { return rank_lengths_; }

 private:
  Timestep timestep_;
  std::vector<double> values_;
  std::vector<std::size_t> rank_lengths_;
  std::vector<std::size_t> offsets_;
};

/// Snapshots ordered by strictly increasing timestep, all sharing one rank
/// layout.
class FieldSeries {
 public:
  explicit FieldSeries(std::vector<FieldSnapshot> snapshots);

  std::size_t size() const { return snapshots_.size(); }
  const FieldSnapshot& operator[](std::size_t i) const { return snapshots_[i]; }
  std::span<const FieldSnapshot> snapshots() const { return snapshots_; }
  auto begin() const { return snapshots_.begin(); }
  auto end() const { return snapshots_.end(); }

  std::size_t n_ranks() const { return snapshots_.front().n_ranks(); }
  std::span<const std::size_t> rank_lengths() const { return snapshots_.front().rank_lengths(); }
  std::vector<Timestep> timesteps() const;

  /// Common timestep difference, if the series is uniformly strided.
  std::optional<Timestep> stride() const;

 private:
  std::vector<FieldSnapshot> snapshots_;
};

/// Reads a JSON manifest and its per-step little-endian float64 files.
FieldSeries load_series(const std::filesystem::path& manifest_path);

/// Writes `<prefix>_manifest.json` plus one `<prefix>_step_NNNNNN.bin` per
/// snapshot into `dir` (created if needed). Returns the manifest path.
std::filesystem::path write_series(const FieldSeries& series, const std::filesystem::path& dir,
                                   std::string_view prefix = "series");

/// Reads `timestep,rank,value` rows. A header line is optional. Within a
/// (timestep, rank) pair the row order defines the point order.
FieldSeries load_csv_series(const std::filesystem::path& csv_path);

}  // namespace ctrigger
