#include "ctrigger/field_model.hpp"

#include <json.hpp>

#include <array>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>

#include "ctrigger/errors.hpp"
#include "text_util.hpp"

namespace ctrigger {

namespace fs = std::filesystem;
using nlohmann::json;

FieldSnapshot::FieldSnapshot(Timestep timestep, std::vector<double> values,
                             std::vector<std::size_t> rank_lengths)
    : timestep_(timestep), values_(std::move(values)), rank_lengths_(std::move(rank_lengths)) {
  if (timestep_ < 0) throw ValidationError("snapshot timestep must be non-negative");
  if (rank_lengths_.empty()) throw ValidationError("snapshot needs at least one rank");
  offsets_.reserve(rank_lengths_.size() + 1);
  offsets_.push_back(0);
  for (std::size_t r = 0; r < rank_lengths_.size(); ++r) {
    if (rank_lengths_[r] == 0) {
      throw ValidationError("timestep " + std::to_string(timestep_) + ": rank " +
                            std::to_string(r) + " is empty");
    }
    offsets_.push_back(offsets_.back() + rank_lengths_[r]);
  }
  if (offsets_.back() != values_.size()) {
    throw ValidationError("timestep " + std::to_string(timestep_) + ": rank lengths sum to " +
                          std::to_string(offsets_.back()) + " but " +
                          std::to_string(values_.size()) + " values given");
  }
  for (std::size_t r = 0; r < rank_lengths_.size(); ++r) {
    for (std::size_t i = offsets_[r]; i < offsets_[r + 1]; ++i) {
      if (!std::isfinite(values_[i])) {
        throw ValidationError("non-finite value at timestep " + std::to_string(timestep_) +
                              ", rank " + std::to_string(r) + ", index " +
                              std::to_string(i - offsets_[r]));
      }
    }
  }
}

FieldSnapshot FieldSnapshot::from_ranks(Timestep timestep,
                                        const std::vector<std::vector<double>>& ranks) {
  std::vector<double> flat;
  std::vector<std::size_t> lengths;
  for (const auto& part : ranks) {
    lengths.push_back(part.size());
    flat.insert(flat.end(), part.begin(), part.end());
  }
  return FieldSnapshot(timestep, std::move(flat), std::move(lengths));
}

std::span<const double> FieldSnapshot::rank(std::size_t r) const {
  return std::span<const double>(values_).subspan(offsets_.at(r), rank_lengths_.at(r));
}

FieldSeries::FieldSeries(std::vector<FieldSnapshot> snapshots) : snapshots_(std::move(snapshots)) {
  if (snapshots_.empty()) throw ValidationError("series needs at least one snapshot");
  const auto& layout = snapshots_.front().rank_lengths();
  for (std::size_t i = 1; i < snapshots_.size(); ++i) {
    if (snapshots_[i].timestep() <= snapshots_[i - 1].timestep()) {
      throw ValidationError("timesteps must be strictly increasing (timestep " +
                            std::to_string(snapshots_[i].timestep()) + " after " +
                            std::to_string(snapshots_[i - 1].timestep()) + ")");
    }
    const auto& lens = snapshots_[i].rank_lengths();
    if (lens.size() != layout.size()) {
      throw ValidationError("rank count changes at timestep " +
                            std::to_string(snapshots_[i].timestep()));
    }
    if (!std::equal(lens.begin(), lens.end(), layout.begin())) {
      throw ValidationError("rank lengths change at timestep " +
                            std::to_string(snapshots_[i].timestep()));
    }
  }
}

std::vector<Timestep> FieldSeries::timesteps() const {
  std::vector<Timestep> out;
  out.reserve(snapshots_.size());
  for (const auto& s : snapshots_) out.push_back(s.timestep());
  return out;
}

std::optional<Timestep> FieldSeries::stride() const {
  if (snapshots_.size() < 2) return std::nullopt;
  const Timestep d = snapshots_[1].timestep() - snapshots_[0].timestep();
  for (std::size_t i = 2; i < snapshots_.size(); ++i) {
    if (snapshots_[i].timestep() - snapshots_[i - 1].timestep() != d) return std::nullopt;
  }
  return d;
}

namespace {

constexpr int kManifestVersion = 1;

std::vector<double> read_float64_file(const fs::path& path, std::size_t expected_count) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open data file: " + path.string());
  in.seekg(0, std::ios::end);
  const auto bytes = static_cast<std::size_t>(in.tellg());
  in.seekg(0, std::ios::beg);
  if (bytes != expected_count * 8) {
    throw ValidationError("data file " + path.string() + ": expected " +
                          std::to_string(expected_count * 8) + " bytes (" +
                          std::to_string(expected_count) + " values) but found " +
                          std::to_string(bytes));
  }
  std::vector<unsigned char> raw(bytes);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(bytes));
  if (!in) throw IoError("short read: " + path.string());
  std::vector<double> values(expected_count);
  for (std::size_t i = 0; i < expected_count; ++i) {
    std::uint64_t bits = 0;
    for (int b = 7; b >= 0; --b) bits = (bits << 8) | raw[i * 8 + static_cast<std::size_t>(b)];
    values[i] = std::bit_cast<double>(bits);
  }
  return values;
}

void write_float64_file(const fs::path& path, std::span<const double> values) {
  std::vector<unsigned char> raw(values.size() * 8);
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto bits = std::bit_cast<std::uint64_t>(values[i]);
    for (int b = 0; b < 8; ++b) {
      raw[i * 8 + static_cast<std::size_t>(b)] = static_cast<unsigned char>(bits & 0xff);
      bits >>= 8;
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

template <typename T>
T manifest_field(const json& j, const char* key) {
  if (!j.contains(key)) throw ValidationError(std::string("manifest missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError(std::string("manifest field '") + key + "' has the wrong type");
  }
}

}  // namespace

FieldSeries load_series(const fs::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw IoError("cannot open manifest: " + manifest_path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ValidationError("malformed manifest " + manifest_path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw ValidationError("manifest must be a JSON object");

  if (manifest_field<int>(j, "version") != kManifestVersion) {
    throw ValidationError("unsupported manifest version");
  }
  const auto n_steps = manifest_field<std::size_t>(j, "n_steps");
  const auto n_ranks = manifest_field<std::size_t>(j, "n_ranks");
  const auto rank_lengths = manifest_field<std::vector<std::size_t>>(j, "rank_lengths");
  const auto timesteps = manifest_field<std::vector<Timestep>>(j, "timesteps");
  const auto data_files = manifest_field<std::vector<std::string>>(j, "data_files");

  if (rank_lengths.size() != n_ranks) {
    throw ValidationError("manifest: rank_lengths has " + std::to_string(rank_lengths.size()) +
                          " entries but n_ranks is " + std::to_string(n_ranks));
  }
  if (timesteps.size() != n_steps || data_files.size() != n_steps) {
    throw ValidationError("manifest: timesteps/data_files must both have n_steps entries");
  }
  const std::size_t total = std::accumulate(rank_lengths.begin(), rank_lengths.end(),
                                            std::size_t{0});
  const fs::path base = manifest_path.parent_path();

  std::vector<FieldSnapshot> snapshots;
  snapshots.reserve(n_steps);
  for (std::size_t s = 0; s < n_steps; ++s) {
    auto values = read_float64_file(base / data_files[s], total);
    snapshots.emplace_back(timesteps[s], std::move(values), rank_lengths);
  }
  return FieldSeries(std::move(snapshots));
}

fs::path write_series(const FieldSeries& series, const fs::path& dir, std::string_view prefix) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());

  json files = json::array();
  json steps = json::array();
  for (std::size_t s = 0; s < series.size(); ++s) {
    char name[64];
    std::snprintf(name, sizeof(name), "_step_%06zu.bin", s);
    const std::string file = std::string(prefix) + name;
    write_float64_file(dir / file, series[s].values());
    files.push_back(file);
    steps.push_back(series[s].timestep());
  }

  json manifest = {
      {"version", kManifestVersion},
      {"n_steps", series.size()},
      {"n_ranks", series.n_ranks()},
      {"rank_lengths", std::vector<std::size_t>(series.rank_lengths().begin(),
                                                series.rank_lengths().end())},
      {"timesteps", steps},
      {"data_files", files},
  };
  const fs::path manifest_path = dir / (std::string(prefix) + "_manifest.json");
  detail::write_text_file(manifest_path, manifest.dump(2) + "\n");
  return manifest_path;
}

FieldSeries load_csv_series(const fs::path& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw IoError("cannot open CSV: " + csv_path.string());

  std::map<Timestep, std::map<std::size_t, std::vector<double>>> grouped;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto trimmed = detail::trim(line);
    if (trimmed.empty()) continue;
    auto cols = detail::split(trimmed, ',');
    if (cols.size() != 3) {
      throw ValidationError(csv_path.string() + ":" + std::to_string(line_no) +
                            ": expected 3 columns (timestep,rank,value)");
    }
    Timestep t = 0;
    std::size_t rank = 0;
    const auto c0 = detail::trim(cols[0]);
    const auto c1 = detail::trim(cols[1]);
    const auto c2 = detail::trim(cols[2]);
    auto r0 = std::from_chars(c0.data(), c0.data() + c0.size(), t);
    if (line_no == 1 && r0.ec != std::errc{}) continue;  // header
    auto r1 = std::from_chars(c1.data(), c1.data() + c1.size(), rank);
    double v = 0.0;
    auto r2 = std::from_chars(c2.data(), c2.data() + c2.size(), v);
    if (r0.ec != std::errc{} || r1.ec != std::errc{} || r2.ec != std::errc{} ||
        r0.ptr != c0.data() + c0.size() || r1.ptr != c1.data() + c1.size() ||
        r2.ptr != c2.data() + c2.size()) {
      throw ValidationError(csv_path.string() + ":" + std::to_string(line_no) +
                            ": cannot parse row");
    }
    grouped[t][rank].push_back(v);
  }
  if (grouped.empty()) throw ValidationError(csv_path.string() + ": no data rows");

  std::vector<FieldSnapshot> snapshots;
  for (auto& [t, ranks] : grouped) {
    std::vector<std::vector<double>> parts;
    std::size_t expected = 0;
    for (auto& [r, vals] : ranks) {
      if (r != expected) {
        throw ValidationError(csv_path.string() + ": timestep " + std::to_string(t) +
                              " is missing rank " + std::to_string(expected));
      }
      parts.push_back(std::move(vals));
      ++expected;
    }
    snapshots.push_back(FieldSnapshot::from_ranks(t, parts));
  }
  return FieldSeries(std::move(snapshots));
}

}  // namespace ctrigger
