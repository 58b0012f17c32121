#pragma once

#include <cstdint>

namespace ctrigger {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Stream tags keep the substreams of unrelated consumers apart even when
/// they are keyed by the same counters.
enum class StreamTag : std::uint64_t {
  kSampling = 1,
  kGeneration = 2,
  kRealization = 3,
  kFreshField = 4,
};

/// Counter-based split of a master seed. The result depends only on the
/// arguments, never on the order in which substreams are requested.
constexpr std::uint64_t derive_seed(std::uint64_t master, StreamTag tag, std::uint64_t a,
                                    std::uint64_t b = 0) {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ static_cast<std::uint64_t>(tag));
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ (b * 0xd6e8feb86659fd93ULL));
  return h;
}

/// SplitMix64 as a UniformRandomBitGenerator. Substreams are short (tens
/// to thousands of draws) and numerous, so a one-word state that costs
/// nothing to seed beats a large-state engine here.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

using Engine = SplitMix64;

inline Engine make_engine(std::uint64_t seed) { return Engine(seed); }

}  // namespace ctrigger
