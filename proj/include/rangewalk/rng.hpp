#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace rangewalk {

/// SplitMix64 finalizer (Stafford variant 13).
constexpr std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

inline constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

/// Identifies one reproducible random substream.
///
/// The substream key is mix64(master_seed ^ mix64(stream_index + gamma)) and
/// the k-th output (k = 1, 2, ...) of the stream is mix64(key + k * gamma),
/// with gamma = 0x9e3779b97f4a7c15. Outputs depend only on (seed, stream, k),
/// never on thread scheduling.
struct RngStreamSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_index = 0;

  constexpr std::uint64_t key() const { return mix64(master_seed ^ mix64(stream_index + kGoldenGamma)); }

  bool operator==(const RngStreamSpec&) const = default;
};

/// Counter-based generator over one substream. Satisfies
/// UniformRandomBitGenerator.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(RngStreamSpec spec) : key_(spec.key()) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    ++counter_;
    return mix64(key_ + counter_ * kGoldenGamma);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Walker/Vose alias table: O(1) sampling of a finite distribution from a
/// single 64-bit draw.
class AliasTable {
 public:
  AliasTable() = default;
  explicit AliasTable(std::span<const double> weights);

  std::size_t size() const { return alias_.size(); }

  template <class Rng>
  std::size_t sample(Rng& rng) const {
    const auto wide = static_cast<unsigned __int128>(rng()) * alias_.size();
    const auto column = static_cast<std::size_t>(wide >> 64);
    const auto fraction = static_cast<std::uint64_t>(wide);
    return fraction < threshold_[column] ? column : alias_[column];
  }

 private:
  std::vector<std::uint64_t> threshold_;
  std::vector<std::uint32_t> alias_;
};

/// Splits `samples` into `streams` contiguous blocks; block j has
/// floor(N(j+1)/S) - floor(Nj/S) samples.
std::uint64_t block_size(std::uint64_t samples, std::size_t streams, std::size_t j);

/// Runs body(j) for j in [0, jobs) on up to `workers` threads. Each j runs
/// exactly once; callers write results into slot j and merge in index order.
template <class Body>
void parallel_for(std::size_t jobs, std::size_t workers, Body&& body);

/// Number of worker threads: explicit value, else RANGEWALK_WORKERS, else the
/// hardware concurrency.
std::size_t resolve_workers(std::size_t requested);

}  // namespace rangewalk

#include "rangewalk/detail/parallel.hpp"
