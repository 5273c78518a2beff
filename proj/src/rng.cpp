#include "rangewalk/rng.hpp"

#include <cmath>
#include <cstdlib>
#include <string>
#include <thread>

#include "rangewalk/error.hpp"

namespace rangewalk {

AliasTable::AliasTable(std::span<const double> weights) {
  const std::size_t n = weights.size();
  if (n == 0) throw ValidationError("alias table needs at least one weight");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw ValidationError("alias table weights must be nonnegative");
    total += w;
  }
  if (!(total > 0.0)) throw ValidationError("alias table weights sum to zero");

  std::vector<double> scaled(n);
  for (std::size_t i = 0; i < n; ++i) scaled[i] = weights[i] * static_cast<double>(n) / total;
  threshold_.assign(n, 0);
  alias_.resize(n);
  std::vector<std::size_t> small;
  std::vector<std::size_t> large;
  for (std::size_t i = 0; i < n; ++i) (scaled[i] < 1.0 ? small : large).push_back(i);
  auto set_threshold = [&](std::size_t i, double p) {
    threshold_[i] = p >= 1.0 ? UINT64_MAX : static_cast<std::uint64_t>(std::ldexp(p, 64));
  };
  while (!small.empty() && !large.empty()) {
    const std::size_t s = small.back();
    small.pop_back();
    const std::size_t l = large.back();
    set_threshold(s, scaled[s]);
    alias_[s] = static_cast<std::uint32_t>(l);
    scaled[l] = (scaled[l] + scaled[s]) - 1.0;
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  // Leftovers are full columns up to rounding.
  for (auto i : large) {
    threshold_[i] = UINT64_MAX;
    alias_[i] = static_cast<std::uint32_t>(i);
  }
  for (auto i : small) {
    threshold_[i] = UINT64_MAX;
    alias_[i] = static_cast<std::uint32_t>(i);
  }
}

std::uint64_t block_size(std::uint64_t samples, std::size_t streams, std::size_t j) {
  const auto n = static_cast<unsigned __int128>(samples);
  return static_cast<std::uint64_t>(n * (j + 1) / streams - n * j / streams);
}

std::size_t resolve_workers(std::size_t requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("RANGEWALK_WORKERS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace rangewalk
