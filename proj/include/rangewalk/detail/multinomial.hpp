#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include <boost/random/binomial_distribution.hpp>

#include "rangewalk/rng.hpp"

namespace rangewalk::detail {

// Slot counts of m i.i.d. steps, by successive conditional binomials.
inline void multinomial(std::span<const double> probs, std::uint64_t m, CounterRng& rng,
                        std::vector<std::uint64_t>& counts) {
  counts.assign(probs.size(), 0);
  double rest = 1.0;
  for (std::size_t i = 0; i + 1 < probs.size() && m > 0; ++i) {
    const double p = std::clamp(probs[i] / rest, 0.0, 1.0);
    boost::random::binomial_distribution<std::int64_t, double> draw(static_cast<std::int64_t>(m), p);
    counts[i] = static_cast<std::uint64_t>(draw(rng));
    m -= counts[i];
    rest -= probs[i];
  }
  counts.back() += m;
}

}  // namespace rangewalk::detail
