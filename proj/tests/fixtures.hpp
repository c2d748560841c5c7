#pragma once

#include <algorithm>
#include <vector>

#include "qclock/chain.hpp"

// Half profiles of optimizer output at Γ = 1 (rounded), mirrored into full
// chains. Tests use them as representative apodized chains without paying for
// an optimization run.
namespace fixtures {

inline qclock::ChainSpec mirrored(int n_sites, const std::vector<double>& half) {
  std::vector<double> g(static_cast<std::size_t>(n_sites - 1));
  const int n = n_sites - 1;
  for (int i = 0; i < n; ++i) g[i] = half[static_cast<std::size_t>(std::min(i, n - 1 - i))];
  return qclock::ChainSpec::from_couplings(g);
}

inline qclock::ChainSpec optimized20() {
  return mirrored(20, {0.3503, 0.2216, 0.1977, 0.1898, 0.1864, 0.1847, 0.1837, 0.1833, 0.1831, 0.1829});
}

inline qclock::ChainSpec optimized40() {
  return mirrored(40, {0.3318, 0.1961, 0.1689, 0.1592, 0.1548, 0.1526, 0.1513, 0.1505, 0.1500, 0.1496,
                       0.1494, 0.1493, 0.1491, 0.1490, 0.1490, 0.1489, 0.1489, 0.1488, 0.1488, 0.1488});
}

}  // namespace fixtures
