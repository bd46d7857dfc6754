#pragma once

#include <complex>
#include <vector>

#include "tha/grid.hpp"

namespace tha::detail {

/// Per-frequency block quantities on the lattice of a grid (FFT ordering).
///
/// a_j are the block magnitudes |xi1|, |xi2|, |xi1+xi2|. q_j are the first-derivative
/// symbols per component; the Nyquist component is zeroed so odd symbols stay Hermitian, and
/// a3 drops the cross term on Nyquist lines so even symbols do too.
struct BlockSymbols {
  int m = 1;
  std::size_t size = 0;
  std::vector<double> a1, a2, a3;
  std::vector<double> q1, q2;  // size * m

  double a(int block, std::size_t i) const {
    return block == 1 ? a1[i] : block == 2 ? a2[i] : a3[i];
  }
  double q(int block, std::size_t i, int k) const {
    const std::size_t at = i * static_cast<std::size_t>(m) + static_cast<std::size_t>(k);
    if (block == 1) return q1[at];
    if (block == 2) return q2[at];
    return q1[at] + q2[at];
  }
};

BlockSymbols block_symbols(const GridSpec& spec);

/// Frequency index of xi1 + xi2 (componentwise, mod n) for each flat index, as a block flat index.
std::vector<std::size_t> sum_block_index(const GridSpec& spec);

}  // namespace tha::detail
