#include "spectral.hpp"

#include <cmath>

namespace tha::detail {

BlockSymbols block_symbols(const GridSpec& spec) {
  const int m = spec.m();
  const int n = spec.n();
  BlockSymbols s;
  s.m = m;
  s.size = spec.size();
  s.a1.resize(s.size);
  s.a2.resize(s.size);
  s.a3.resize(s.size);
  s.q1.resize(s.size * static_cast<std::size_t>(m));
  s.q2.resize(s.size * static_cast<std::size_t>(m));
  std::vector<int> i1(static_cast<std::size_t>(m)), i2(static_cast<std::size_t>(m));
  for (std::size_t i = 0; i < s.size; ++i) {
    spec.block_indices(spec.block1_of(i), i1);
    spec.block_indices(spec.block2_of(i), i2);
    double n1 = 0, n2 = 0, n3 = 0;
    for (int k = 0; k < m; ++k) {
      const double x1 = spec.frequency(i1[static_cast<std::size_t>(k)]);
      const double x2 = spec.frequency(i2[static_cast<std::size_t>(k)]);
      n1 += x1 * x1;
      n2 += x2 * x2;
      // On a Nyquist line the conjugate partner of x1 + x2 is not -(x1 + x2); dropping the cross
      // term keeps |xi1 + xi2| the same at both, so real fields stay real under the multiplier.
      const bool nyquist = i1[static_cast<std::size_t>(k)] == n / 2 || i2[static_cast<std::size_t>(k)] == n / 2;
      n3 += nyquist ? x1 * x1 + x2 * x2 : (x1 + x2) * (x1 + x2);
      const std::size_t at = i * static_cast<std::size_t>(m) + static_cast<std::size_t>(k);
      s.q1[at] = i1[static_cast<std::size_t>(k)] == n / 2 ? 0.0 : x1;
      s.q2[at] = i2[static_cast<std::size_t>(k)] == n / 2 ? 0.0 : x2;
    }
    s.a1[i] = std::sqrt(n1);
    s.a2[i] = std::sqrt(n2);
    s.a3[i] = std::sqrt(n3);
  }
  return s;
}

std::vector<std::size_t> sum_block_index(const GridSpec& spec) {
  const int m = spec.m();
  std::vector<std::size_t> out(spec.size());
  std::vector<int> i1(static_cast<std::size_t>(m)), i2(static_cast<std::size_t>(m)),
      sum(static_cast<std::size_t>(m));
  for (std::size_t i = 0; i < spec.size(); ++i) {
    spec.block_indices(spec.block1_of(i), i1);
    spec.block_indices(spec.block2_of(i), i2);
    for (int k = 0; k < m; ++k)
      sum[static_cast<std::size_t>(k)] = i1[static_cast<std::size_t>(k)] + i2[static_cast<std::size_t>(k)];
    out[i] = spec.block_flat(sum);
  }
  return out;
}

}  // namespace tha::detail
