#pragma once

#include <complex>
#include <span>
#include <vector>

namespace tha::detail {

/// Unnormalized in-place multi-dimensional DFT (row-major dims).
/// sign = -1 forward, +1 backward. Plans are cached and shared across threads.
void dft_inplace(std::span<std::complex<double>> data, std::span<const int> dims, int sign);

inline void dft_cube_inplace(std::span<std::complex<double>> data, int n, int rank, int sign) {
  std::vector<int> dims(static_cast<std::size_t>(rank), n);
  dft_inplace(data, dims, sign);
}

}  // namespace tha::detail
