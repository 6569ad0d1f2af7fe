#pragma once
// Periodic grid bookkeeping and thin FFTW wrappers. Fields sample the R-periodic
// cell on an M x M grid, M = sigma*R; values[q][p] = f(p/sigma, q/sigma).
// Transforms are unnormalized: BACKWARD of a scattered coefficient array is
// exactly the trig-polynomial sample set.

#include <complex>
#include <cstdint>

#include <Eigen/Dense>

namespace dcpl {

using CArray = Eigen::Array<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RArray = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct GridSpec {
  std::uint64_t R = 0;
  int sigma = 4;
  std::int64_t M = 0;  // sigma * R

  double spacing() const { return 1.0 / sigma; }
  double cell_area() const { return spacing() * spacing(); }
};

GridSpec make_grid(std::uint64_t R, int sigma = 4);

struct SampledField {
  GridSpec grid;
  CArray values;
};

// 2D transforms, unnormalized; sign = -1 forward (analysis), +1 backward (synthesis)
void fft2_inplace(CArray& a, int sign);
CArray fft2(const CArray& a, int sign);

// 1D transform of a contiguous line, unnormalized
void fft_line_inplace(std::complex<double>* data, std::int64_t n, int sign);

}  // namespace dcpl
