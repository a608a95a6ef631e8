#pragma once

#include <complex>
#include <vector>

namespace vortex::detail {

using cvec = std::vector<std::complex<double>>;

enum class FftDirection { forward, backward };

// Unnormalized in-place transforms on row-major data (ny rows of nx).
// forward uses exp(-i k x), backward exp(+i k x).
void fft_2d(cvec& data, int nx, int ny, FftDirection dir);

// Independent 1D transforms of every row (along x).
void fft_rows(cvec& data, int nx, int ny, FftDirection dir);

// Independent 1D transforms of every column (along y).
void fft_columns(cvec& data, int nx, int ny, FftDirection dir);

void fft_1d(cvec& data, FftDirection dir);

}  // namespace vortex::detail
