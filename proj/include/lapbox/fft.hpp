#pragma once

#include <vector>

#include "lapbox/common.hpp"

namespace lapbox {

// Multidimensional complex DFT, row-major with the last axis fastest.
// sign = -1 applies e^{-2pi i <m,j>/N} (the analysis direction used by
// dft_forward), sign = +1 the synthesis direction without any 1/N factor.
// Backed by FFTW; plans are cached per (dims, sign) behind a mutex so the
// call is safe from worker threads operating on distinct buffers.
void fft_inplace(std::vector<cplx>& data, const std::vector<long>& dims, int sign);

}  // namespace lapbox
