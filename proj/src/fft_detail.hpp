#pragma once

// Internal FFT shim over FFTW3 with a per-(size, direction) plan cache.
// Plan creation is serialised (FFTW's planner is not thread-safe); execution
// uses the new-array interface and is reentrant.

#include <complex>
#include <span>

namespace fbmbt::detail {

// In-place complex DFT, unnormalised; inverse uses the e^{+2*pi*i} kernel.
void fft_inplace(std::span<std::complex<double>> data, bool inverse);

}  // namespace fbmbt::detail
