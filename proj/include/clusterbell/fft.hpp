#pragma once

#include <complex>
#include <vector>

namespace clusterbell::fft {

/// In-place discrete Fourier transform, any length. Radix-2 Cooley-Tukey
/// for powers of two, Bluestein's chirp-z convolution otherwise. The
/// inverse applies the 1/N normalization.
void transform(std::vector<std::complex<double>>& data, bool inverse);

inline void forward(std::vector<std::complex<double>>& data) { transform(data, false); }
inline void inverse(std::vector<std::complex<double>>& data) { transform(data, true); }

}  // namespace clusterbell::fft
