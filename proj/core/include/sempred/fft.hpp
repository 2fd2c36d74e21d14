// Copyright 2026 The Sempred Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SEMPRED_FFT_HPP_
#define SEMPRED_FFT_HPP_

#include <complex>
#include <span>

#include "sempred/grid.hpp"

namespace sempred {

// Radix-2 iterative 2D DFT, power-of-two sizes only.
//
// Forward transform is unnormalized with kernel exp(-2*pi*i*k*n/N); the
// inverse applies the 1/(H*W) factor, so ifft2(fft2(x)) == x. With this sign
// convention a content shift by +d multiplies bin k by exp(-2*pi*i*d*k/N).
ComplexGrid fft2(const ComplexGrid& g);
ComplexGrid fft2(const RealGrid& g);  // single-channel only
ComplexGrid ifft2(const ComplexGrid& s);

// In-place 1D transform over a strided span; n must be a power of two.
// inverse=true conjugates the kernel but does NOT apply the 1/n factor.
void fft_inplace(std::complex<double>* data, int n, int stride, bool inverse);

// Signed frequency index of bin j on an n-point grid: [0, n/2) stay put,
// [n/2, n) map to negatives.
inline int signed_freq(int j, int n) { return j < n / 2 ? j : j - n; }

}  // namespace sempred

#endif  // SEMPRED_FFT_HPP_
