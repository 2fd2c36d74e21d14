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

#include "sempred/fft.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "sempred/errors.hpp"

namespace sempred {
namespace {

// Twiddle factors exp(-2*pi*i*j/n) for j in [0, n/2), cached per size.
const std::vector<std::complex<double>>& twiddles(int n) {
  thread_local std::map<int, std::vector<std::complex<double>>> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  std::vector<std::complex<double>> tw(n / 2);
  for (int j = 0; j < n / 2; ++j) {
    const double ang = -2.0 * std::numbers::pi * j / n;
    tw[j] = {std::cos(ang), std::sin(ang)};
  }
  return cache.emplace(n, std::move(tw)).first->second;
}

void require_pow2(int h, int w, const char* op) {
  if (!is_pow2(h) || !is_pow2(w)) {
    throw DimensionError(std::string(op) + ": dimensions must be powers of two, got " +
                         std::to_string(h) + "x" + std::to_string(w));
  }
}

}  // namespace

void fft_inplace(std::complex<double>* data, int n, int stride, bool inverse) {
  if (n == 1) return;
  // Bit-reversal permutation.
  for (int i = 1, j = 0; i < n; ++i) {
    int bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[static_cast<size_t>(i) * stride],
                         data[static_cast<size_t>(j) * stride]);
  }
  const auto& tw = twiddles(n);
  for (int len = 2; len <= n; len <<= 1) {
    const int half = len >> 1;
    const int step = n / len;
    for (int i = 0; i < n; i += len) {
      for (int j = 0; j < half; ++j) {
        std::complex<double> w = tw[static_cast<size_t>(j) * step];
        if (inverse) w = std::conj(w);
        auto& a = data[static_cast<size_t>(i + j) * stride];
        auto& b = data[static_cast<size_t>(i + j + half) * stride];
        const std::complex<double> t = b * w;
        b = a - t;
        a += t;
      }
    }
  }
}

namespace {

ComplexGrid transform2d(ComplexGrid g, bool inverse) {
  require_pow2(g.height, g.width, inverse ? "ifft2" : "fft2");
  for (int y = 0; y < g.height; ++y) {
    fft_inplace(g.data.data() + static_cast<size_t>(y) * g.width, g.width, 1,
                inverse);
  }
  for (int x = 0; x < g.width; ++x) {
    fft_inplace(g.data.data() + x, g.height, g.width, inverse);
  }
  if (inverse) {
    const double scale = 1.0 / (static_cast<double>(g.height) * g.width);
    for (auto& v : g.data) v *= scale;
  }
  return g;
}

}  // namespace

ComplexGrid fft2(const ComplexGrid& g) { return transform2d(g, false); }

ComplexGrid fft2(const RealGrid& g) {
  if (g.channels != 1) {
    throw DimensionError("fft2: real input must be single-channel");
  }
  ComplexGrid c(g.height, g.width);
  for (size_t i = 0; i < g.data.size(); ++i) c.data[i] = {g.data[i], 0.0};
  return transform2d(std::move(c), false);
}

ComplexGrid ifft2(const ComplexGrid& s) { return transform2d(s, true); }

}  // namespace sempred
