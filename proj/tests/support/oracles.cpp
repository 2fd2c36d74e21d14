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

#include "support/oracles.hpp"

#include <cmath>
#include <numbers>

namespace sempred::oracle {

ComplexGrid direct_dft2(const ComplexGrid& g) {
  const int h = g.height, w = g.width;
  ComplexGrid out(h, w);
  for (int ky = 0; ky < h; ++ky) {
    for (int kx = 0; kx < w; ++kx) {
      std::complex<double> acc{0.0, 0.0};
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          const double ang = -2.0 * std::numbers::pi *
                             (static_cast<double>(ky) * y / h +
                              static_cast<double>(kx) * x / w);
          acc += g.at(y, x) * std::complex<double>{std::cos(ang), std::sin(ang)};
        }
      }
      out.at(ky, kx) = acc;
    }
  }
  return out;
}

namespace {

// Periodic sinc (Dirichlet) interpolation kernel for an n-point grid, the
// spatial form of an all-pass fractional delay over signed frequencies with
// the unpaired Nyquist bin included.
std::complex<double> dirichlet(double x, int n) {
  // sum_{k=-n/2}^{n/2-1} exp(2*pi*i*k*x/n) / n
  std::complex<double> acc{0.0, 0.0};
  for (int k = -n / 2; k < n / 2; ++k) {
    const double ang = 2.0 * std::numbers::pi * k * x / n;
    acc += std::complex<double>{std::cos(ang), std::sin(ang)};
  }
  return acc / static_cast<double>(n);
}

}  // namespace

RealGrid sinc_shift(const RealGrid& g, double dy, double dx) {
  const int h = g.height, w = g.width;
  // Separable kernels: out = Ky * g * Kx^T with K[t][s] = dirichlet(t-d-s).
  std::vector<std::complex<double>> ky(static_cast<size_t>(h) * h);
  std::vector<std::complex<double>> kx(static_cast<size_t>(w) * w);
  for (int t = 0; t < h; ++t) {
    for (int s = 0; s < h; ++s) ky[t * h + s] = dirichlet(t - dy - s, h);
  }
  for (int t = 0; t < w; ++t) {
    for (int s = 0; s < w; ++s) kx[t * w + s] = dirichlet(t - dx - s, w);
  }
  std::vector<std::complex<double>> rows(static_cast<size_t>(h) * w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      std::complex<double> acc{0.0, 0.0};
      for (int s = 0; s < h; ++s) acc += ky[y * h + s] * g.at(s, x);
      rows[static_cast<size_t>(y) * w + x] = acc;
    }
  }
  RealGrid out(h, w, 1);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      std::complex<double> acc{0.0, 0.0};
      for (int s = 0; s < w; ++s) {
        acc += rows[static_cast<size_t>(y) * w + s] * kx[x * w + s];
      }
      out.at(y, x) = acc.real();
    }
  }
  return out;
}

RealGrid cyclic_shift(const RealGrid& g, int dy, int dx) {
  RealGrid out(g.height, g.width, 1);
  for (int y = 0; y < g.height; ++y) {
    for (int x = 0; x < g.width; ++x) {
      const int sy = ((y - dy) % g.height + g.height) % g.height;
      const int sx = ((x - dx) % g.width + g.width) % g.width;
      out.at(y, x) = g.at(sy, sx);
    }
  }
  return out;
}

double ssim_reference(const RealGrid& a, const RealGrid& b) {
  const int half = 5;
  double window[11][11];
  double wsum = 0.0;
  for (int y = -half; y <= half; ++y) {
    for (int x = -half; x <= half; ++x) {
      const double v = std::exp(-(y * y + x * x) / (2.0 * 1.5 * 1.5));
      window[y + half][x + half] = v;
      wsum += v;
    }
  }
  for (auto& row : window) {
    for (double& v : row) v /= wsum;
  }

  const double c1 = 0.01 * 0.01;
  const double c2 = 0.03 * 0.03;
  double total = 0.0;
  int count = 0;
  for (int c = 0; c < a.channels; ++c) {
    for (int y = half; y < a.height - half; ++y) {
      for (int x = half; x < a.width - half; ++x) {
        double mu_a = 0.0, mu_b = 0.0;
        for (int oy = -half; oy <= half; ++oy) {
          for (int ox = -half; ox <= half; ++ox) {
            const double wv = window[oy + half][ox + half];
            mu_a += wv * a.at(y + oy, x + ox, c);
            mu_b += wv * b.at(y + oy, x + ox, c);
          }
        }
        double var_a = 0.0, var_b = 0.0, cov = 0.0;
        for (int oy = -half; oy <= half; ++oy) {
          for (int ox = -half; ox <= half; ++ox) {
            const double wv = window[oy + half][ox + half];
            const double da = a.at(y + oy, x + ox, c) - mu_a;
            const double db = b.at(y + oy, x + ox, c) - mu_b;
            var_a += wv * da * da;
            var_b += wv * db * db;
            cov += wv * da * db;
          }
        }
        const double num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2);
        const double den =
            (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2);
        total += num / den;
        ++count;
      }
    }
  }
  return count == 0 ? 1.0 : total / count;
}

RealGrid smooth_random_frame(int h, int w, uint64_t seed, double sigma) {
  Rng rng(seed);
  // White noise blurred by a cyclic separable Gaussian: the spectrum is
  // dense (every bin carries signal) and decays smoothly, and the cyclic
  // boundary keeps the field stationary under cyclic shifts.
  RealGrid noise(h, w, 1);
  for (double& v : noise.data) v = rng.uniform();
  const int radius = static_cast<int>(std::ceil(4.0 * sigma));
  std::vector<double> kernel(2 * radius + 1);
  double ksum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    kernel[i + radius] = std::exp(-i * i / (2.0 * sigma * sigma));
    ksum += kernel[i + radius];
  }
  for (double& k : kernel) k /= ksum;

  RealGrid rows(h, w, 1), out(h, w, 1);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        acc += kernel[i + radius] * noise.at(y, ((x + i) % w + w) % w);
      }
      rows.at(y, x) = acc;
    }
  }
  double lo = 1e300, hi = -1e300;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        acc += kernel[i + radius] * rows.at(((y + i) % h + h) % h, x);
      }
      out.at(y, x) = acc;
      lo = std::min(lo, acc);
      hi = std::max(hi, acc);
    }
  }
  const double span = hi - lo < 1e-12 ? 1.0 : hi - lo;
  for (double& v : out.data) v = (v - lo) / span;
  return out;
}

RealGrid periodic_smooth_frame(int h, int w, int period, uint64_t seed,
                               double sigma) {
  const RealGrid cell = smooth_random_frame(period, period, seed, sigma);
  RealGrid out(h, w, 1);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      out.at(y, x) = cell.at(y % period, x % period);
    }
  }
  return out;
}

RealGrid random_frame(int h, int w, uint64_t seed) {
  Rng rng(seed);
  RealGrid out(h, w, 1);
  for (double& v : out.data) v = rng.uniform();
  return out;
}

bool grad_close(double analytic, double numeric, double rtol, double atol) {
  return std::abs(analytic - numeric) <= atol + rtol * std::abs(numeric);
}

}  // namespace sempred::oracle
