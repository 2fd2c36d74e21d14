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

#include "sempred/metrics.hpp"

#include <cmath>
#include <vector>

#include "sempred/errors.hpp"

namespace sempred {

namespace {

void require_same_shape(const RealGrid& a, const RealGrid& b, const char* op) {
  if (a.height != b.height || a.width != b.width || a.channels != b.channels) {
    throw DimensionError(std::string(op) + ": shape mismatch");
  }
}

constexpr int kWindow = 11;
constexpr int kHalf = kWindow / 2;
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

const std::vector<double>& gauss_kernel() {
  static const std::vector<double> kernel = [] {
    std::vector<double> k(kWindow);
    double sum = 0.0;
    for (int i = 0; i < kWindow; ++i) {
      const double d = i - kHalf;
      k[i] = std::exp(-d * d / (2.0 * 1.5 * 1.5));
      sum += k[i];
    }
    for (double& v : k) v /= sum;
    return k;
  }();
  return kernel;
}

// Separable valid-mode Gaussian filtering of one channel plane.
std::vector<double> filter_valid(const std::vector<double>& plane, int h, int w) {
  const auto& k = gauss_kernel();
  const int vw = w - 2 * kHalf;
  const int vh = h - 2 * kHalf;
  std::vector<double> rows(static_cast<size_t>(h) * vw);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < vw; ++x) {
      double acc = 0.0;
      for (int i = 0; i < kWindow; ++i) {
        acc += k[i] * plane[static_cast<size_t>(y) * w + x + i];
      }
      rows[static_cast<size_t>(y) * vw + x] = acc;
    }
  }
  std::vector<double> out(static_cast<size_t>(vh) * vw);
  for (int y = 0; y < vh; ++y) {
    for (int x = 0; x < vw; ++x) {
      double acc = 0.0;
      for (int i = 0; i < kWindow; ++i) {
        acc += k[i] * rows[static_cast<size_t>(y + i) * vw + x];
      }
      out[static_cast<size_t>(y) * vw + x] = acc;
    }
  }
  return out;
}

}  // namespace

double metric_l1(const RealGrid& pred, const RealGrid& truth) {
  require_same_shape(pred, truth, "metric_l1");
  double acc = 0.0;
  for (size_t i = 0; i < pred.data.size(); ++i) {
    acc += std::abs(pred.data[i] - truth.data[i]);
  }
  return acc / static_cast<double>(pred.data.size());
}

double metric_mse(const RealGrid& pred, const RealGrid& truth) {
  require_same_shape(pred, truth, "metric_mse");
  double acc = 0.0;
  for (size_t i = 0; i < pred.data.size(); ++i) {
    const double d = pred.data[i] - truth.data[i];
    acc += d * d;
  }
  return acc / static_cast<double>(pred.data.size());
}

double ssim(const RealGrid& a, const RealGrid& b) {
  require_same_shape(a, b, "ssim");
  if (a.height < kWindow || a.width < kWindow) {
    throw DimensionError("ssim: image smaller than the 11x11 window");
  }
  const size_t plane = static_cast<size_t>(a.height) * a.width;
  double total = 0.0;
  for (int c = 0; c < a.channels; ++c) {
    std::vector<double> pa(a.data.begin() + c * plane,
                           a.data.begin() + (c + 1) * plane);
    std::vector<double> pb(b.data.begin() + c * plane,
                           b.data.begin() + (c + 1) * plane);
    std::vector<double> paa(plane), pbb(plane), pab(plane);
    for (size_t i = 0; i < plane; ++i) {
      paa[i] = pa[i] * pa[i];
      pbb[i] = pb[i] * pb[i];
      pab[i] = pa[i] * pb[i];
    }
    const auto mu_a = filter_valid(pa, a.height, a.width);
    const auto mu_b = filter_valid(pb, a.height, a.width);
    const auto m_aa = filter_valid(paa, a.height, a.width);
    const auto m_bb = filter_valid(pbb, a.height, a.width);
    const auto m_ab = filter_valid(pab, a.height, a.width);
    double acc = 0.0;
    for (size_t i = 0; i < mu_a.size(); ++i) {
      const double va = m_aa[i] - mu_a[i] * mu_a[i];
      const double vb = m_bb[i] - mu_b[i] * mu_b[i];
      const double cov = m_ab[i] - mu_a[i] * mu_b[i];
      const double num = (2.0 * mu_a[i] * mu_b[i] + kC1) * (2.0 * cov + kC2);
      const double den =
          (mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + kC1) * (va + vb + kC2);
      acc += num / den;
    }
    total += acc / static_cast<double>(mu_a.size());
  }
  return total / a.channels;
}

double metric_dssim(const RealGrid& pred, const RealGrid& truth) {
  return (1.0 - ssim(pred, truth)) / 2.0;
}

}  // namespace sempred
