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

#include "sempred/grid.hpp"

#include <cmath>
#include <string>

#include "sempred/errors.hpp"

namespace sempred {

RealGrid::RealGrid(int h, int w, int c, double fill)
    : height(h), width(w), channels(c) {
  if (h <= 0 || w <= 0 || c <= 0) {
    throw DimensionError("RealGrid: dimensions must be positive, got " +
                         std::to_string(h) + "x" + std::to_string(w) + "x" +
                         std::to_string(c));
  }
  data.assign(static_cast<size_t>(h) * w * c, fill);
}

RealGrid RealGrid::channel(int c) const {
  if (c < 0 || c >= channels) {
    throw DimensionError("RealGrid::channel: index " + std::to_string(c) +
                         " out of range");
  }
  RealGrid plane(height, width, 1);
  const size_t n = static_cast<size_t>(height) * width;
  std::copy(data.begin() + c * n, data.begin() + (c + 1) * n,
            plane.data.begin());
  return plane;
}

void RealGrid::set_channel(int c, const RealGrid& plane) {
  if (c < 0 || c >= channels) {
    throw DimensionError("RealGrid::set_channel: index out of range");
  }
  if (plane.height != height || plane.width != width || plane.channels != 1) {
    throw DimensionError("RealGrid::set_channel: plane shape mismatch");
  }
  const size_t n = static_cast<size_t>(height) * width;
  std::copy(plane.data.begin(), plane.data.end(), data.begin() + c * n);
}

void RealGrid::check_finite(const char* context) const {
  for (double v : data) {
    if (!std::isfinite(v)) {
      throw std::runtime_error(std::string(context) +
                               ": non-finite value in RealGrid");
    }
  }
}

ComplexGrid::ComplexGrid(int h, int w, std::complex<double> fill)
    : height(h), width(w) {
  if (h <= 0 || w <= 0) {
    throw DimensionError("ComplexGrid: dimensions must be positive");
  }
  data.assign(static_cast<size_t>(h) * w, fill);
}

ComplexGrid complex_hadamard(const ComplexGrid& a, const ComplexGrid& b) {
  if (!a.same_shape(b)) {
    throw DimensionError("complex_hadamard: shape mismatch " +
                         std::to_string(a.height) + "x" +
                         std::to_string(a.width) + " vs " +
                         std::to_string(b.height) + "x" +
                         std::to_string(b.width));
  }
  ComplexGrid out(a.height, a.width);
  for (size_t i = 0; i < a.data.size(); ++i) out.data[i] = a.data[i] * b.data[i];
  return out;
}

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace sempred
