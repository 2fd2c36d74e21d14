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

#ifndef SEMPRED_GRID_HPP_
#define SEMPRED_GRID_HPP_

#include <complex>
#include <vector>

namespace sempred {

// Dense real raster, row-major within each channel, channels stored as
// consecutive planes. Image intensities live in [0,1]; intermediate signals
// are unconstrained.
struct RealGrid {
  int height = 0;
  int width = 0;
  int channels = 1;
  std::vector<double> data;

  RealGrid() = default;
  RealGrid(int h, int w, int c = 1, double fill = 0.0);

  double& at(int y, int x, int c = 0) {
    return data[(static_cast<size_t>(c) * height + y) * width + x];
  }
  double at(int y, int x, int c = 0) const {
    return data[(static_cast<size_t>(c) * height + y) * width + x];
  }

  size_t size() const { return data.size(); }

  // Plane view of one channel as an independent single-channel grid.
  RealGrid channel(int c) const;
  void set_channel(int c, const RealGrid& plane);

  // Throws if any stored value is NaN or infinite.
  void check_finite(const char* context) const;
};

// Dense complex raster, row-major, single plane.
struct ComplexGrid {
  int height = 0;
  int width = 0;
  std::vector<std::complex<double>> data;

  ComplexGrid() = default;
  ComplexGrid(int h, int w, std::complex<double> fill = {0.0, 0.0});

  std::complex<double>& at(int y, int x) {
    return data[static_cast<size_t>(y) * width + x];
  }
  std::complex<double> at(int y, int x) const {
    return data[static_cast<size_t>(y) * width + x];
  }

  size_t size() const { return data.size(); }
  bool same_shape(const ComplexGrid& other) const {
    return height == other.height && width == other.width;
  }
};

// Element-wise complex product. Throws DimensionError on shape mismatch.
ComplexGrid complex_hadamard(const ComplexGrid& a, const ComplexGrid& b);

bool is_pow2(int n);

}  // namespace sempred

#endif  // SEMPRED_GRID_HPP_
