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

#ifndef SEMPRED_PHASE_MOTION_HPP_
#define SEMPRED_PHASE_MOTION_HPP_

#include <vector>

#include "sempred/grid.hpp"
#include "sempred/lft.hpp"

namespace sempred {

// Unit-modulus per-bin phase fields over a tile lattice. Bins where the
// underlying correlation magnitude vanished are pinned to 1+0i ("no evidence
// means no motion"). The correlation magnitudes themselves are kept as
// optional per-tile weights so downstream shift decoding can discount empty
// or noisy bins.
struct PhaseField {
  TileLayout layout;
  std::vector<ComplexGrid> tiles;
  std::vector<ComplexGrid> weights;  // real-valued magnitudes, may be empty

  bool has_weights() const { return !weights.empty(); }
  static PhaseField identity(const TileLayout& layout);
};

// Per-tile 2D shift estimates with confidences in [0,1].
struct VectorField {
  int rows_u = 0, cols_v = 0;
  std::vector<double> dx, dy, confidence;

  VectorField() = default;
  VectorField(int rows, int cols)
      : rows_u(rows),
        cols_v(cols),
        dx(static_cast<size_t>(rows) * cols, 0.0),
        dy(static_cast<size_t>(rows) * cols, 0.0),
        confidence(static_cast<size_t>(rows) * cols, 0.0) {}

  int index(int u, int v) const { return u * cols_v + v; }
  int tiles() const { return rows_u * cols_v; }
};

struct ShiftEstimate {
  double dx = 0.0;
  double dy = 0.0;
  double confidence = 0.0;
};

// Local phase difference between two consecutive tile grids:
//   PD = (curr * conj(prev)) / |curr * conj(prev)|,
// with bins of magnitude < 1e-12 set to 1+0i. The pre-normalization
// magnitudes are stored as weights.
PhaseField phase_difference(const TileGrid& prev, const TileGrid& curr);

// Local phase addition: spectra multiplied element-wise by the phase field.
TileGrid phase_add(const TileGrid& tiles, const PhaseField& pd);

// Applies the same phase field to the spectrum of the analysis window,
// producing the per-tile shifted synthesis windows.
WindowStack window_phase_add(const LftConfig& cfg, const PhaseField& pd);

// Pure phase ramp exp(-2*pi*i*(dx*kx + dy*ky)/size) over signed frequencies
// kx, ky in [-size/2, size/2). Positive dx moves content toward increasing
// column index, positive dy toward increasing row index.
// Throws std::out_of_range when |dx| or |dy| exceeds size/2.
ComplexGrid encode_shift(double dx, double dy, int size);

// Estimates the shift encoded by a unit-modulus phase tile from its phase
// correlation surface: a low-pass taper concentrates the peak, the argmax is
// taken over cyclic positions, and the peak is refined per axis with a
// parabola fitted to the (log) values of the peak and its two neighbors.
// Confidence is the surface peak-to-mass ratio calibrated so that a pure
// integer ramp scores 1; a flat surface returns (0, 0) with confidence 0.
// Optional magnitude weights multiply the taper bin-wise.
ShiftEstimate decode_shift(const ComplexGrid& pd_tile,
                           const ComplexGrid* magnitude_weights = nullptr);

// Per-tile decode over a whole field; shifts are clamped to max_shift.
VectorField decode_field(const PhaseField& pd, double max_shift);

// Re-encodes a vector field into pure phase ramps on the given lattice.
PhaseField encode_field(const VectorField& field, const TileLayout& layout);

}  // namespace sempred

#endif  // SEMPRED_PHASE_MOTION_HPP_
