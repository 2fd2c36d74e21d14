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

#ifndef SEMPRED_LFT_HPP_
#define SEMPRED_LFT_HPP_

#include <vector>

#include "sempred/grid.hpp"

namespace sempred {

enum class WindowKind { kHann };
enum class PadMode { kZero };

// Local Fourier transform geometry.
//
// A frame is covered by a lattice of Hann windows of size window_size with
// hop window_size/2 (the half-overlap needed for full coverage). Each
// windowed patch sits centered inside an FFT tile of twice the window size;
// the zero guard ring around the window lets tiles be shifted cyclically by
// up to window_size/2 pixels without wrapping content around the tile edge.
struct LftConfig {
  int window_size = 16;  // taper width, power of two
  int hop = 8;           // lattice stride, must equal window_size/2
  WindowKind window_kind = WindowKind::kHann;
  PadMode pad_mode = PadMode::kZero;

  int fft_size() const { return 2 * window_size; }
  int guard() const { return (fft_size() - window_size) / 2; }
  // Largest cyclic shift that stays clear of the tile boundary.
  double max_shift() const { return window_size / 2.0; }

  void validate() const;  // throws DimensionError on bad geometry
};

// Tile lattice for a given frame size: window (u,v) covers image rows
// [u*hop - hop, u*hop - hop + window_size) and similarly in x, so window
// centers fall on multiples of hop from 0 to frame extent inclusive.
struct TileLayout {
  int frame_h = 0, frame_w = 0;
  int rows_u = 0, cols_v = 0;
  int window = 0, hop = 0, fft = 0, guard = 0;

  int window_origin_y(int u) const { return u * hop - hop; }
  int window_origin_x(int v) const { return v * hop - hop; }
  int tile_origin_y(int u) const { return window_origin_y(u) - guard; }
  int tile_origin_x(int v) const { return window_origin_x(v) - guard; }
  int tiles() const { return rows_u * cols_v; }
  int tile_index(int u, int v) const { return u * cols_v + v; }

  bool same_lattice(const TileLayout& o) const {
    return frame_h == o.frame_h && frame_w == o.frame_w && rows_u == o.rows_u &&
           cols_v == o.cols_v && fft == o.fft && hop == o.hop;
  }
};

TileLayout make_layout(const LftConfig& cfg, int frame_h, int frame_w);

// 1D periodic Hann taper, w[n] = sin^2(pi*n/n_samples).
std::vector<double> hann_window(int n_samples);

// The separable window embedded in an fft_size x fft_size tile with the
// guard ring of zeros around it.
RealGrid embedded_window(const LftConfig& cfg);

// Local spectra over the lattice.
struct TileGrid {
  TileLayout layout;
  std::vector<ComplexGrid> spectra;  // layout.tiles() entries, fft x fft

  const ComplexGrid& tile(int u, int v) const {
    return spectra[layout.tile_index(u, v)];
  }
  ComplexGrid& tile(int u, int v) { return spectra[layout.tile_index(u, v)]; }
};

// Per-tile real synthesis windows (possibly shifted) on the same lattice.
struct WindowStack {
  TileLayout layout;
  std::vector<RealGrid> windows;  // fft x fft each

  static WindowStack unshifted(const LftConfig& cfg, const TileLayout& layout);
};

// Analysis: per lattice site, taper the local patch and take its FFT.
// Frame must be single-channel with dimensions divisible by the hop.
TileGrid lft_analyze(const RealGrid& frame, const LftConfig& cfg);

// Motion analysis: the same lattice, but the full (untapered) patch under
// each tile is transformed. A taper re-centers smooth content toward the
// window center and shrinks the displacement its phases encode, so shift
// estimation works on flat patches while synthesis keeps the taper.
TileGrid lft_analyze_motion(const RealGrid& frame, const LftConfig& cfg);

// Synthesis: inverse FFT per tile, then the normalized overlap-add
//   out[p] = sum_t re(ifft(X_t))[p] * w_t[p] / sum_t w_t[p]^2
// over the frame area. Pixels whose denominator falls below 1e-8 produce 0;
// if such a pixel still carries numerator mass above 1e-6 the coverage is
// considered degenerate and an error is thrown. Imaginary parts of the
// per-tile inverse transforms must stay below 1e-6 and are then dropped.
RealGrid lft_synthesize(const TileGrid& tiles, const WindowStack& windows,
                        const LftConfig& cfg);

// The overlap-add denominator field sum_t w^2 for unshifted windows.
RealGrid cola_profile(const LftConfig& cfg, int frame_h, int frame_w);

}  // namespace sempred

#endif  // SEMPRED_LFT_HPP_
