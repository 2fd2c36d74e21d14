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

#include "sempred/lft.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "sempred/errors.hpp"
#include "sempred/fft.hpp"

namespace sempred {

namespace {
constexpr double kDenominatorFloor = 1e-8;
constexpr double kStrandedNumerator = 1e-6;
constexpr double kImagResidueLimit = 1e-6;
}  // namespace

void LftConfig::validate() const {
  if (!is_pow2(window_size) || window_size < 4) {
    throw DimensionError("LftConfig: window_size must be a power of two >= 4");
  }
  if (hop * 2 != window_size) {
    throw DimensionError("LftConfig: hop must be window_size/2, got hop=" +
                         std::to_string(hop) + " window=" +
                         std::to_string(window_size));
  }
}

TileLayout make_layout(const LftConfig& cfg, int frame_h, int frame_w) {
  cfg.validate();
  if (frame_h <= 0 || frame_w <= 0 || frame_h % cfg.hop != 0 ||
      frame_w % cfg.hop != 0) {
    throw DimensionError("make_layout: frame " + std::to_string(frame_h) + "x" +
                         std::to_string(frame_w) +
                         " is not a positive multiple of hop " +
                         std::to_string(cfg.hop));
  }
  TileLayout l;
  l.frame_h = frame_h;
  l.frame_w = frame_w;
  l.window = cfg.window_size;
  l.hop = cfg.hop;
  l.fft = cfg.fft_size();
  l.guard = cfg.guard();
  l.rows_u = frame_h / cfg.hop + 1;
  l.cols_v = frame_w / cfg.hop + 1;
  return l;
}

std::vector<double> hann_window(int n_samples) {
  std::vector<double> w(n_samples);
  for (int n = 0; n < n_samples; ++n) {
    const double s = std::sin(std::numbers::pi * n / n_samples);
    w[n] = s * s;
  }
  return w;
}

RealGrid embedded_window(const LftConfig& cfg) {
  cfg.validate();
  const int fft = cfg.fft_size();
  const int g = cfg.guard();
  const auto w1 = hann_window(cfg.window_size);
  RealGrid w(fft, fft, 1, 0.0);
  for (int y = 0; y < cfg.window_size; ++y) {
    for (int x = 0; x < cfg.window_size; ++x) {
      w.at(g + y, g + x) = w1[y] * w1[x];
    }
  }
  return w;
}

WindowStack WindowStack::unshifted(const LftConfig& cfg,
                                   const TileLayout& layout) {
  WindowStack ws;
  ws.layout = layout;
  ws.windows.assign(layout.tiles(), embedded_window(cfg));
  return ws;
}

namespace {

TileGrid analyze_with_window(const RealGrid& frame, const LftConfig& cfg,
                             const RealGrid* window) {
  if (frame.channels != 1) {
    throw DimensionError("lft_analyze: frame must be single-channel");
  }
  const TileLayout layout = make_layout(cfg, frame.height, frame.width);
  const int fft = layout.fft;

  TileGrid tiles;
  tiles.layout = layout;
  tiles.spectra.reserve(layout.tiles());
  ComplexGrid patch(fft, fft);
  for (int u = 0; u < layout.rows_u; ++u) {
    for (int v = 0; v < layout.cols_v; ++v) {
      const int oy = layout.tile_origin_y(u);
      const int ox = layout.tile_origin_x(v);
      for (int y = 0; y < fft; ++y) {
        const int gy = oy + y;
        for (int x = 0; x < fft; ++x) {
          const int gx = ox + x;
          double val = 0.0;
          if (gy >= 0 && gy < frame.height && gx >= 0 && gx < frame.width) {
            val = window ? frame.at(gy, gx) * window->at(y, x)
                         : frame.at(gy, gx);
          }
          patch.at(y, x) = {val, 0.0};
        }
      }
      tiles.spectra.push_back(fft2(patch));
    }
  }
  return tiles;
}

}  // namespace

TileGrid lft_analyze(const RealGrid& frame, const LftConfig& cfg) {
  const RealGrid w = embedded_window(cfg);
  return analyze_with_window(frame, cfg, &w);
}

TileGrid lft_analyze_motion(const RealGrid& frame, const LftConfig& cfg) {
  return analyze_with_window(frame, cfg, nullptr);
}

RealGrid lft_synthesize(const TileGrid& tiles, const WindowStack& windows,
                        const LftConfig& cfg) {
  cfg.validate();
  const TileLayout& layout = tiles.layout;
  if (!layout.same_lattice(windows.layout)) {
    throw LatticeMismatchError("lft_synthesize: tile and window lattices differ");
  }
  const int fft = layout.fft;
  RealGrid numerator(layout.frame_h, layout.frame_w, 1, 0.0);
  RealGrid denominator(layout.frame_h, layout.frame_w, 1, 0.0);

  for (int u = 0; u < layout.rows_u; ++u) {
    for (int v = 0; v < layout.cols_v; ++v) {
      const int t = layout.tile_index(u, v);
      const ComplexGrid patch = ifft2(tiles.spectra[t]);
      const RealGrid& w = windows.windows[t];
      const int oy = layout.tile_origin_y(u);
      const int ox = layout.tile_origin_x(v);
      for (int y = 0; y < fft; ++y) {
        const int gy = oy + y;
        if (gy < 0 || gy >= layout.frame_h) continue;
        for (int x = 0; x < fft; ++x) {
          const int gx = ox + x;
          if (gx < 0 || gx >= layout.frame_w) continue;
          const std::complex<double> z = patch.at(y, x);
          if (std::abs(z.imag()) > kImagResidueLimit) {
            throw std::runtime_error(
                "lft_synthesize: imaginary residue " +
                std::to_string(std::abs(z.imag())) +
                " exceeds 1e-6; spectra are not consistent with a real signal");
          }
          const double win = w.at(y, x);
          numerator.at(gy, gx) += z.real() * win;
          denominator.at(gy, gx) += win * win;
        }
      }
    }
  }

  RealGrid out(layout.frame_h, layout.frame_w, 1, 0.0);
  for (int y = 0; y < layout.frame_h; ++y) {
    for (int x = 0; x < layout.frame_w; ++x) {
      const double den = denominator.at(y, x);
      const double num = numerator.at(y, x);
      if (den < kDenominatorFloor) {
        if (std::abs(num) > kStrandedNumerator) {
          throw DegenerateCoverageError(
              "lft_synthesize: pixel (" + std::to_string(y) + "," +
              std::to_string(x) + ") has numerator " + std::to_string(num) +
              " but no window coverage");
        }
        out.at(y, x) = 0.0;
      } else {
        out.at(y, x) = num / den;
      }
    }
  }
  return out;
}

RealGrid cola_profile(const LftConfig& cfg, int frame_h, int frame_w) {
  const TileLayout layout = make_layout(cfg, frame_h, frame_w);
  const RealGrid w = embedded_window(cfg);
  RealGrid profile(frame_h, frame_w, 1, 0.0);
  for (int u = 0; u < layout.rows_u; ++u) {
    for (int v = 0; v < layout.cols_v; ++v) {
      const int oy = layout.tile_origin_y(u);
      const int ox = layout.tile_origin_x(v);
      for (int y = 0; y < layout.fft; ++y) {
        const int gy = oy + y;
        if (gy < 0 || gy >= frame_h) continue;
        for (int x = 0; x < layout.fft; ++x) {
          const int gx = ox + x;
          if (gx < 0 || gx >= frame_w) continue;
          profile.at(gy, gx) += w.at(y, x) * w.at(y, x);
        }
      }
    }
  }
  return profile;
}

}  // namespace sempred
