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

#include "sempred/phase_motion.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "sempred/errors.hpp"
#include "sempred/fft.hpp"

namespace sempred {

namespace {
constexpr double kDegenerateMagnitude = 1e-12;
constexpr double kImagResidueLimit = 1e-6;

void require_same_lattice(const TileLayout& a, const TileLayout& b,
                          const char* op) {
  if (!a.same_lattice(b)) {
    throw LatticeMismatchError(std::string(op) + ": lattice mismatch");
  }
}

// Quadratic peak interpolation on three samples around the maximum. Fitting
// the parabola to log-values is exact for Gaussian-shaped peaks, which is
// what the low-pass taper produces; it falls back to the plain parabola when
// a neighbor is non-positive.
double subpixel_offset(double vm, double v0, double vp) {
  if (vm > 0.0 && v0 > 0.0 && vp > 0.0) {
    const double lm = std::log(vm), l0 = std::log(v0), lp = std::log(vp);
    const double den = lm - 2.0 * l0 + lp;
    if (std::abs(den) > 1e-12) {
      return std::clamp(0.5 * (lm - lp) / den, -0.5, 0.5);
    }
  }
  const double den = vm - 2.0 * v0 + vp;
  if (std::abs(den) < 1e-300) return 0.0;
  return std::clamp(0.5 * (vm - vp) / den, -0.5, 0.5);
}

// Low-pass spectral taper that concentrates the correlation surface into a
// smooth peak the three-point fit can localize.
const ComplexGrid& correlation_taper(int n) {
  thread_local std::vector<std::pair<int, ComplexGrid>> cache;
  for (const auto& [size, grid] : cache) {
    if (size == n) return grid;
  }
  ComplexGrid taper(n, n);
  const double sigma = n / 8.0;
  const double inv = 1.0 / (2.0 * sigma * sigma);
  for (int y = 0; y < n; ++y) {
    const double ky = signed_freq(y, n);
    for (int x = 0; x < n; ++x) {
      const double kx = signed_freq(x, n);
      taper.at(y, x) = {std::exp(-(kx * kx + ky * ky) * inv), 0.0};
    }
  }
  cache.emplace_back(n, std::move(taper));
  return cache.back().second;
}

struct SurfaceStats {
  double peak = 0.0;
  double mass = 0.0;
  int peak_y = 0;
  int peak_x = 0;
};

SurfaceStats scan_surface(const ComplexGrid& surface) {
  SurfaceStats s;
  s.peak = surface.data.empty() ? 0.0 : surface.data[0].real();
  for (int y = 0; y < surface.height; ++y) {
    for (int x = 0; x < surface.width; ++x) {
      const double v = surface.at(y, x).real();
      s.mass += std::abs(v);
      if (v > s.peak) {
        s.peak = v;
        s.peak_y = y;
        s.peak_x = x;
      }
    }
  }
  return s;
}

}  // namespace

PhaseField PhaseField::identity(const TileLayout& layout) {
  PhaseField pd;
  pd.layout = layout;
  pd.tiles.assign(layout.tiles(), ComplexGrid(layout.fft, layout.fft, {1.0, 0.0}));
  return pd;
}

PhaseField phase_difference(const TileGrid& prev, const TileGrid& curr) {
  require_same_lattice(prev.layout, curr.layout, "phase_difference");
  PhaseField pd;
  pd.layout = curr.layout;
  pd.tiles.reserve(curr.spectra.size());
  pd.weights.reserve(curr.spectra.size());
  for (size_t t = 0; t < curr.spectra.size(); ++t) {
    const ComplexGrid& a = prev.spectra[t];
    const ComplexGrid& b = curr.spectra[t];
    ComplexGrid phase(b.height, b.width);
    ComplexGrid magnitude(b.height, b.width);
    for (size_t i = 0; i < b.data.size(); ++i) {
      const std::complex<double> c = b.data[i] * std::conj(a.data[i]);
      const double mag = std::abs(c);
      magnitude.data[i] = {mag, 0.0};
      phase.data[i] = mag < kDegenerateMagnitude
                          ? std::complex<double>{1.0, 0.0}
                          : c / mag;
    }
    pd.tiles.push_back(std::move(phase));
    pd.weights.push_back(std::move(magnitude));
  }
  return pd;
}

TileGrid phase_add(const TileGrid& tiles, const PhaseField& pd) {
  require_same_lattice(tiles.layout, pd.layout, "phase_add");
  TileGrid out;
  out.layout = tiles.layout;
  out.spectra.reserve(tiles.spectra.size());
  for (size_t t = 0; t < tiles.spectra.size(); ++t) {
    out.spectra.push_back(complex_hadamard(tiles.spectra[t], pd.tiles[t]));
  }
  return out;
}

WindowStack window_phase_add(const LftConfig& cfg, const PhaseField& pd) {
  cfg.validate();
  if (pd.layout.fft != cfg.fft_size()) {
    throw LatticeMismatchError("window_phase_add: phase field tile size " +
                               std::to_string(pd.layout.fft) +
                               " does not match config fft size " +
                               std::to_string(cfg.fft_size()));
  }
  const ComplexGrid window_spectrum = fft2(embedded_window(cfg));
  WindowStack ws;
  ws.layout = pd.layout;
  ws.windows.reserve(pd.tiles.size());
  for (const ComplexGrid& phase : pd.tiles) {
    const ComplexGrid shifted = ifft2(complex_hadamard(window_spectrum, phase));
    RealGrid w(shifted.height, shifted.width, 1);
    for (size_t i = 0; i < shifted.data.size(); ++i) {
      if (std::abs(shifted.data[i].imag()) > kImagResidueLimit) {
        throw std::runtime_error(
            "window_phase_add: imaginary residue above 1e-6; phase field is "
            "not a real-signal shift");
      }
      w.data[i] = shifted.data[i].real();
    }
    ws.windows.push_back(std::move(w));
  }
  return ws;
}

ComplexGrid encode_shift(double dx, double dy, int size) {
  if (!is_pow2(size)) {
    throw DimensionError("encode_shift: size must be a power of two");
  }
  if (std::abs(dx) > size / 2.0 || std::abs(dy) > size / 2.0) {
    throw std::out_of_range("encode_shift: |shift| exceeds size/2");
  }
  std::vector<std::complex<double>> col(size), row(size);
  for (int j = 0; j < size; ++j) {
    const double k = signed_freq(j, size);
    const double ay = -2.0 * std::numbers::pi * dy * k / size;
    const double ax = -2.0 * std::numbers::pi * dx * k / size;
    col[j] = {std::cos(ay), std::sin(ay)};
    row[j] = {std::cos(ax), std::sin(ax)};
  }
  ComplexGrid ramp(size, size);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      ramp.at(y, x) = col[y] * row[x];
    }
  }
  return ramp;
}

ShiftEstimate decode_shift(const ComplexGrid& pd_tile,
                           const ComplexGrid* magnitude_weights) {
  const int n = pd_tile.height;
  if (pd_tile.width != n || !is_pow2(n)) {
    throw DimensionError("decode_shift: tile must be square power-of-two");
  }
  if (magnitude_weights && !magnitude_weights->same_shape(pd_tile)) {
    throw DimensionError("decode_shift: weight shape mismatch");
  }

  const ComplexGrid& taper = correlation_taper(n);
  // Saturating magnitude gate: bins carrying real correlation evidence count
  // with weight ~1 (keeping the sharp normalized-phase peak), bins near the
  // noise floor drop out instead of contributing their pinned 1+0i phase.
  double gate = 0.0;
  if (magnitude_weights) {
    double mean = 0.0;
    for (const auto& m : magnitude_weights->data) mean += std::abs(m);
    mean /= static_cast<double>(magnitude_weights->data.size());
    if (mean < 1e-12) return {0.0, 0.0, 0.0};
    gate = 0.05 * mean;
  }
  ComplexGrid weighted(n, n);
  ComplexGrid reference(n, n);
  for (size_t i = 0; i < weighted.data.size(); ++i) {
    double w = taper.data[i].real();
    if (magnitude_weights) {
      const double m = std::abs(magnitude_weights->data[i]);
      w *= m / (m + gate);
    }
    weighted.data[i] = pd_tile.data[i] * w;
    reference.data[i] = {w, 0.0};
  }

  const ComplexGrid surface = ifft2(weighted);
  const SurfaceStats surf = scan_surface(surface);
  const SurfaceStats ref = scan_surface(ifft2(reference));
  if (surf.mass < 1e-12 || surf.peak <= 0.0 || ref.mass < 1e-12 ||
      ref.peak <= 0.0) {
    return {0.0, 0.0, 0.0};
  }

  const int py = surf.peak_y, px = surf.peak_x;
  auto sample = [&](int y, int x) {
    return surface.at((y % n + n) % n, (x % n + n) % n).real();
  };
  const double off_y =
      subpixel_offset(sample(py - 1, px), surf.peak, sample(py + 1, px));
  const double off_x =
      subpixel_offset(sample(py, px - 1), surf.peak, sample(py, px + 1));

  ShiftEstimate est;
  est.dy = signed_freq(py, n) + off_y;
  est.dx = signed_freq(px, n) + off_x;
  const double ratio = (surf.peak / surf.mass) / (ref.peak / ref.mass);
  est.confidence = std::clamp(ratio, 0.0, 1.0);
  return est;
}

VectorField decode_field(const PhaseField& pd, double max_shift) {
  VectorField field(pd.layout.rows_u, pd.layout.cols_v);
  for (int t = 0; t < field.tiles(); ++t) {
    const ComplexGrid* w = pd.has_weights() ? &pd.weights[t] : nullptr;
    const ShiftEstimate est = decode_shift(pd.tiles[t], w);
    field.dx[t] = std::clamp(est.dx, -max_shift, max_shift);
    field.dy[t] = std::clamp(est.dy, -max_shift, max_shift);
    field.confidence[t] = est.confidence;
  }
  return field;
}

PhaseField encode_field(const VectorField& field, const TileLayout& layout) {
  if (field.rows_u != layout.rows_u || field.cols_v != layout.cols_v) {
    throw LatticeMismatchError("encode_field: lattice mismatch");
  }
  PhaseField pd;
  pd.layout = layout;
  pd.tiles.reserve(field.tiles());
  for (int t = 0; t < field.tiles(); ++t) {
    pd.tiles.push_back(encode_shift(field.dx[t], field.dy[t], layout.fft));
  }
  return pd;
}

}  // namespace sempred
