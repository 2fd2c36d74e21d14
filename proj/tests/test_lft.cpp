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

#include <cmath>

#include "doctest.h"
#include "sempred/errors.hpp"
#include "sempred/fft.hpp"
#include "sempred/lft.hpp"
#include "support/oracles.hpp"

using namespace sempred;

namespace {

double max_abs_diff(const RealGrid& a, const RealGrid& b) {
  double m = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i) {
    m = std::max(m, std::abs(a.data[i] - b.data[i]));
  }
  return m;
}

}  // namespace

TEST_SUITE("lft") {
  TEST_CASE("zero frame analyzes to zero spectra") {
    const LftConfig cfg;
    const TileGrid tiles = lft_analyze(RealGrid(32, 32, 1, 0.0), cfg);
    for (const auto& s : tiles.spectra) {
      for (const auto& v : s.data) CHECK(std::abs(v) == 0.0);
    }
  }

  TEST_CASE("constant frame interior tile equals window spectrum") {
    const LftConfig cfg;  // window 16, hop 8
    const TileGrid tiles = lft_analyze(RealGrid(32, 32, 1, 1.0), cfg);
    const ComplexGrid expect = fft2(embedded_window(cfg));
    // Interior lattice site: window fully inside the frame.
    const ComplexGrid& got = tiles.tile(2, 2);
    double err = 0.0;
    for (size_t i = 0; i < got.data.size(); ++i) {
      err = std::max(err, std::abs(got.data[i] - expect.data[i]));
    }
    CHECK(err < 1e-12);
  }

  TEST_CASE("analyze-synthesize round trip reproduces random frames") {
    const LftConfig cfg;
    for (int size : {32, 64, 128}) {
      const RealGrid frame = oracle::random_frame(size, size, 500 + size);
      const TileGrid tiles = lft_analyze(frame, cfg);
      const WindowStack windows = WindowStack::unshifted(cfg, tiles.layout);
      const RealGrid back = lft_synthesize(tiles, windows, cfg);
      CHECK(max_abs_diff(frame, back) < 1e-6);
    }
  }

  TEST_CASE("all-zero tiles synthesize to zero") {
    const LftConfig cfg;
    TileGrid tiles;
    tiles.layout = make_layout(cfg, 32, 32);
    tiles.spectra.assign(tiles.layout.tiles(),
                         ComplexGrid(cfg.fft_size(), cfg.fft_size()));
    const WindowStack windows = WindowStack::unshifted(cfg, tiles.layout);
    const RealGrid out = lft_synthesize(tiles, windows, cfg);
    for (double v : out.data) CHECK(v == 0.0);
  }

  TEST_CASE("single nonzero tile stays inside its window footprint") {
    const LftConfig cfg;
    const RealGrid frame = oracle::random_frame(64, 64, 321);
    TileGrid tiles = lft_analyze(frame, cfg);
    const int keep_u = 3, keep_v = 4;
    for (int u = 0; u < tiles.layout.rows_u; ++u) {
      for (int v = 0; v < tiles.layout.cols_v; ++v) {
        if (u == keep_u && v == keep_v) continue;
        tiles.tile(u, v) = ComplexGrid(cfg.fft_size(), cfg.fft_size());
      }
    }
    const WindowStack windows = WindowStack::unshifted(cfg, tiles.layout);
    const RealGrid out = lft_synthesize(tiles, windows, cfg);
    const int wy = tiles.layout.window_origin_y(keep_u);
    const int wx = tiles.layout.window_origin_x(keep_v);
    for (int y = 0; y < 64; ++y) {
      for (int x = 0; x < 64; ++x) {
        const bool inside = y >= wy && y < wy + cfg.window_size && x >= wx &&
                            x < wx + cfg.window_size;
        if (!inside) CHECK(std::abs(out.at(y, x)) < 1e-12);
      }
    }
  }

  TEST_CASE("linearity of the analysis-synthesis pair") {
    const LftConfig cfg;
    const RealGrid a = oracle::random_frame(32, 32, 1);
    const RealGrid b = oracle::random_frame(32, 32, 2);
    RealGrid mix(32, 32, 1);
    for (size_t i = 0; i < mix.data.size(); ++i) {
      mix.data[i] = 0.6 * a.data[i] - 1.7 * b.data[i];
    }
    auto round_trip = [&](const RealGrid& f) {
      const TileGrid t = lft_analyze(f, cfg);
      return lft_synthesize(t, WindowStack::unshifted(cfg, t.layout), cfg);
    };
    const RealGrid ra = round_trip(a), rb = round_trip(b), rm = round_trip(mix);
    double err = 0.0;
    for (size_t i = 0; i < rm.data.size(); ++i) {
      err = std::max(err,
                     std::abs(rm.data[i] - (0.6 * ra.data[i] - 1.7 * rb.data[i])));
    }
    CHECK(err < 1e-9);
  }

  TEST_CASE("cola profile matches the analytic squared-window sum") {
    const LftConfig cfg;  // Hann 16, hop 8
    const RealGrid profile = cola_profile(cfg, 64, 64);
    // At 50% overlap two Hann windows cover each pixel per axis, so the 1D
    // profile is w^2(r) + w^2(r+hop) for phase r in [0, hop); the interior 2D
    // profile is the product of the two axis profiles. It is periodic, not
    // constant: a Hann taper squared does not satisfy constant overlap-add at
    // half-window hop, and reconstruction instead relies on the ratio
    // normalization.
    const auto w1 = hann_window(cfg.window_size);
    auto axis_profile = [&](int r) {
      const double a = w1[r] * w1[r];
      const double b = w1[r + cfg.hop] * w1[r + cfg.hop];
      return a + b;
    };
    for (int y = 24; y < 40; ++y) {
      for (int x = 24; x < 40; ++x) {
        const double expect =
            axis_profile(y % cfg.hop) * axis_profile(x % cfg.hop);
        CHECK(std::abs(profile.at(y, x) - expect) < 1e-9);
      }
    }
  }

  TEST_CASE("cola profile border values never exceed the interior") {
    const LftConfig cfg;
    const RealGrid profile = cola_profile(cfg, 64, 64);
    double interior_max = 0.0;
    for (int y = 16; y < 48; ++y) {
      for (int x = 16; x < 48; ++x) {
        interior_max = std::max(interior_max, profile.at(y, x));
      }
    }
    for (int x = 0; x < 64; ++x) {
      CHECK(profile.at(0, x) <= interior_max + 1e-12);
      CHECK(profile.at(63, x) <= interior_max + 1e-12);
    }
    // Coverage never vanishes anywhere on the frame.
    for (double v : profile.data) CHECK(v > 1e-3);
  }

  TEST_CASE("channel-wise application is bit-identical to per-plane runs") {
    const LftConfig cfg;
    RealGrid multi(32, 32, 3);
    for (int c = 0; c < 3; ++c) {
      multi.set_channel(c, oracle::random_frame(32, 32, 900 + c));
    }
    for (int c = 0; c < 3; ++c) {
      const RealGrid plane = multi.channel(c);
      const TileGrid t1 = lft_analyze(plane, cfg);
      const TileGrid t2 = lft_analyze(multi.channel(c), cfg);
      const WindowStack ws = WindowStack::unshifted(cfg, t1.layout);
      const RealGrid r1 = lft_synthesize(t1, ws, cfg);
      const RealGrid r2 = lft_synthesize(t2, ws, cfg);
      CHECK(max_abs_diff(r1, r2) == 0.0);
    }
  }

  TEST_CASE("geometry errors") {
    LftConfig bad;
    bad.hop = 5;
    CHECK_THROWS_AS(bad.validate(), DimensionError);
    const LftConfig cfg;
    CHECK_THROWS_AS(lft_analyze(RealGrid(30, 32, 1), cfg), DimensionError);
    CHECK_THROWS_AS(lft_analyze(RealGrid(32, 32, 3), cfg), DimensionError);
  }

  TEST_CASE("lattice mismatch raises") {
    const LftConfig cfg;
    const TileGrid tiles = lft_analyze(RealGrid(32, 32, 1, 0.5), cfg);
    WindowStack other = WindowStack::unshifted(cfg, make_layout(cfg, 64, 64));
    CHECK_THROWS_AS(lft_synthesize(tiles, other, cfg), LatticeMismatchError);
  }

  TEST_CASE("stranded numerator without coverage raises") {
    const LftConfig cfg;
    RealGrid big(32, 32, 1, 1000.0);
    TileGrid tiles = lft_analyze(big, cfg);
    // Tiny but nonzero windows: denominator underflows the coverage floor
    // while the windowed signal is still visible in the numerator.
    WindowStack ws = WindowStack::unshifted(cfg, tiles.layout);
    for (auto& w : ws.windows) {
      for (double& v : w.data) v = 1e-5;
    }
    CHECK_THROWS_AS(lft_synthesize(tiles, ws, cfg), DegenerateCoverageError);
  }
}
