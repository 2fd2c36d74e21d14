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

#include "sempred/autodiff.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "sempred/errors.hpp"
#include "sempred/fft.hpp"

namespace sempred {

namespace {

void fft2_buffer(std::complex<double>* data, int n, bool inverse) {
  for (int y = 0; y < n; ++y) {
    fft_inplace(data + static_cast<size_t>(y) * n, n, 1, inverse);
  }
  for (int x = 0; x < n; ++x) fft_inplace(data + x, n, n, inverse);
  if (inverse) {
    const double s = 1.0 / (static_cast<double>(n) * n);
    for (int i = 0; i < n * n; ++i) data[i] *= s;
  }
}

constexpr double kDenFloor = 1e-8;

}  // namespace

Var GradientTape::leaf(TensorShape shape, std::vector<double> values) {
  return make(shape, std::move(values));
}

CVar GradientTape::cleaf(TensorShape shape,
                         std::vector<std::complex<double>> values) {
  return cmake(shape, std::move(values));
}

Var GradientTape::make(TensorShape shape, std::vector<double> values) {
  if (static_cast<int>(values.size()) != shape.size()) {
    throw DimensionError("GradientTape::make: value count mismatch");
  }
  reals_.push_back({shape, std::move(values),
                    std::vector<double>(shape.size(), 0.0)});
  return Var{static_cast<int>(reals_.size()) - 1};
}

CVar GradientTape::cmake(TensorShape shape,
                         std::vector<std::complex<double>> values) {
  if (static_cast<int>(values.size()) != shape.size()) {
    throw DimensionError("GradientTape::cmake: value count mismatch");
  }
  cplx_.push_back({shape, std::move(values),
                   std::vector<std::complex<double>>(shape.size(), {0.0, 0.0})});
  return CVar{static_cast<int>(cplx_.size()) - 1};
}

void GradientTape::record(std::function<void(GradientTape&)> step) {
  steps_.push_back(std::move(step));
}

void GradientTape::backward(Var scalar_loss) {
  if (shape(scalar_loss).size() != 1) {
    throw DimensionError("GradientTape::backward: loss must be scalar");
  }
  backward_from(scalar_loss, {1.0});
}

void GradientTape::backward_from(Var terminal, const std::vector<double>& seed) {
  if (static_cast<int>(seed.size()) != shape(terminal).size()) {
    throw DimensionError("GradientTape::backward_from: seed size mismatch");
  }
  for (auto& t : reals_) std::fill(t.g.begin(), t.g.end(), 0.0);
  for (auto& t : cplx_) {
    std::fill(t.g.begin(), t.g.end(), std::complex<double>{0.0, 0.0});
  }
  grad(terminal) = seed;
  for (auto it = steps_.rbegin(); it != steps_.rend(); ++it) (*it)(*this);
}

std::vector<double> GradientTape::collect_param_grads() const {
  std::vector<double> out;
  for (Var p : params_) {
    const auto& g = grad(p);
    out.insert(out.end(), g.begin(), g.end());
  }
  return out;
}

void conv2d_forward(const double* x, const double* w, const double* b,
                    double* out, int in_h, int in_w, const ConvSpec& spec) {
  const int out_h = (in_h + 2 * spec.pad - spec.kh) / spec.stride + 1;
  const int out_w = (in_w + 2 * spec.pad - spec.kw) / spec.stride + 1;
  for (int o = 0; o < spec.out_c; ++o) {
    double* plane = out + static_cast<size_t>(o) * out_h * out_w;
    for (int i = 0; i < out_h * out_w; ++i) plane[i] = b[o];
    for (int c = 0; c < spec.in_c; ++c) {
      const double* in_plane = x + static_cast<size_t>(c) * in_h * in_w;
      for (int ky = 0; ky < spec.kh; ++ky) {
        for (int kx = 0; kx < spec.kw; ++kx) {
          const double wv =
              w[((o * spec.in_c + c) * spec.kh + ky) * spec.kw + kx];
          if (wv == 0.0) continue;
          for (int y = 0; y < out_h; ++y) {
            const int sy = y * spec.stride + ky - spec.pad;
            if (sy < 0 || sy >= in_h) continue;
            double* out_row = plane + static_cast<size_t>(y) * out_w;
            const double* in_row = in_plane + static_cast<size_t>(sy) * in_w;
            for (int xx = 0; xx < out_w; ++xx) {
              const int sx = xx * spec.stride + kx - spec.pad;
              if (sx < 0 || sx >= in_w) continue;
              out_row[xx] += wv * in_row[sx];
            }
          }
        }
      }
    }
  }
}

Var conv2d(GradientTape& t, Var x, Var weights, Var bias, const ConvSpec& spec) {
  const TensorShape xs = t.shape(x);
  if (xs.c != spec.in_c) {
    throw DimensionError("conv2d: channel mismatch, input has " +
                         std::to_string(xs.c) + " channels, spec expects " +
                         std::to_string(spec.in_c));
  }
  if (static_cast<int>(t.val(weights).size()) != spec.weight_count() ||
      static_cast<int>(t.val(bias).size()) != spec.out_c) {
    throw DimensionError("conv2d: parameter size mismatch");
  }
  const int out_h = (xs.h + 2 * spec.pad - spec.kh) / spec.stride + 1;
  const int out_w = (xs.w + 2 * spec.pad - spec.kw) / spec.stride + 1;
  std::vector<double> out(static_cast<size_t>(spec.out_c) * out_h * out_w);
  conv2d_forward(t.val(x).data(), t.val(weights).data(), t.val(bias).data(),
                 out.data(), xs.h, xs.w, spec);
  const Var y = t.make({spec.out_c, out_h, out_w}, std::move(out));

  t.record([x, weights, bias, y, spec, xs, out_h, out_w](GradientTape& tp) {
    const auto& gy = tp.grad(y);
    const auto& xv = tp.val(x);
    const auto& wv = tp.val(weights);
    auto& gx = tp.grad(x);
    auto& gw = tp.grad(weights);
    auto& gb = tp.grad(bias);
    for (int o = 0; o < spec.out_c; ++o) {
      const double* gy_plane =
          gy.data() + static_cast<size_t>(o) * out_h * out_w;
      double acc = 0.0;
      for (int i = 0; i < out_h * out_w; ++i) acc += gy_plane[i];
      gb[o] += acc;
      for (int c = 0; c < spec.in_c; ++c) {
        const double* x_plane =
            xv.data() + static_cast<size_t>(c) * xs.h * xs.w;
        double* gx_plane = gx.data() + static_cast<size_t>(c) * xs.h * xs.w;
        for (int ky = 0; ky < spec.kh; ++ky) {
          for (int kx = 0; kx < spec.kw; ++kx) {
            const int widx =
                ((o * spec.in_c + c) * spec.kh + ky) * spec.kw + kx;
            const double wval = wv[widx];
            double wgrad = 0.0;
            for (int y2 = 0; y2 < out_h; ++y2) {
              const int sy = y2 * spec.stride + ky - spec.pad;
              if (sy < 0 || sy >= xs.h) continue;
              const double* gy_row =
                  gy_plane + static_cast<size_t>(y2) * out_w;
              const double* x_row = x_plane + static_cast<size_t>(sy) * xs.w;
              double* gx_row = gx_plane + static_cast<size_t>(sy) * xs.w;
              for (int x2 = 0; x2 < out_w; ++x2) {
                const int sx = x2 * spec.stride + kx - spec.pad;
                if (sx < 0 || sx >= xs.w) continue;
                wgrad += gy_row[x2] * x_row[sx];
                gx_row[sx] += gy_row[x2] * wval;
              }
            }
            gw[widx] += wgrad;
          }
        }
      }
    }
  });
  return y;
}

Var leaky_relu(GradientTape& t, Var x, double slope) {
  std::vector<double> out = t.val(x);
  for (double& v : out) v = v > 0.0 ? v : slope * v;
  const Var y = t.make(t.shape(x), std::move(out));
  t.record([x, y, slope](GradientTape& tp) {
    const auto& gy = tp.grad(y);
    const auto& xv = tp.val(x);
    auto& gx = tp.grad(x);
    for (size_t i = 0; i < gx.size(); ++i) {
      gx[i] += gy[i] * (xv[i] > 0.0 ? 1.0 : slope);
    }
  });
  return y;
}

Var add(GradientTape& t, Var a, Var b) {
  if (!(t.shape(a) == t.shape(b))) throw DimensionError("add: shape mismatch");
  std::vector<double> out = t.val(a);
  const auto& bv = t.val(b);
  for (size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  const Var y = t.make(t.shape(a), std::move(out));
  t.record([a, b, y](GradientTape& tp) {
    const auto& gy = tp.grad(y);
    auto& ga = tp.grad(a);
    auto& gb = tp.grad(b);
    for (size_t i = 0; i < gy.size(); ++i) {
      ga[i] += gy[i];
      gb[i] += gy[i];
    }
  });
  return y;
}

Var scale(GradientTape& t, Var x, double s) {
  std::vector<double> out = t.val(x);
  for (double& v : out) v *= s;
  const Var y = t.make(t.shape(x), std::move(out));
  t.record([x, y, s](GradientTape& tp) {
    const auto& gy = tp.grad(y);
    auto& gx = tp.grad(x);
    for (size_t i = 0; i < gy.size(); ++i) gx[i] += s * gy[i];
  });
  return y;
}

Var slice_channels(GradientTape& t, Var x, int first, int count) {
  const TensorShape xs = t.shape(x);
  if (first < 0 || first + count > xs.c) {
    throw DimensionError("slice_channels: range out of bounds");
  }
  const size_t plane = static_cast<size_t>(xs.h) * xs.w;
  std::vector<double> out(t.val(x).begin() + first * plane,
                          t.val(x).begin() + (first + count) * plane);
  const Var y = t.make({count, xs.h, xs.w}, std::move(out));
  t.record([x, y, first, plane](GradientTape& tp) {
    const auto& gy = tp.grad(y);
    auto& gx = tp.grad(x);
    for (size_t i = 0; i < gy.size(); ++i) gx[first * plane + i] += gy[i];
  });
  return y;
}

Var concat_channels(GradientTape& t, Var a, Var b) {
  const TensorShape as = t.shape(a), bs = t.shape(b);
  if (as.h != bs.h || as.w != bs.w) {
    throw DimensionError("concat_channels: spatial shape mismatch");
  }
  std::vector<double> out = t.val(a);
  out.insert(out.end(), t.val(b).begin(), t.val(b).end());
  const Var y = t.make({as.c + bs.c, as.h, as.w}, std::move(out));
  t.record([a, b, y](GradientTape& tp) {
    const auto& gy = tp.grad(y);
    auto& ga = tp.grad(a);
    auto& gb = tp.grad(b);
    for (size_t i = 0; i < ga.size(); ++i) ga[i] += gy[i];
    for (size_t i = 0; i < gb.size(); ++i) gb[i] += gy[ga.size() + i];
  });
  return y;
}

Var upsample2(GradientTape& t, Var x) {
  const TensorShape xs = t.shape(x);
  std::vector<double> out(static_cast<size_t>(xs.c) * xs.h * 2 * xs.w * 2);
  const auto& xv = t.val(x);
  for (int c = 0; c < xs.c; ++c) {
    for (int y = 0; y < xs.h * 2; ++y) {
      for (int x2 = 0; x2 < xs.w * 2; ++x2) {
        out[(static_cast<size_t>(c) * xs.h * 2 + y) * xs.w * 2 + x2] =
            xv[(static_cast<size_t>(c) * xs.h + y / 2) * xs.w + x2 / 2];
      }
    }
  }
  const Var y = t.make({xs.c, xs.h * 2, xs.w * 2}, std::move(out));
  t.record([x, y, xs](GradientTape& tp) {
    const auto& gy = tp.grad(y);
    auto& gx = tp.grad(x);
    for (int c = 0; c < xs.c; ++c) {
      for (int y2 = 0; y2 < xs.h * 2; ++y2) {
        for (int x2 = 0; x2 < xs.w * 2; ++x2) {
          gx[(static_cast<size_t>(c) * xs.h + y2 / 2) * xs.w + x2 / 2] +=
              gy[(static_cast<size_t>(c) * xs.h * 2 + y2) * xs.w * 2 + x2];
        }
      }
    }
  });
  return y;
}

Var soft_clamp(GradientTape& t, Var x, double inner, double limit) {
  if (!(inner > 0.0 && limit > inner)) {
    throw DimensionError("soft_clamp: need 0 < inner < limit");
  }
  const double span = limit - inner;
  std::vector<double> out = t.val(x);
  for (double& v : out) {
    const double a = std::abs(v);
    if (a > inner) {
      v = std::copysign(inner + span * std::tanh((a - inner) / span), v);
    }
  }
  const Var y = t.make(t.shape(x), std::move(out));
  t.record([x, y, inner, span](GradientTape& tp) {
    const auto& gy = tp.grad(y);
    const auto& xv = tp.val(x);
    auto& gx = tp.grad(x);
    for (size_t i = 0; i < gx.size(); ++i) {
      const double a = std::abs(xv[i]);
      double d = 1.0;
      if (a > inner) {
        const double th = std::tanh((a - inner) / span);
        d = 1.0 - th * th;
      }
      gx[i] += gy[i] * d;
    }
  });
  return y;
}

Var mse_against(GradientTape& t, Var pred, const std::vector<double>& target) {
  const auto& pv = t.val(pred);
  if (pv.size() != target.size()) {
    throw DimensionError("mse_against: target size mismatch");
  }
  double acc = 0.0;
  for (size_t i = 0; i < pv.size(); ++i) {
    const double d = pv[i] - target[i];
    acc += d * d;
  }
  const double inv_n = 1.0 / static_cast<double>(pv.size());
  const Var y = t.make({1, 1, 1}, {acc * inv_n});
  t.record([pred, y, target, inv_n](GradientTape& tp) {
    const double gy = tp.grad(y)[0];
    const auto& pv2 = tp.val(pred);
    auto& gp = tp.grad(pred);
    for (size_t i = 0; i < pv2.size(); ++i) {
      gp[i] += gy * 2.0 * inv_n * (pv2[i] - target[i]);
    }
  });
  return y;
}

Var add_scalars(GradientTape& t, const std::vector<Var>& xs, double s) {
  double acc = 0.0;
  for (Var v : xs) {
    if (t.shape(v).size() != 1) throw DimensionError("add_scalars: non-scalar");
    acc += t.val(v)[0];
  }
  const Var y = t.make({1, 1, 1}, {acc * s});
  t.record([xs, y, s](GradientTape& tp) {
    const double gy = tp.grad(y)[0];
    for (Var v : xs) tp.grad(v)[0] += gy * s;
  });
  return y;
}

CVar analyze_tiles(GradientTape& t, Var frame, const TileLayout& layout,
                   const RealGrid& window) {
  const TensorShape fs = t.shape(frame);
  if (fs.c != 1 || fs.h != layout.frame_h || fs.w != layout.frame_w) {
    throw DimensionError("analyze_tiles: frame shape does not match layout");
  }
  const int n = layout.fft;
  if (window.height != n || window.width != n) {
    throw DimensionError("analyze_tiles: window size mismatch");
  }
  const int tiles = layout.tiles();
  std::vector<std::complex<double>> out(static_cast<size_t>(tiles) * n * n);
  const auto& fv = t.val(frame);
  std::vector<std::complex<double>> patch(static_cast<size_t>(n) * n);
  for (int u = 0; u < layout.rows_u; ++u) {
    for (int v = 0; v < layout.cols_v; ++v) {
      const int oy = layout.tile_origin_y(u);
      const int ox = layout.tile_origin_x(v);
      for (int y = 0; y < n; ++y) {
        const int gy = oy + y;
        for (int x = 0; x < n; ++x) {
          const int gx = ox + x;
          double val = 0.0;
          if (gy >= 0 && gy < layout.frame_h && gx >= 0 &&
              gx < layout.frame_w) {
            val = fv[static_cast<size_t>(gy) * layout.frame_w + gx] *
                  window.at(y, x);
          }
          patch[static_cast<size_t>(y) * n + x] = {val, 0.0};
        }
      }
      fft2_buffer(patch.data(), n, false);
      std::copy(
          patch.begin(), patch.end(),
          out.begin() + static_cast<size_t>(layout.tile_index(u, v)) * n * n);
    }
  }
  const CVar spectra = t.cmake({tiles, n, n}, std::move(out));

  t.record([frame, spectra, layout, window, n](GradientTape& tp) {
    auto& gf = tp.grad(frame);
    const auto& gs = tp.cgrad(spectra);
    std::vector<std::complex<double>> buf(static_cast<size_t>(n) * n);
    // Adjoint of the unnormalized forward DFT applied to a real input is
    // re(conj(F) g), i.e. n^2 * re(ifft2(g)), then the window mask.
    const double scale = static_cast<double>(n) * n;
    for (int u = 0; u < layout.rows_u; ++u) {
      for (int v = 0; v < layout.cols_v; ++v) {
        const size_t base =
            static_cast<size_t>(layout.tile_index(u, v)) * n * n;
        std::copy(gs.begin() + base, gs.begin() + base + n * n, buf.begin());
        fft2_buffer(buf.data(), n, true);
        const int oy = layout.tile_origin_y(u);
        const int ox = layout.tile_origin_x(v);
        for (int y = 0; y < n; ++y) {
          const int gy = oy + y;
          if (gy < 0 || gy >= layout.frame_h) continue;
          for (int x = 0; x < n; ++x) {
            const int gx = ox + x;
            if (gx < 0 || gx >= layout.frame_w) continue;
            gf[static_cast<size_t>(gy) * layout.frame_w + gx] +=
                window.at(y, x) * scale *
                buf[static_cast<size_t>(y) * n + x].real();
          }
        }
      }
    }
  });
  return spectra;
}

CVar cmul(GradientTape& t, CVar a, CVar b) {
  if (!(t.cshape(a) == t.cshape(b))) {
    throw DimensionError("cmul: shape mismatch");
  }
  std::vector<std::complex<double>> out = t.cval(a);
  const auto& bv = t.cval(b);
  for (size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  const CVar y = t.cmake(t.cshape(a), std::move(out));
  t.record([a, b, y](GradientTape& tp) {
    const auto& gy = tp.cgrad(y);
    const auto& av = tp.cval(a);
    const auto& bv2 = tp.cval(b);
    auto& ga = tp.cgrad(a);
    auto& gb = tp.cgrad(b);
    for (size_t i = 0; i < gy.size(); ++i) {
      ga[i] += gy[i] * std::conj(bv2[i]);
      gb[i] += gy[i] * std::conj(av[i]);
    }
  });
  return y;
}

CVar encode_ramps(GradientTape& t, Var field, int n) {
  const TensorShape fs = t.shape(field);
  if (fs.c != 2) {
    throw DimensionError("encode_ramps: field must have 2 channels");
  }
  const int tiles = fs.h * fs.w;
  const auto& fv = t.val(field);
  std::vector<std::complex<double>> out(static_cast<size_t>(tiles) * n * n);
  for (int tile = 0; tile < tiles; ++tile) {
    const double dx = fv[tile];
    const double dy = fv[tiles + tile];
    for (int y = 0; y < n; ++y) {
      const double ky = signed_freq(y, n);
      for (int x = 0; x < n; ++x) {
        const double kx = signed_freq(x, n);
        const double ang = -2.0 * std::numbers::pi * (dx * kx + dy * ky) / n;
        out[(static_cast<size_t>(tile) * n + y) * n + x] = {std::cos(ang),
                                                            std::sin(ang)};
      }
    }
  }
  const CVar ramps = t.cmake({tiles, n, n}, std::move(out));

  t.record([field, ramps, tiles, n](GradientTape& tp) {
    const auto& gr = tp.cgrad(ramps);
    const auto& rv = tp.cval(ramps);
    auto& gf = tp.grad(field);
    const double two_pi = 2.0 * std::numbers::pi;
    for (int tile = 0; tile < tiles; ++tile) {
      double gdx = 0.0, gdy = 0.0;
      for (int y = 0; y < n; ++y) {
        const double ky = signed_freq(y, n);
        for (int x = 0; x < n; ++x) {
          const double kx = signed_freq(x, n);
          const size_t i = (static_cast<size_t>(tile) * n + y) * n + x;
          // d(ramp)/d(dx) = (-2*pi*i*kx/n) * ramp, so the chain contribution
          // re(conj(g) * dramp) reduces to (2*pi*kx/n) * im(conj(g) * ramp).
          const double im = (std::conj(gr[i]) * rv[i]).imag();
          gdx += two_pi * kx / n * im;
          gdy += two_pi * ky / n * im;
        }
      }
      gf[tile] += gdx;
      gf[tiles + tile] += gdy;
    }
  });
  return ramps;
}

Var window_shift(GradientTape& t, CVar ramps,
                 const ComplexGrid& window_spectrum) {
  const TensorShape rs = t.cshape(ramps);
  const int n = rs.h;
  if (rs.w != n || window_spectrum.height != n || window_spectrum.width != n) {
    throw DimensionError("window_shift: shape mismatch");
  }
  const int tiles = rs.c;
  const auto& rv = t.cval(ramps);
  std::vector<double> out(static_cast<size_t>(tiles) * n * n);
  std::vector<std::complex<double>> buf(static_cast<size_t>(n) * n);
  for (int tile = 0; tile < tiles; ++tile) {
    const size_t base = static_cast<size_t>(tile) * n * n;
    for (int i = 0; i < n * n; ++i) {
      buf[i] = window_spectrum.data[i] * rv[base + i];
    }
    fft2_buffer(buf.data(), n, true);
    for (int i = 0; i < n * n; ++i) out[base + i] = buf[i].real();
  }
  const Var windows = t.make({tiles, n, n}, std::move(out));

  t.record([ramps, windows, window_spectrum, tiles, n](GradientTape& tp) {
    const auto& gw = tp.grad(windows);
    auto& gr = tp.cgrad(ramps);
    std::vector<std::complex<double>> buf2(static_cast<size_t>(n) * n);
    const double scale = 1.0 / (static_cast<double>(n) * n);
    for (int tile = 0; tile < tiles; ++tile) {
      const size_t base = static_cast<size_t>(tile) * n * n;
      for (int i = 0; i < n * n; ++i) buf2[i] = {gw[base + i], 0.0};
      // Adjoint of re(ifft2(.)) is fft2 scaled by 1/n^2.
      fft2_buffer(buf2.data(), n, false);
      for (int i = 0; i < n * n; ++i) {
        gr[base + i] += std::conj(window_spectrum.data[i]) * buf2[i] * scale;
      }
    }
  });
  return windows;
}

Var synthesize_tiles(GradientTape& t, CVar spectra, Var windows,
                     const TileLayout& layout) {
  const TensorShape ss = t.cshape(spectra);
  const int n = layout.fft;
  if (!(t.shape(windows) == ss) || ss.h != n || ss.w != n ||
      ss.c != layout.tiles()) {
    throw DimensionError("synthesize_tiles: shape mismatch");
  }
  const int tiles = layout.tiles();
  const int fh = layout.frame_h, fw = layout.frame_w;

  std::vector<double> patches(static_cast<size_t>(tiles) * n * n);
  {
    const auto& sv = t.cval(spectra);
    std::vector<std::complex<double>> buf(static_cast<size_t>(n) * n);
    for (int tile = 0; tile < tiles; ++tile) {
      const size_t base = static_cast<size_t>(tile) * n * n;
      std::copy(sv.begin() + base, sv.begin() + base + n * n, buf.begin());
      fft2_buffer(buf.data(), n, true);
      for (int i = 0; i < n * n; ++i) patches[base + i] = buf[i].real();
    }
  }
  std::vector<double> num(static_cast<size_t>(fh) * fw, 0.0);
  std::vector<double> den(static_cast<size_t>(fh) * fw, 0.0);
  const auto& wv = t.val(windows);
  for (int u = 0; u < layout.rows_u; ++u) {
    for (int v = 0; v < layout.cols_v; ++v) {
      const size_t base = static_cast<size_t>(layout.tile_index(u, v)) * n * n;
      const int oy = layout.tile_origin_y(u);
      const int ox = layout.tile_origin_x(v);
      for (int y = 0; y < n; ++y) {
        const int gy = oy + y;
        if (gy < 0 || gy >= fh) continue;
        for (int x = 0; x < n; ++x) {
          const int gx = ox + x;
          if (gx < 0 || gx >= fw) continue;
          const double w = wv[base + static_cast<size_t>(y) * n + x];
          num[static_cast<size_t>(gy) * fw + gx] +=
              patches[base + static_cast<size_t>(y) * n + x] * w;
          den[static_cast<size_t>(gy) * fw + gx] += w * w;
        }
      }
    }
  }
  std::vector<double> out(static_cast<size_t>(fh) * fw, 0.0);
  for (size_t i = 0; i < out.size(); ++i) {
    out[i] = den[i] < kDenFloor ? 0.0 : num[i] / den[i];
  }
  const Var frame = t.make({1, fh, fw}, std::move(out));

  t.record([spectra, windows, frame, layout, n, fh, fw,
            patches = std::move(patches), num = std::move(num),
            den = std::move(den)](GradientTape& tp) {
    const auto& gy_out = tp.grad(frame);
    const auto& wv2 = tp.val(windows);
    auto& gw = tp.grad(windows);
    auto& gs = tp.cgrad(spectra);

    std::vector<double> gnum(static_cast<size_t>(fh) * fw, 0.0);
    std::vector<double> gden(static_cast<size_t>(fh) * fw, 0.0);
    for (size_t i = 0; i < gnum.size(); ++i) {
      if (den[i] < kDenFloor) continue;
      gnum[i] = gy_out[i] / den[i];
      gden[i] = -gy_out[i] * num[i] / (den[i] * den[i]);
    }

    std::vector<std::complex<double>> buf(static_cast<size_t>(n) * n);
    const double scale = 1.0 / (static_cast<double>(n) * n);
    for (int u = 0; u < layout.rows_u; ++u) {
      for (int v = 0; v < layout.cols_v; ++v) {
        const size_t base =
            static_cast<size_t>(layout.tile_index(u, v)) * n * n;
        const int oy = layout.tile_origin_y(u);
        const int ox = layout.tile_origin_x(v);
        for (int y = 0; y < n; ++y) {
          const int gy2 = oy + y;
          for (int x = 0; x < n; ++x) {
            const size_t ti = base + static_cast<size_t>(y) * n + x;
            const int gx2 = ox + x;
            double gpatch = 0.0;
            if (gy2 >= 0 && gy2 < fh && gx2 >= 0 && gx2 < fw) {
              const size_t pi = static_cast<size_t>(gy2) * fw + gx2;
              const double w = wv2[ti];
              gpatch = gnum[pi] * w;
              gw[ti] += gnum[pi] * patches[ti] + gden[pi] * 2.0 * w;
            }
            buf[static_cast<size_t>(y) * n + x] = {gpatch, 0.0};
          }
        }
        fft2_buffer(buf.data(), n, false);
        for (int i = 0; i < n * n; ++i) gs[base + i] += buf[i] * scale;
      }
    }
  });
  return frame;
}

}  // namespace sempred
