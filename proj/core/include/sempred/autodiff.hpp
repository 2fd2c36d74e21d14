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

#ifndef SEMPRED_AUTODIFF_HPP_
#define SEMPRED_AUTODIFF_HPP_

#include <complex>
#include <deque>
#include <functional>
#include <vector>

#include "sempred/grid.hpp"
#include "sempred/lft.hpp"

namespace sempred {

// Reverse-mode tape over the fixed prediction pipeline. Real tensors are
// CHW; complex tensors hold stacks of square tiles. Complex gradients use
// the convention g = dL/d(re) + i*dL/d(im), under which the adjoint of a
// hadamard product is multiplication by the conjugate factor and the adjoint
// of ifft2 is fft2 scaled by 1/N^2.

struct TensorShape {
  int c = 1, h = 1, w = 1;
  int size() const { return c * h * w; }
  bool operator==(const TensorShape&) const = default;
};

struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};
struct CVar {
  int id = -1;
  bool valid() const { return id >= 0; }
};

class GradientTape {
 public:
  Var leaf(TensorShape shape, std::vector<double> values);
  CVar cleaf(TensorShape shape, std::vector<std::complex<double>> values);

  Var make(TensorShape shape, std::vector<double> values);
  CVar cmake(TensorShape shape, std::vector<std::complex<double>> values);

  const std::vector<double>& val(Var v) const { return reals_[v.id].v; }
  std::vector<double>& grad(Var v) { return reals_[v.id].g; }
  const std::vector<double>& grad(Var v) const { return reals_[v.id].g; }
  TensorShape shape(Var v) const { return reals_[v.id].shape; }

  const std::vector<std::complex<double>>& cval(CVar v) const {
    return cplx_[v.id].v;
  }
  std::vector<std::complex<double>>& cgrad(CVar v) { return cplx_[v.id].g; }
  TensorShape cshape(CVar v) const { return cplx_[v.id].shape; }

  void record(std::function<void(GradientTape&)> step);

  // Seeds d(loss)/d(terminal) and replays the recorded steps in reverse.
  // The scalar overload seeds 1.
  void backward(Var scalar_loss);
  void backward_from(Var terminal, const std::vector<double>& seed);

  // Terminal bookkeeping for callers that finish the graph elsewhere.
  void set_terminal(Var v) { terminal_ = v; }
  Var terminal() const { return terminal_; }

  // Trainable leaves in flat parameter order; backprop() concatenates their
  // gradients in registration order.
  void register_param(Var v) { params_.push_back(v); }
  const std::vector<Var>& params() const { return params_; }
  std::vector<double> collect_param_grads() const;

  size_t op_count() const { return steps_.size(); }

 private:
  struct RealTensor {
    TensorShape shape;
    std::vector<double> v, g;
  };
  struct ComplexTensor {
    TensorShape shape;
    std::vector<std::complex<double>> v, g;
  };
  std::deque<RealTensor> reals_;
  std::deque<ComplexTensor> cplx_;
  std::vector<std::function<void(GradientTape&)>> steps_;
  std::vector<Var> params_;
  Var terminal_;
};

struct ConvSpec {
  int out_c = 0, in_c = 0, kh = 3, kw = 3, stride = 1, pad = 1;
  int weight_count() const { return out_c * in_c * kh * kw; }
};

// ---- real ops ----

// weights layout [oc][ic][ky][kx], bias [oc]; zero padding.
Var conv2d(GradientTape& t, Var x, Var weights, Var bias, const ConvSpec& spec);
Var leaky_relu(GradientTape& t, Var x, double slope);
Var add(GradientTape& t, Var a, Var b);
Var scale(GradientTape& t, Var x, double s);
Var slice_channels(GradientTape& t, Var x, int first, int count);
Var concat_channels(GradientTape& t, Var a, Var b);
Var upsample2(GradientTape& t, Var x);  // nearest neighbor
// Identity inside |x| <= inner, saturates smoothly toward +-limit beyond.
Var soft_clamp(GradientTape& t, Var x, double inner, double limit);
// Mean squared error against a constant target, scalar output.
Var mse_against(GradientTape& t, Var pred, const std::vector<double>& target);
Var add_scalars(GradientTape& t, const std::vector<Var>& xs, double scale);

// ---- complex / pipeline ops ----

// Tapered tile analysis of a frame variable over the lattice: gradient
// flows back into the frame through the window and the FFT adjoint.
CVar analyze_tiles(GradientTape& t, Var frame, const TileLayout& layout,
                   const RealGrid& window);

// Element-wise product of complex tile stacks.
CVar cmul(GradientTape& t, CVar a, CVar b);

// Phase ramps from a shift field [2,U,V] (channel 0 = dx, 1 = dy); output
// stack {U*V, n, n}. d(ramp)/d(dx) = (-2*pi*i*kx/n) * ramp.
CVar encode_ramps(GradientTape& t, Var field, int n);

// Shifted synthesis windows: re(ifft2(window_spectrum * ramp)) per tile.
Var window_shift(GradientTape& t, CVar ramps, const ComplexGrid& window_spectrum);

// Normalized overlap-add of predicted spectra with the given windows over
// the layout's frame area; imaginary parts are dropped (their gradient is
// zero by construction of the forward).
Var synthesize_tiles(GradientTape& t, CVar spectra, Var windows,
                     const TileLayout& layout);

// ---- plain forward kernels (inference, no tape) ----

void conv2d_forward(const double* x, const double* w, const double* b,
                    double* out, int in_h, int in_w, const ConvSpec& spec);

// Finite-difference helper contract used by the gradient tests lives in the
// test support; the tape itself is exact up to rounding.

}  // namespace sempred

#endif  // SEMPRED_AUTODIFF_HPP_
