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

#ifndef SEMPRED_TRANSPORT_HPP_
#define SEMPRED_TRANSPORT_HPP_

#include <cstdint>
#include <vector>

#include "sempred/autodiff.hpp"
#include "sempred/phase_motion.hpp"

namespace sempred {

enum class TransportMode { kIdentity, kConstantVelocity, kLearned };
enum class Activation { kLeakyRelu, kIdentity };

struct TransportConfig {
  TransportMode mode = TransportMode::kIdentity;
  int smoothing_radius = 1;  // tiles; 0 disables spatial smoothing
  int history_len = 1;       // phase fields consumed per prediction

  void validate() const;
};

// A plain conv stack description plus its flat parameter vector. Values are
// laid out layer by layer, weights [oc][ic][ky][kx] then biases [oc].
struct ConvLayerDesc {
  int kh = 3, kw = 3;
  int in_c = 0, out_c = 0;
  int stride = 1;
  Activation activation = Activation::kLeakyRelu;
};

struct ConvFilterParams {
  std::vector<ConvLayerDesc> layers;
  std::vector<double> values;

  int param_count() const;
  void validate() const;

  // 3 conv layers over the tile lattice, (dx, dy, confidence) per history
  // step in, 2 channels out; the stack output is added to the latest decoded
  // field, so all-zero values realize the identity transport.
  static ConvFilterParams transport_default(int history_len);

  // All-zero values: pass the latest field through untouched.
  void identity_init();
  // He-style random init, biases zero.
  void randomize(uint64_t seed, double gain = 1.0);
};

struct BaselineTransport {
  PhaseField predicted;
  VectorField field;
};

// Analytic transport: decode the newest phase field, smooth it over the
// lattice with a confidence-weighted Gaussian, optionally extrapolate with
// the previous step (constant velocity), clamp, and re-encode. History is
// ordered oldest first.
BaselineTransport transport_baseline(const std::vector<PhaseField>& history,
                                     const TransportConfig& cfg);

struct LearnedTransport {
  PhaseField predicted;
  VectorField field;
  GradientTape tape;  // features -> conv stack -> residual -> clamp
  Var field_var;      // tape terminal, shape [2, rows_u, cols_v]
};

// Learned transport: stack the decoded fields (2 channels per step) and
// confidences (1 per step) over the lattice, run the conv stack, add the
// latest field, and clamp smoothly to the geometric shift bound. The
// returned tape ends at the clamped field; motion decoding itself is not
// differentiated through.
LearnedTransport transport_learned(const std::vector<PhaseField>& history,
                                   const ConvFilterParams& params);

// Seeds d(loss)/d(terminal) with the given grid and returns the flat
// parameter gradient in registration order.
std::vector<double> backprop(GradientTape& tape, const RealGrid& loss_grad);

// params - lr * grad, plain SGD step.
ConvFilterParams sgd_step(const ConvFilterParams& params,
                          const std::vector<double>& grad, double lr);

// ---- shared graph-building helpers (used by the pipeline trainers) ----

struct ConvNetBinding {
  std::vector<Var> slots;  // weight, bias per layer in order
};

// Registers the parameter tensors of the stack as trainable tape leaves.
ConvNetBinding bind_conv_params(GradientTape& tape,
                                const ConvFilterParams& params);

// Runs the conv stack on the tape (activations included).
Var run_conv_stack(GradientTape& tape, const ConvFilterParams& arch,
                   const ConvNetBinding& binding, Var input);

// Full learned-transport head: conv stack + residual latest field + clamp.
Var transport_head(GradientTape& tape, const ConvFilterParams& arch,
                   const ConvNetBinding& binding, Var features,
                   double max_shift);

// Decoded fields and confidences as the [3h, U, V] feature tensor.
std::vector<double> transport_features(const std::vector<PhaseField>& history,
                                       double max_shift,
                                       std::vector<VectorField>* fields_out);

// Confidence-weighted Gaussian smoothing over the lattice.
VectorField smooth_field(const VectorField& field, int radius);

}  // namespace sempred

#endif  // SEMPRED_TRANSPORT_HPP_
