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

#include "sempred/transport.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "sempred/errors.hpp"
#include "sempred/rng.hpp"

namespace sempred {

void TransportConfig::validate() const {
  if (history_len < 1) {
    throw DimensionError("TransportConfig: history_len must be >= 1");
  }
  if (smoothing_radius < 0) {
    throw DimensionError("TransportConfig: smoothing_radius must be >= 0");
  }
}

int ConvFilterParams::param_count() const {
  int total = 0;
  for (const auto& l : layers) {
    total += l.kh * l.kw * l.in_c * l.out_c + l.out_c;
  }
  return total;
}

void ConvFilterParams::validate() const {
  if (static_cast<int>(values.size()) != param_count()) {
    throw DimensionError("ConvFilterParams: value count " +
                         std::to_string(values.size()) + " does not match " +
                         std::to_string(param_count()));
  }
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw std::runtime_error("ConvFilterParams: non-finite parameter");
    }
  }
  for (size_t i = 1; i < layers.size(); ++i) {
    if (layers[i].in_c != layers[i - 1].out_c) {
      throw DimensionError("ConvFilterParams: channel chain broken at layer " +
                           std::to_string(i));
    }
  }
}

ConvFilterParams ConvFilterParams::transport_default(int history_len) {
  ConvFilterParams p;
  const int in = 3 * history_len;
  p.layers = {
      {3, 3, in, 16, 1, Activation::kLeakyRelu},
      {3, 3, 16, 16, 1, Activation::kLeakyRelu},
      {3, 3, 16, 2, 1, Activation::kIdentity},
  };
  p.values.assign(p.param_count(), 0.0);
  return p;
}

void ConvFilterParams::identity_init() {
  values.assign(param_count(), 0.0);
}

void ConvFilterParams::randomize(uint64_t seed, double gain) {
  Rng rng(seed);
  values.assign(param_count(), 0.0);
  size_t pos = 0;
  for (const auto& l : layers) {
    const int fan_in = l.kh * l.kw * l.in_c;
    const double stddev = gain * std::sqrt(2.0 / fan_in);
    for (int i = 0; i < l.kh * l.kw * l.in_c * l.out_c; ++i) {
      values[pos++] = stddev * rng.normal();
    }
    pos += l.out_c;  // biases stay zero
  }
}

VectorField smooth_field(const VectorField& field, int radius) {
  if (radius <= 0) return field;
  const double sigma = std::max(0.5, radius / 1.5);
  std::vector<double> kernel(2 * radius + 1);
  double ksum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    kernel[i + radius] = std::exp(-i * i / (2.0 * sigma * sigma));
    ksum += kernel[i + radius];
  }
  for (double& k : kernel) k /= ksum;  // weights sum to 1

  VectorField out(field.rows_u, field.cols_v);
  for (int u = 0; u < field.rows_u; ++u) {
    for (int v = 0; v < field.cols_v; ++v) {
      double wx = 0.0, wy = 0.0, wmass = 0.0, kconf = 0.0, kmass = 0.0;
      for (int du = -radius; du <= radius; ++du) {
        const int uu = u + du;
        if (uu < 0 || uu >= field.rows_u) continue;
        for (int dv = -radius; dv <= radius; ++dv) {
          const int vv = v + dv;
          if (vv < 0 || vv >= field.cols_v) continue;
          const double k = kernel[du + radius] * kernel[dv + radius];
          const int idx = field.index(uu, vv);
          const double cw = k * field.confidence[idx];
          wx += cw * field.dx[idx];
          wy += cw * field.dy[idx];
          wmass += cw;
          kconf += k * field.confidence[idx];
          kmass += k;
        }
      }
      const int idx = field.index(u, v);
      if (wmass < 1e-12) {
        out.dx[idx] = field.dx[idx];
        out.dy[idx] = field.dy[idx];
        out.confidence[idx] = 0.0;
      } else {
        out.dx[idx] = wx / wmass;
        out.dy[idx] = wy / wmass;
        out.confidence[idx] = kconf / kmass;
      }
    }
  }
  return out;
}

BaselineTransport transport_baseline(const std::vector<PhaseField>& history,
                                     const TransportConfig& cfg) {
  cfg.validate();
  if (history.empty()) {
    throw std::invalid_argument("transport_baseline: history is empty");
  }
  if (cfg.mode == TransportMode::kLearned) {
    throw std::invalid_argument(
        "transport_baseline: learned mode requires transport_learned");
  }
  const TileLayout& layout = history.back().layout;
  const double max_shift = layout.window / 2.0;

  VectorField latest =
      smooth_field(decode_field(history.back(), max_shift), cfg.smoothing_radius);
  VectorField predicted = latest;
  if (cfg.mode == TransportMode::kConstantVelocity && cfg.history_len >= 2 &&
      history.size() >= 2) {
    const VectorField prev = smooth_field(
        decode_field(history[history.size() - 2], max_shift),
        cfg.smoothing_radius);
    for (int t = 0; t < predicted.tiles(); ++t) {
      predicted.dx[t] = 2.0 * latest.dx[t] - prev.dx[t];
      predicted.dy[t] = 2.0 * latest.dy[t] - prev.dy[t];
    }
  }
  for (int t = 0; t < predicted.tiles(); ++t) {
    predicted.dx[t] = std::clamp(predicted.dx[t], -max_shift, max_shift);
    predicted.dy[t] = std::clamp(predicted.dy[t], -max_shift, max_shift);
  }

  BaselineTransport out;
  out.field = predicted;
  out.predicted = encode_field(predicted, layout);
  return out;
}

std::vector<double> transport_features(const std::vector<PhaseField>& history,
                                       double max_shift,
                                       std::vector<VectorField>* fields_out) {
  const TileLayout& layout = history.back().layout;
  const int tiles = layout.tiles();
  std::vector<double> features(static_cast<size_t>(3 * history.size()) * tiles);
  for (size_t i = 0; i < history.size(); ++i) {
    if (!history[i].layout.same_lattice(layout)) {
      throw LatticeMismatchError("transport_features: lattice mismatch");
    }
    const VectorField f = decode_field(history[i], max_shift);
    for (int t = 0; t < tiles; ++t) {
      features[(3 * i + 0) * tiles + t] = f.dx[t];
      features[(3 * i + 1) * tiles + t] = f.dy[t];
      features[(3 * i + 2) * tiles + t] = f.confidence[t];
    }
    if (fields_out) fields_out->push_back(f);
  }
  return features;
}

ConvNetBinding bind_conv_params(GradientTape& tape,
                                const ConvFilterParams& params) {
  params.validate();
  ConvNetBinding binding;
  size_t pos = 0;
  for (const auto& l : params.layers) {
    const int nw = l.kh * l.kw * l.in_c * l.out_c;
    const Var w = tape.leaf(
        {nw, 1, 1}, {params.values.begin() + pos, params.values.begin() + pos + nw});
    pos += nw;
    const Var b = tape.leaf(
        {l.out_c, 1, 1},
        {params.values.begin() + pos, params.values.begin() + pos + l.out_c});
    pos += l.out_c;
    tape.register_param(w);
    tape.register_param(b);
    binding.slots.push_back(w);
    binding.slots.push_back(b);
  }
  return binding;
}

Var run_conv_stack(GradientTape& tape, const ConvFilterParams& arch,
                   const ConvNetBinding& binding, Var input) {
  Var x = input;
  for (size_t i = 0; i < arch.layers.size(); ++i) {
    const auto& l = arch.layers[i];
    const ConvSpec spec{.out_c = l.out_c, .in_c = l.in_c, .kh = l.kh,
                        .kw = l.kw, .stride = l.stride, .pad = l.kh / 2};
    x = conv2d(tape, x, binding.slots[2 * i], binding.slots[2 * i + 1], spec);
    if (l.activation == Activation::kLeakyRelu) {
      x = leaky_relu(tape, x, 0.1);
    }
  }
  return x;
}

Var transport_head(GradientTape& tape, const ConvFilterParams& arch,
                   const ConvNetBinding& binding, Var features,
                   double max_shift) {
  const int h = tape.shape(features).c;
  const Var correction = run_conv_stack(tape, arch, binding, features);
  const Var latest = slice_channels(tape, features, h - 3, 2);
  const Var raw = add(tape, correction, latest);
  return soft_clamp(tape, raw, 0.75 * max_shift, max_shift);
}

LearnedTransport transport_learned(const std::vector<PhaseField>& history,
                                   const ConvFilterParams& params) {
  params.validate();
  if (history.empty()) {
    throw std::invalid_argument("transport_learned: history is empty");
  }
  if (params.layers.front().in_c != static_cast<int>(3 * history.size())) {
    throw DimensionError(
        "transport_learned: params expect " +
        std::to_string(params.layers.front().in_c / 3) +
        " history steps, got " + std::to_string(history.size()));
  }
  const TileLayout& layout = history.back().layout;
  const double max_shift = layout.window / 2.0;

  LearnedTransport out;
  std::vector<VectorField> fields;
  std::vector<double> feat = transport_features(history, max_shift, &fields);
  const Var features =
      out.tape.leaf({static_cast<int>(3 * history.size()), layout.rows_u,
                     layout.cols_v},
                    std::move(feat));
  const ConvNetBinding binding = bind_conv_params(out.tape, params);
  out.field_var =
      transport_head(out.tape, params, binding, features, max_shift);
  out.tape.set_terminal(out.field_var);

  const auto& fv = out.tape.val(out.field_var);
  const int tiles = layout.tiles();
  out.field = VectorField(layout.rows_u, layout.cols_v);
  for (int t = 0; t < tiles; ++t) {
    out.field.dx[t] = fv[t];
    out.field.dy[t] = fv[tiles + t];
    out.field.confidence[t] = fields.back().confidence[t];
  }
  out.predicted = encode_field(out.field, layout);
  return out;
}

std::vector<double> backprop(GradientTape& tape, const RealGrid& loss_grad) {
  const Var terminal = tape.terminal();
  if (!terminal.valid()) {
    throw std::invalid_argument("backprop: tape has no terminal");
  }
  if (static_cast<int>(loss_grad.data.size()) != tape.shape(terminal).size()) {
    throw DimensionError("backprop: loss_grad size does not match terminal");
  }
  tape.backward_from(terminal, loss_grad.data);
  return tape.collect_param_grads();
}

ConvFilterParams sgd_step(const ConvFilterParams& params,
                          const std::vector<double>& grad, double lr) {
  if (grad.size() != params.values.size()) {
    throw DimensionError("sgd_step: gradient length mismatch");
  }
  ConvFilterParams out = params;
  for (size_t i = 0; i < out.values.size(); ++i) {
    out.values[i] -= lr * grad[i];
  }
  return out;
}

}  // namespace sempred
