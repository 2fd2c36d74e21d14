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

#include "sempred/semantics.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

#include "sempred/errors.hpp"
#include "sempred/rng.hpp"

namespace sempred {

namespace {

void render_blob(RealGrid& map, int channel, double cy, double cx,
                 double sigma) {
  const int reach = static_cast<int>(std::ceil(6.0 * sigma));
  const int y0 = std::max(0, static_cast<int>(std::floor(cy)) - reach);
  const int y1 = std::min(map.height - 1, static_cast<int>(std::ceil(cy)) + reach);
  const int x0 = std::max(0, static_cast<int>(std::floor(cx)) - reach);
  const int x1 = std::min(map.width - 1, static_cast<int>(std::ceil(cx)) + reach);
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const double r2 = (y - cy) * (y - cy) + (x - cx) * (x - cx);
      map.at(y, x, channel) += std::exp(-r2 / (2.0 * sigma * sigma));
    }
  }
}

double parabolic_offset(double vm, double v0, double vp) {
  const double den = vm - 2.0 * v0 + vp;
  if (std::abs(den) < 1e-12) return 0.0;
  return std::clamp(0.5 * (vm - vp) / den, -0.5, 0.5);
}

}  // namespace

namespace {

// Normalized cross-correlation of the frame against one zero-mean unit-norm
// template, indexed by the template center.
RealGrid ncc_map(const RealGrid& frame, const RealGrid& tpl) {
  double mean = 0.0;
  for (double v : tpl.data) mean += v;
  mean /= static_cast<double>(tpl.data.size());
  std::vector<double> tz(tpl.data.size());
  double norm = 0.0;
  for (size_t i = 0; i < tz.size(); ++i) {
    tz[i] = tpl.data[i] - mean;
    norm += tz[i] * tz[i];
  }
  norm = std::sqrt(norm);
  RealGrid score(frame.height, frame.width, 1, 0.0);
  if (norm < 1e-12) return score;
  for (double& v : tz) v /= norm;

  const int th = tpl.height, tw = tpl.width;
  const int oy = th / 2, ox = tw / 2;
  const int sh = frame.height - th + 1, sw = frame.width - tw + 1;
  for (int y = 0; y < sh; ++y) {
    for (int x = 0; x < sw; ++x) {
      double corr = 0.0, sum = 0.0, sum2 = 0.0;
      for (int v = 0; v < th; ++v) {
        const double* row =
            &frame.data[static_cast<size_t>(y + v) * frame.width + x];
        const double* trow = &tz[static_cast<size_t>(v) * tw];
        for (int u = 0; u < tw; ++u) {
          corr += trow[u] * row[u];
          sum += row[u];
          sum2 += row[u] * row[u];
        }
      }
      const double var = sum2 - sum * sum / (th * tw);
      score.at(y + oy, x + ox) = var < 1e-9 ? 0.0 : corr / std::sqrt(var);
    }
  }
  return score;
}

}  // namespace

SemanticMap extract_matched(const RealGrid& frame,
                            const std::vector<RealGrid>& templates,
                            const MatchOptions& options) {
  if (frame.channels != 1) {
    throw DimensionError("extract_matched: frame must be single-channel");
  }
  const int classes = static_cast<int>(templates.size());
  std::vector<RealGrid> scores;
  int suppress = 1;
  for (const RealGrid& tpl : templates) {
    if (tpl.height > frame.height || tpl.width > frame.width) {
      throw DimensionError("extract_matched: template larger than frame");
    }
    suppress = std::max(suppress, std::max(tpl.height, tpl.width) / 2);
    scores.push_back(ncc_map(frame, tpl));
  }

  // Joint greedy acceptance: the globally best response wins, then its
  // neighborhood is suppressed across every class, so correlated templates
  // cannot double-report one object.
  std::vector<RealGrid> gated = scores;
  std::vector<int> remaining(classes, options.max_per_class);
  SemanticMap map(frame.height, frame.width, classes, 0.0);
  while (true) {
    double best = options.threshold;
    int bc = -1, by = -1, bx = -1;
    for (int c = 0; c < classes; ++c) {
      if (remaining[c] <= 0) continue;
      for (int y = 0; y < frame.height; ++y) {
        for (int x = 0; x < frame.width; ++x) {
          if (gated[c].at(y, x) > best) {
            best = gated[c].at(y, x);
            bc = c;
            by = y;
            bx = x;
          }
        }
      }
    }
    if (bc < 0) break;
    // Subpixel refinement on the raw response surface.
    auto at = [&](int y, int x) {
      if (y < 0 || y >= frame.height || x < 0 || x >= frame.width) return 0.0;
      return scores[bc].at(y, x);
    };
    const double off_y = parabolic_offset(at(by - 1, bx), best, at(by + 1, bx));
    const double off_x = parabolic_offset(at(by, bx - 1), best, at(by, bx + 1));
    render_blob(map, bc, by + off_y, bx + off_x, options.blob_sigma);
    --remaining[bc];
    for (int c = 0; c < classes; ++c) {
      for (int y = std::max(0, by - suppress);
           y <= std::min(frame.height - 1, by + suppress); ++y) {
        for (int x = std::max(0, bx - suppress);
             x <= std::min(frame.width - 1, bx + suppress); ++x) {
          gated[c].at(y, x) = 0.0;
        }
      }
    }
  }
  return map;
}

int ExtractorParams::param_count() const {
  int total = 0;
  for (const auto& l : layers) {
    total += l.kh * l.kw * l.in_c * l.out_c + l.out_c;
  }
  return total;
}

void ExtractorParams::validate() const {
  if (layers.size() != 8) {
    throw DimensionError("ExtractorParams: expected the 8-layer stack");
  }
  if (static_cast<int>(values.size()) != param_count()) {
    throw DimensionError("ExtractorParams: value count mismatch");
  }
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw std::runtime_error("ExtractorParams: non-finite parameter");
    }
  }
}

ExtractorParams ExtractorParams::make(int class_count) {
  ExtractorParams p;
  p.layers = {
      {3, 3, 1, 12, 1, Activation::kLeakyRelu},    // full-res features
      {3, 3, 12, 20, 2, Activation::kLeakyRelu},   // down 1
      {3, 3, 20, 28, 2, Activation::kLeakyRelu},   // down 2
      {3, 3, 28, 28, 1, Activation::kLeakyRelu},   // bottleneck
      {3, 3, 28, 20, 1, Activation::kLeakyRelu},   // after upsample 1
      {3, 3, 40, 14, 1, Activation::kLeakyRelu},   // skip concat fuse
      {3, 3, 14, 14, 1, Activation::kLeakyRelu},   // after upsample 2
      {3, 3, 14, class_count, 1, Activation::kIdentity},  // linear head
  };
  p.values.assign(p.param_count(), 0.0);
  return p;
}

void ExtractorParams::zero_init() { values.assign(param_count(), 0.0); }

void ExtractorParams::randomize(uint64_t seed, double gain) {
  Rng rng(seed);
  values.assign(param_count(), 0.0);
  size_t pos = 0;
  for (const auto& l : layers) {
    const int fan_in = l.kh * l.kw * l.in_c;
    const double stddev = gain * std::sqrt(2.0 / fan_in);
    for (int i = 0; i < l.kh * l.kw * l.in_c * l.out_c; ++i) {
      values[pos++] = stddev * rng.normal();
    }
    pos += l.out_c;
  }
}

ExtractorBinding bind_extractor_params(GradientTape& tape,
                                       const ExtractorParams& params) {
  params.validate();
  ExtractorBinding binding;
  size_t pos = 0;
  for (const auto& l : params.layers) {
    const int nw = l.kh * l.kw * l.in_c * l.out_c;
    const Var w = tape.leaf(
        {nw, 1, 1},
        {params.values.begin() + pos, params.values.begin() + pos + nw});
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

Var extractor_graph(GradientTape& tape, const ExtractorParams& params,
                    const ExtractorBinding& binding, Var frame) {
  const TensorShape fs = tape.shape(frame);
  if (fs.h % params.downsample_factor() != 0 ||
      fs.w % params.downsample_factor() != 0) {
    throw DimensionError(
        "extractor_graph: frame dimensions must be divisible by the "
        "downsample factor");
  }
  auto layer = [&](int i, Var x) {
    const auto& l = params.layers[i];
    const ConvSpec spec{.out_c = l.out_c, .in_c = l.in_c, .kh = l.kh,
                        .kw = l.kw, .stride = l.stride, .pad = l.kh / 2};
    Var y = conv2d(tape, x, binding.slots[2 * i], binding.slots[2 * i + 1], spec);
    if (l.activation == Activation::kLeakyRelu) y = leaky_relu(tape, y, 0.1);
    return y;
  };
  const Var x0 = layer(0, frame);
  const Var x1 = layer(1, x0);
  const Var x2 = layer(2, x1);
  const Var x3 = layer(3, x2);
  Var up1 = layer(4, upsample2(tape, x3));
  const Var fused = layer(5, concat_channels(tape, up1, x1));
  const Var up2 = layer(6, upsample2(tape, fused));
  return layer(7, up2);
}

LearnedExtraction extract_learned(const RealGrid& frame,
                                  const ExtractorParams& params) {
  if (frame.channels != 1) {
    throw DimensionError("extract_learned: frame must be single-channel");
  }
  LearnedExtraction out;
  const Var fv = out.tape.leaf({1, frame.height, frame.width}, frame.data);
  const ExtractorBinding binding = bind_extractor_params(out.tape, params);
  out.map_var = extractor_graph(out.tape, params, binding, fv);
  out.tape.set_terminal(out.map_var);

  const TensorShape ms = out.tape.shape(out.map_var);
  out.map = SemanticMap(ms.h, ms.w, ms.c);
  out.map.data = out.tape.val(out.map_var);
  return out;
}

SemanticMap extract_infer(const RealGrid& frame, const ExtractorParams& params) {
  return extract_learned(frame, params).map;
}

std::vector<Blob> blob_centroid(const SemanticMap& map, int class_id) {
  if (class_id < 0 || class_id >= map.channels) {
    throw DimensionError("blob_centroid: invalid class id");
  }
  double peak = 0.0;
  for (int y = 0; y < map.height; ++y) {
    for (int x = 0; x < map.width; ++x) {
      peak = std::max(peak, map.at(y, x, class_id));
    }
  }
  std::vector<Blob> blobs;
  if (peak <= 1e-9) return blobs;
  const double threshold = 0.3 * peak;

  std::vector<char> visited(static_cast<size_t>(map.height) * map.width, 0);
  for (int sy = 0; sy < map.height; ++sy) {
    for (int sx = 0; sx < map.width; ++sx) {
      const size_t si = static_cast<size_t>(sy) * map.width + sx;
      if (visited[si] || map.at(sy, sx, class_id) < threshold) continue;
      // 8-connected flood fill. The centroid weights are baseline-corrected
      // by the threshold so the mask boundary contributes no weight; a hard
      // mask would bias subpixel centers by ~0.1 px.
      Blob blob;
      double wx = 0.0, wy = 0.0, wmass = 0.0;
      double rx = 0.0, ry = 0.0;
      std::deque<std::pair<int, int>> queue{{sy, sx}};
      visited[si] = 1;
      while (!queue.empty()) {
        const auto [y, x] = queue.front();
        queue.pop_front();
        const double v = map.at(y, x, class_id);
        blob.mass += v;
        const double w = v - threshold;
        wmass += w;
        wy += w * y;
        wx += w * x;
        ry += v * y;
        rx += v * x;
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int ny = y + dy, nx = x + dx;
            if (ny < 0 || ny >= map.height || nx < 0 || nx >= map.width) continue;
            const size_t ni = static_cast<size_t>(ny) * map.width + nx;
            if (visited[ni] || map.at(ny, nx, class_id) < threshold) continue;
            visited[ni] = 1;
            queue.emplace_back(ny, nx);
          }
        }
      }
      if (wmass > 1e-12) {
        blob.y = wy / wmass;
        blob.x = wx / wmass;
      } else {
        blob.y = ry / blob.mass;
        blob.x = rx / blob.mass;
      }
      blobs.push_back(blob);
    }
  }
  std::sort(blobs.begin(), blobs.end(),
            [](const Blob& a, const Blob& b) { return a.mass > b.mass; });
  return blobs;
}

}  // namespace sempred
