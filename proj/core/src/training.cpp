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

#include "sempred/training.hpp"

#include <cmath>
#include <stdexcept>

#include "sempred/errors.hpp"
#include "sempred/fft.hpp"
#include "sempred/phase_motion.hpp"
#include "sempred/rng.hpp"

namespace sempred {

void SgdOptimizer::step(std::vector<double>& params,
                        const std::vector<double>& grad, double clip) {
  if (params.size() != grad.size() || params.size() != velocity_.size()) {
    throw DimensionError("SgdOptimizer: size mismatch");
  }
  double norm = 0.0;
  for (double g : grad) norm += g * g;
  norm = std::sqrt(norm);
  const double scale = (clip > 0.0 && norm > clip) ? clip / norm : 1.0;
  for (size_t i = 0; i < params.size(); ++i) {
    velocity_[i] = momentum_ * velocity_[i] - lr_ * scale * grad[i];
    params[i] += velocity_[i];
  }
}

namespace {

// Rolls one channel plane forward on the tape, one MSE term per step.
// prev/curr are [1,H,W] variables; motion estimation reads their current
// values and is not differentiated through (the transport consumes the
// decoded fields as fixed features).
std::vector<Var> rollout_plane_losses(GradientTape& tape,
                                      const ConvFilterParams& arch,
                                      const ConvNetBinding& binding,
                                      Var prev_plane, Var curr_plane,
                                      const std::vector<const RealGrid*>& targets,
                                      const LftConfig& lft_cfg) {
  const TensorShape ps = tape.shape(prev_plane);
  const TileLayout layout = make_layout(lft_cfg, ps.h, ps.w);
  const RealGrid window = embedded_window(lft_cfg);
  const ComplexGrid wspec = fft2(window);
  const double max_shift = lft_cfg.max_shift();

  auto plane_grid = [&](Var v) {
    RealGrid g(ps.h, ps.w, 1);
    g.data = tape.val(v);
    return g;
  };

  std::vector<Var> losses;
  Var prev = prev_plane, curr = curr_plane;
  for (size_t step = 0; step < targets.size(); ++step) {
    const TileGrid motion_prev = lft_analyze_motion(plane_grid(prev), lft_cfg);
    const TileGrid motion_curr = lft_analyze_motion(plane_grid(curr), lft_cfg);
    const std::vector<PhaseField> history = {
        phase_difference(motion_prev, motion_curr)};
    const std::vector<double> feat =
        transport_features(history, max_shift, nullptr);
    const Var features = tape.leaf(
        {3, layout.rows_u, layout.cols_v}, feat);
    const Var field = transport_head(tape, arch, binding, features, max_shift);
    const CVar ramps = encode_ramps(tape, field, layout.fft);
    const CVar content = analyze_tiles(tape, curr, layout, window);
    const CVar shifted = cmul(tape, content, ramps);
    const Var windows = window_shift(tape, ramps, wspec);
    const Var next = synthesize_tiles(tape, shifted, windows, layout);
    losses.push_back(mse_against(tape, next, targets[step]->data));
    prev = curr;
    curr = next;
  }
  return losses;
}

struct JointGraph {
  GradientTape tape;
  Var loss;
  int extractor_count = 0;
  int transport_count = 0;
};

// Sem_Pred: extract the seed maps, roll each class channel forward, compare
// against the ground-truth future maps.
JointGraph build_sem_pred_graph(const std::vector<RealGrid>& frames,
                                const std::vector<RealGrid>& gt_maps,
                                const PipelineConfig& cfg,
                                const ExtractorParams& extractor,
                                const ConvFilterParams& transport) {
  JointGraph g;
  const ExtractorBinding ebind = bind_extractor_params(g.tape, extractor);
  const ConvNetBinding tbind = bind_conv_params(g.tape, transport);
  g.extractor_count = extractor.param_count();
  g.transport_count = transport.param_count();

  std::vector<Var> seed_maps;
  for (int t = 0; t < cfg.seed_frames; ++t) {
    const Var frame =
        g.tape.leaf({1, frames[t].height, frames[t].width}, frames[t].data);
    seed_maps.push_back(extractor_graph(g.tape, extractor, ebind, frame));
  }
  const int channels = g.tape.shape(seed_maps.back()).c;

  std::vector<Var> losses;
  for (int c = 0; c < channels; ++c) {
    const Var prev = slice_channels(g.tape, seed_maps[seed_maps.size() - 2], c, 1);
    const Var curr = slice_channels(g.tape, seed_maps[seed_maps.size() - 1], c, 1);
    std::vector<RealGrid> channel_targets;
    std::vector<const RealGrid*> target_ptrs;
    channel_targets.reserve(gt_maps.size());
    for (const auto& m : gt_maps) channel_targets.push_back(m.channel(c));
    for (const auto& m : channel_targets) target_ptrs.push_back(&m);
    const std::vector<Var> channel_losses = rollout_plane_losses(
        g.tape, transport, tbind, prev, curr, target_ptrs, cfg.lft);
    losses.insert(losses.end(), channel_losses.begin(), channel_losses.end());
  }
  g.loss = add_scalars(g.tape, losses,
                       1.0 / (static_cast<double>(channels) * gt_maps.size()));
  g.tape.set_terminal(g.loss);
  return g;
}

// Pred_Sem: roll the signal frames forward, extract semantics from each
// prediction, compare against the ground-truth future maps.
JointGraph build_pred_sem_graph(const std::vector<RealGrid>& frames,
                                const std::vector<RealGrid>& gt_maps,
                                const PipelineConfig& cfg,
                                const ExtractorParams& extractor,
                                const ConvFilterParams& transport) {
  JointGraph g;
  const ExtractorBinding ebind = bind_extractor_params(g.tape, extractor);
  const ConvNetBinding tbind = bind_conv_params(g.tape, transport);
  g.extractor_count = extractor.param_count();
  g.transport_count = transport.param_count();

  const int h = frames[0].height, w = frames[0].width;
  const TileLayout layout = make_layout(cfg.lft, h, w);
  const RealGrid window = embedded_window(cfg.lft);
  const ComplexGrid wspec = fft2(window);
  const double max_shift = cfg.lft.max_shift();

  Var prev = g.tape.leaf({1, h, w}, frames[cfg.seed_frames - 2].data);
  Var curr = g.tape.leaf({1, h, w}, frames[cfg.seed_frames - 1].data);
  auto plane_grid = [&](Var v) {
    RealGrid grid(h, w, 1);
    grid.data = g.tape.val(v);
    return grid;
  };

  std::vector<Var> losses;
  for (size_t step = 0; step < gt_maps.size(); ++step) {
    const TileGrid motion_prev = lft_analyze_motion(plane_grid(prev), cfg.lft);
    const TileGrid motion_curr = lft_analyze_motion(plane_grid(curr), cfg.lft);
    const std::vector<PhaseField> history = {
        phase_difference(motion_prev, motion_curr)};
    const std::vector<double> feat =
        transport_features(history, max_shift, nullptr);
    const Var features =
        g.tape.leaf({3, layout.rows_u, layout.cols_v}, feat);
    const Var field =
        transport_head(g.tape, transport, tbind, features, max_shift);
    const CVar ramps = encode_ramps(g.tape, field, layout.fft);
    const CVar content = analyze_tiles(g.tape, curr, layout, window);
    const CVar shifted = cmul(g.tape, content, ramps);
    const Var windows = window_shift(g.tape, ramps, wspec);
    const Var next_frame = synthesize_tiles(g.tape, shifted, windows, layout);

    const Var map = extractor_graph(g.tape, extractor, ebind, next_frame);
    losses.push_back(mse_against(g.tape, map, gt_maps[step].data));
    prev = curr;
    curr = next_frame;
  }
  g.loss = add_scalars(g.tape, losses, 1.0 / gt_maps.size());
  g.tape.set_terminal(g.loss);
  return g;
}

JointGraph build_joint_graph(const PipelineConfig& cfg,
                             const PipelineWeights& weights,
                             const SceneConfig& scene,
                             const GlyphLibrary& glyphs,
                             const SequenceSample& seq) {
  std::vector<RealGrid> frames;
  for (int t = 0; t < cfg.seed_frames; ++t) {
    frames.push_back(render_frame(scene, glyphs, seq, t));
  }
  std::vector<RealGrid> gt_maps;
  for (int s = 0; s < cfg.predict_steps; ++s) {
    gt_maps.push_back(render_maps(scene, seq, cfg.seed_frames + s));
  }
  return cfg.order == PipelineOrder::kSemPred
             ? build_sem_pred_graph(frames, gt_maps, cfg, weights.extractor,
                                    weights.transport_sem)
             : build_pred_sem_graph(frames, gt_maps, cfg, weights.extractor,
                                    weights.transport_pix);
}

}  // namespace

void pretrain_extractor(const Dataset& ds, ExtractorParams& params,
                        const TrainOptions& opts) {
  params.validate();
  const SceneConfig& scene = ds.config;
  const GlyphLibrary glyphs =
      scene.glyph_source == GlyphSource::kProcedural
          ? GlyphLibrary::procedural(scene.glyph_size(), scene.class_count)
          : GlyphLibrary::from_idx(scene.idx_images, scene.idx_labels,
                                   scene.glyph_size(), scene.class_count);
  const int crop = std::min(opts.extractor_crop, scene.canvas);
  if (crop % params.downsample_factor() != 0) {
    throw DimensionError("pretrain_extractor: crop must be divisible by 4");
  }

  Rng rng(opts.seed);
  SgdOptimizer optim(opts.lr, opts.momentum, params.values.size());
  std::vector<std::pair<int, int>> samples;  // (sequence, frame)
  for (int i = 0; i < ds.pretrain_count; ++i) {
    for (int t = 0; t < ds.pretrain(i).length; ++t) samples.push_back({i, t});
  }

  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    rng.shuffle(samples);
    for (const auto& [si, t] : samples) {
      const SequenceSample& seq = ds.pretrain(si);
      const RealGrid frame = render_frame(scene, glyphs, seq, t);
      const RealGrid maps = render_maps(scene, seq, t);

      // Content-biased crop: mostly around an object, sometimes anywhere.
      int oy, ox;
      if (!seq.objects.empty() && rng.uniform() < 0.75) {
        const auto& obj = seq.objects[rng.uniform_index(seq.objects.size())];
        oy = static_cast<int>(obj.y[t]) - crop / 2;
        ox = static_cast<int>(obj.x[t]) - crop / 2;
      } else {
        oy = static_cast<int>(rng.uniform_index(scene.canvas - crop + 1));
        ox = static_cast<int>(rng.uniform_index(scene.canvas - crop + 1));
      }
      oy = std::clamp(oy, 0, scene.canvas - crop);
      ox = std::clamp(ox, 0, scene.canvas - crop);

      RealGrid fcrop(crop, crop, 1);
      RealGrid mcrop(crop, crop, scene.class_count);
      for (int y = 0; y < crop; ++y) {
        for (int x = 0; x < crop; ++x) {
          fcrop.at(y, x) = frame.at(oy + y, ox + x);
          for (int c = 0; c < scene.class_count; ++c) {
            mcrop.at(y, x, c) = maps.at(oy + y, ox + x, c);
          }
        }
      }

      GradientTape tape;
      const ExtractorBinding binding = bind_extractor_params(tape, params);
      const Var frame_var = tape.leaf({1, crop, crop}, fcrop.data);
      const Var map_var = extractor_graph(tape, params, binding, frame_var);
      const Var loss = mse_against(tape, map_var, mcrop.data);
      tape.backward(loss);
      optim.step(params.values, tape.collect_param_grads(), opts.grad_clip);
    }
  }
}

void pretrain_transport(const Dataset& ds, ConvFilterParams& params,
                        const LftConfig& lft_cfg, TransportLevel level,
                        const TrainOptions& opts) {
  params.validate();
  const SceneConfig& scene = ds.config;
  const GlyphLibrary glyphs =
      scene.glyph_source == GlyphSource::kProcedural
          ? GlyphLibrary::procedural(scene.glyph_size(), scene.class_count)
          : GlyphLibrary::from_idx(scene.idx_images, scene.idx_labels,
                                   scene.glyph_size(), scene.class_count);
  const int seed_frames = 2;
  const int steps = std::max(1, scene.sequence_length - seed_frames);

  Rng rng(opts.seed);
  SgdOptimizer optim(opts.lr, opts.momentum, params.values.size());
  std::vector<int> order(ds.pretrain_count);
  for (int i = 0; i < ds.pretrain_count; ++i) order[i] = i;

  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    rng.shuffle(order);
    for (const int si : order) {
      const SequenceSample& seq = ds.pretrain(si);
      // One training plane per sample: a populated blob channel, or the frame.
      std::vector<RealGrid> planes;
      if (level == TransportLevel::kBlobs) {
        std::vector<int> present;
        for (const auto& obj : seq.objects) present.push_back(obj.class_id);
        const int cls = present[rng.uniform_index(present.size())];
        for (int t = 0; t < seq.length; ++t) {
          planes.push_back(render_maps(scene, seq, t).channel(cls));
        }
      } else {
        for (int t = 0; t < seq.length; ++t) {
          planes.push_back(render_frame(scene, glyphs, seq, t));
        }
      }

      GradientTape tape;
      const ConvNetBinding binding = bind_conv_params(tape, params);
      const Var prev = tape.leaf({1, scene.canvas, scene.canvas},
                                 planes[seed_frames - 2].data);
      const Var curr = tape.leaf({1, scene.canvas, scene.canvas},
                                 planes[seed_frames - 1].data);
      std::vector<const RealGrid*> targets;
      for (int s = 0; s < steps; ++s) targets.push_back(&planes[seed_frames + s]);
      const std::vector<Var> losses = rollout_plane_losses(
          tape, params, binding, prev, curr, targets, lft_cfg);
      const Var loss = add_scalars(tape, losses, 1.0 / losses.size());
      tape.backward(loss);
      optim.step(params.values, tape.collect_param_grads(), opts.grad_clip);
    }
  }
}

bool valid_fraction(double fraction) {
  for (double f : {0.0, 0.01, 0.05, 0.10, 0.20, 1.0}) {
    if (std::abs(fraction - f) < 1e-9) return true;
  }
  return false;
}

PipelineWeights finetune(const PipelineConfig& cfg,
                         const PipelineWeights& start, const FinetuneSpec& spec,
                         const Dataset& ds, const TrainOptions& opts) {
  cfg.validate();
  if (!valid_fraction(spec.fraction)) {
    throw std::invalid_argument(
        "finetune: fraction must be one of {0, 0.01, 0.05, 0.10, 0.20, 1.0}");
  }
  if (spec.from_scratch && spec.fraction != 1.0) {
    throw std::invalid_argument(
        "finetune: from-scratch training uses the whole joint split");
  }
  PipelineWeights weights = start;
  if (spec.fraction == 0.0) return weights;  // frozen pre-trained composition

  const int use = std::max(
      1, static_cast<int>(std::lround(spec.fraction * ds.joint_count)));
  const SceneConfig& scene = ds.config;
  const GlyphLibrary glyphs =
      scene.glyph_source == GlyphSource::kProcedural
          ? GlyphLibrary::procedural(scene.glyph_size(), scene.class_count)
          : GlyphLibrary::from_idx(scene.idx_images, scene.idx_labels,
                                   scene.glyph_size(), scene.class_count);

  ConvFilterParams& transport = cfg.order == PipelineOrder::kSemPred
                                    ? weights.transport_sem
                                    : weights.transport_pix;
  SgdOptimizer opt_extractor(opts.lr, opts.momentum,
                             weights.extractor.values.size());
  SgdOptimizer opt_transport(opts.lr, opts.momentum, transport.values.size());

  Rng rng(opts.seed);
  const int total_updates =
      std::max(opts.min_updates, opts.epochs * use);
  std::vector<int> order(use);
  for (int i = 0; i < use; ++i) order[i] = i;

  int done = 0;
  while (done < total_updates) {
    rng.shuffle(order);
    for (const int ji : order) {
      if (done >= total_updates) break;
      JointGraph g =
          build_joint_graph(cfg, weights, scene, glyphs, ds.joint(ji));
      g.tape.backward(g.loss);
      const std::vector<double> grads = g.tape.collect_param_grads();
      const std::vector<double> eg(grads.begin(),
                                   grads.begin() + g.extractor_count);
      const std::vector<double> tg(grads.begin() + g.extractor_count,
                                   grads.end());
      opt_extractor.step(weights.extractor.values, eg, opts.grad_clip);
      opt_transport.step(transport.values, tg, opts.grad_clip);
      ++done;
    }
  }
  return weights;
}

double joint_loss(const PipelineConfig& cfg, const PipelineWeights& weights,
                  const Dataset& ds, int joint_index) {
  const SceneConfig& scene = ds.config;
  const GlyphLibrary glyphs =
      scene.glyph_source == GlyphSource::kProcedural
          ? GlyphLibrary::procedural(scene.glyph_size(), scene.class_count)
          : GlyphLibrary::from_idx(scene.idx_images, scene.idx_labels,
                                   scene.glyph_size(), scene.class_count);
  JointGraph g =
      build_joint_graph(cfg, weights, scene, glyphs, ds.joint(joint_index));
  return g.tape.val(g.loss)[0];
}

}  // namespace sempred
