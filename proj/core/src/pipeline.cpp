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

#include "sempred/pipeline.hpp"

#include <cmath>
#include <deque>
#include <stdexcept>

#include "json.hpp"
#include "sempred/errors.hpp"
#include "sempred/metrics.hpp"
#include "sempred/parallel.hpp"
#include "sempred/phase_motion.hpp"

namespace sempred {

void PipelineConfig::validate() const {
  lft.validate();
  transport.validate();
  if (seed_frames < 2) {
    throw DimensionError(
        "PipelineConfig: seed_frames must be >= 2 (the phase difference "
        "needs two frames)");
  }
  if (predict_steps < 1) {
    throw DimensionError("PipelineConfig: predict_steps must be >= 1");
  }
  if (!share_weights_across_channels) {
    throw std::invalid_argument(
        "PipelineConfig: per-channel transport weights would break the "
        "parameter-budget fairness; share_weights_across_channels must stay "
        "on");
  }
}

std::string pipeline_config_to_json(const PipelineConfig& cfg) {
  nlohmann::json j;
  j["order"] = cfg.order == PipelineOrder::kSemPred ? "sem_pred" : "pred_sem";
  j["seed_frames"] = cfg.seed_frames;
  j["predict_steps"] = cfg.predict_steps;
  j["window_size"] = cfg.lft.window_size;
  j["hop"] = cfg.lft.hop;
  j["transport_mode"] = cfg.transport.mode == TransportMode::kLearned
                            ? "learned"
                            : (cfg.transport.mode == TransportMode::kIdentity
                                   ? "identity"
                                   : "constant_velocity");
  j["smoothing_radius"] = cfg.transport.smoothing_radius;
  j["history_len"] = cfg.transport.history_len;
  j["extractor"] =
      cfg.extractor == ExtractorKind::kMatched ? "matched" : "learned";
  return j.dump();
}

void check_parameter_budget(const PipelineWeights& weights) {
  const double sem =
      weights.extractor.param_count() + weights.transport_sem.param_count();
  const double pix =
      weights.extractor.param_count() + weights.transport_pix.param_count();
  const double rel = std::abs(sem - pix) / std::max(sem, pix);
  if (rel > 0.01) {
    throw std::invalid_argument(
        "check_parameter_budget: the two orders differ by " +
        std::to_string(rel * 100.0) + "% trainable parameters");
  }
}

namespace {

// One prediction step for a single channel plane: estimate motion between
// the previous and current plane, let the transport filter it forward, apply
// the predicted phase to the current content tiles, and resynthesize.
RealGrid predict_channel(const RealGrid& prev, const RealGrid& curr,
                         const LftConfig& lft_cfg,
                         const TransportConfig& transport_cfg,
                         const ConvFilterParams* learned,
                         VectorField* field_out) {
  const TileGrid motion_prev = lft_analyze_motion(prev, lft_cfg);
  const TileGrid motion_curr = lft_analyze_motion(curr, lft_cfg);
  const std::vector<PhaseField> history = {
      phase_difference(motion_prev, motion_curr)};

  PhaseField ramps;
  VectorField field;
  if (learned) {
    LearnedTransport lt = transport_learned(history, *learned);
    ramps = std::move(lt.predicted);
    field = std::move(lt.field);
  } else {
    BaselineTransport bt = transport_baseline(history, transport_cfg);
    ramps = std::move(bt.predicted);
    field = std::move(bt.field);
  }
  if (field_out) *field_out = field;

  const TileGrid content = lft_analyze(curr, lft_cfg);
  const TileGrid predicted = phase_add(content, ramps);
  const WindowStack windows = window_phase_add(lft_cfg, ramps);
  return lft_synthesize(predicted, windows, lft_cfg);
}

}  // namespace

std::vector<RealGrid> lfdtn_rollout(const std::vector<RealGrid>& seeds,
                                    int steps, const LftConfig& lft_cfg,
                                    const TransportConfig& transport_cfg,
                                    const ConvFilterParams* learned,
                                    RolloutTrace* trace) {
  if (seeds.size() < 2) {
    throw DimensionError("lfdtn_rollout: need at least two seed grids");
  }
  const int channels = seeds[0].channels;
  for (const auto& s : seeds) {
    if (s.channels != channels || s.height != seeds[0].height ||
        s.width != seeds[0].width) {
      throw DimensionError("lfdtn_rollout: seed grids must share one shape");
    }
  }
  if (trace) {
    trace->layout = make_layout(lft_cfg, seeds[0].height, seeds[0].width);
  }

  RealGrid prev = seeds[seeds.size() - 2];
  RealGrid curr = seeds[seeds.size() - 1];
  std::vector<RealGrid> out;
  out.reserve(steps);
  for (int step = 0; step < steps; ++step) {
    RealGrid next(curr.height, curr.width, channels, 0.0);
    for (int c = 0; c < channels; ++c) {
      VectorField field;
      const RealGrid plane = predict_channel(
          prev.channel(c), curr.channel(c), lft_cfg, transport_cfg, learned,
          c == 0 && trace ? &field : nullptr);
      next.set_channel(c, plane);
      if (c == 0 && trace) trace->fields.push_back(field);
    }
    out.push_back(next);
    prev = std::move(curr);
    curr = out.back();
  }
  return out;
}

std::vector<SemanticMap> run_sem_pred(const std::vector<RealGrid>& frames,
                                      const PipelineConfig& cfg,
                                      const PipelineWeights& weights,
                                      RolloutTrace* trace) {
  cfg.validate();
  if (static_cast<int>(frames.size()) < cfg.seed_frames) {
    throw DimensionError("run_sem_pred: sequence shorter than seed_frames");
  }
  std::vector<RealGrid> seed_maps;
  for (int t = 0; t < cfg.seed_frames; ++t) {
    seed_maps.push_back(
        cfg.extractor == ExtractorKind::kMatched
            ? extract_matched(frames[t], weights.templates, weights.match)
            : extract_infer(frames[t], weights.extractor));
  }
  const ConvFilterParams* learned =
      cfg.transport.mode == TransportMode::kLearned ? &weights.transport_sem
                                                    : nullptr;
  return lfdtn_rollout(seed_maps, cfg.predict_steps, cfg.lft, cfg.transport,
                       learned, trace);
}

std::vector<SemanticMap> run_pred_sem(const std::vector<RealGrid>& frames,
                                      const PipelineConfig& cfg,
                                      const PipelineWeights& weights,
                                      RolloutTrace* trace) {
  cfg.validate();
  if (static_cast<int>(frames.size()) < cfg.seed_frames) {
    throw DimensionError("run_pred_sem: sequence shorter than seed_frames");
  }
  std::vector<RealGrid> seeds(frames.begin(), frames.begin() + cfg.seed_frames);
  const ConvFilterParams* learned =
      cfg.transport.mode == TransportMode::kLearned ? &weights.transport_pix
                                                    : nullptr;
  std::vector<RealGrid> predicted_frames = lfdtn_rollout(
      seeds, cfg.predict_steps, cfg.lft, cfg.transport, learned, trace);

  std::vector<SemanticMap> maps;
  maps.reserve(predicted_frames.size());
  for (auto& frame : predicted_frames) {
    maps.push_back(
        cfg.extractor == ExtractorKind::kMatched
            ? extract_matched(frame, weights.templates, weights.match)
            : extract_infer(frame, weights.extractor));
    if (trace) trace->predicted_frames.push_back(frame);
  }
  return maps;
}

EvalSummary evaluate(const Dataset& ds, const PipelineConfig& cfg,
                     const PipelineWeights& weights) {
  cfg.validate();
  const SceneConfig& scene = ds.config;
  const GlyphLibrary glyphs =
      scene.glyph_source == GlyphSource::kProcedural
          ? GlyphLibrary::procedural(scene.glyph_size(), scene.class_count)
          : GlyphLibrary::from_idx(scene.idx_images, scene.idx_labels,
                                   scene.glyph_size(), scene.class_count);

  EvalSummary summary;
  summary.per_sequence.resize(ds.test_count);
  parallel_for(ds.test_count, [&](int i) {
    const SequenceSample& seq = ds.test(i);
    std::vector<RealGrid> frames;
    for (int t = 0; t < cfg.seed_frames; ++t) {
      frames.push_back(render_frame(scene, glyphs, seq, t));
    }
    const std::vector<SemanticMap> predicted =
        cfg.order == PipelineOrder::kSemPred
            ? run_sem_pred(frames, cfg, weights)
            : run_pred_sem(frames, cfg, weights);

    SequenceMetrics m;
    m.seq_index = i;
    int blob_count = 0;
    for (int s = 0; s < cfg.predict_steps; ++s) {
      const int t = cfg.seed_frames + s;
      const RealGrid truth = render_maps(scene, seq, t);
      m.l1 += metric_l1(predicted[s], truth);
      m.mse += metric_mse(predicted[s], truth);
      m.dssim += metric_dssim(predicted[s], truth);
      for (const auto& obj : seq.objects) {
        const auto blobs = blob_centroid(predicted[s], obj.class_id);
        double best = scene.glyph_size();  // miss penalty
        for (const auto& blob : blobs) {
          best = std::min(best, std::hypot(blob.x - obj.x[t], blob.y - obj.y[t]));
        }
        m.blob_err += best;
        ++blob_count;
      }
    }
    m.l1 /= cfg.predict_steps;
    m.mse /= cfg.predict_steps;
    m.dssim /= cfg.predict_steps;
    m.blob_err /= std::max(1, blob_count);
    summary.per_sequence[i] = m;
  });

  SequenceMetrics agg;
  for (const auto& m : summary.per_sequence) {
    agg.l1 += m.l1;
    agg.mse += m.mse;
    agg.dssim += m.dssim;
    agg.blob_err += m.blob_err;
  }
  const double n = std::max<size_t>(1, summary.per_sequence.size());
  agg.l1 /= n;
  agg.mse /= n;
  agg.dssim /= n;
  agg.blob_err /= n;
  summary.aggregate = agg;
  return summary;
}

}  // namespace sempred
