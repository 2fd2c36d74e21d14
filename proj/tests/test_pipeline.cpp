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
#include "sempred/dataset.hpp"
#include "sempred/errors.hpp"
#include "sempred/metrics.hpp"
#include "sempred/pipeline.hpp"
#include "sempred/report.hpp"
#include "sempred/training.hpp"
#include "support/oracles.hpp"

using namespace sempred;

namespace {

SceneConfig pipeline_scene(int classes = 3) {
  SceneConfig cfg;
  cfg.class_count = classes;
  cfg.num_objects = 2;
  cfg.sequence_length = 6;
  return cfg;
}

// Hand-built track: exact constant velocity, no randomness.
SequenceSample straight_track(int length,
                              const std::vector<std::tuple<int, double, double,
                                                           double, double>>&
                                  objects /* class, y, x, vy, vx */) {
  SequenceSample seq;
  seq.length = length;
  for (const auto& [cls, y0, x0, vy, vx] : objects) {
    ObjectTrack obj;
    obj.class_id = cls;
    for (int t = 0; t < length; ++t) {
      obj.y.push_back(y0 + vy * t);
      obj.x.push_back(x0 + vx * t);
    }
    seq.objects.push_back(obj);
  }
  return seq;
}

PipelineWeights matched_weights(const SceneConfig& scene) {
  PipelineWeights w;
  const GlyphLibrary glyphs =
      GlyphLibrary::procedural(scene.glyph_size(), scene.class_count);
  w.templates = class_templates(scene, glyphs);
  w.match.max_per_class = scene.num_objects;
  w.match.blob_sigma = scene.blob_sigma;
  w.extractor = ExtractorParams::make(scene.class_count);
  w.transport_sem = ConvFilterParams::transport_default(1);
  w.transport_pix = ConvFilterParams::transport_default(1);
  return w;
}

PipelineConfig matched_config(PipelineOrder order) {
  PipelineConfig cfg;
  cfg.order = order;
  cfg.extractor = ExtractorKind::kMatched;
  cfg.transport.mode = TransportMode::kIdentity;
  cfg.transport.smoothing_radius = 1;
  return cfg;
}

}  // namespace

TEST_SUITE("pipeline") {
  TEST_CASE("static scene is a fixpoint of sem_pred") {
    const SceneConfig scene = pipeline_scene();
    const GlyphLibrary glyphs =
        GlyphLibrary::procedural(scene.glyph_size(), scene.class_count);
    const SequenceSample seq =
        straight_track(6, {{0, 22.0, 25.0, 0.0, 0.0}, {2, 40.0, 41.0, 0.0, 0.0}});
    std::vector<RealGrid> frames;
    for (int t = 0; t < 2; ++t) frames.push_back(render_frame(scene, glyphs, seq, t));

    const PipelineConfig cfg = matched_config(PipelineOrder::kSemPred);
    const PipelineWeights weights = matched_weights(scene);
    const auto predicted = run_sem_pred(frames, cfg, weights);
    REQUIRE(predicted.size() == 3);

    const SemanticMap seed_map =
        extract_matched(frames[1], weights.templates, weights.match);
    for (const auto& map : predicted) {
      double err = 0.0;
      for (size_t i = 0; i < map.data.size(); ++i) {
        err = std::max(err, std::abs(map.data[i] - seed_map.data[i]));
      }
      CHECK(err < 2e-3);
    }
  }

  TEST_CASE("sem_pred tracks a moving blob step by step") {
    const SceneConfig scene = pipeline_scene();
    const GlyphLibrary glyphs =
        GlyphLibrary::procedural(scene.glyph_size(), scene.class_count);
    const SequenceSample seq = straight_track(6, {{1, 30.0, 20.0, 0.0, 2.0}});
    std::vector<RealGrid> frames;
    for (int t = 0; t < 2; ++t) frames.push_back(render_frame(scene, glyphs, seq, t));

    const PipelineConfig cfg = matched_config(PipelineOrder::kSemPred);
    const PipelineWeights weights = matched_weights(scene);
    const auto predicted = run_sem_pred(frames, cfg, weights);
    for (int s = 0; s < 3; ++s) {
      const auto blobs = blob_centroid(predicted[s], 1);
      REQUIRE(!blobs.empty());
      const int t = 2 + s;
      CHECK(std::hypot(blobs[0].x - seq.objects[0].x[t],
                       blobs[0].y - seq.objects[0].y[t]) < 0.5);
    }
  }

  TEST_CASE("different-channel blobs cross without interference") {
    const SceneConfig scene = pipeline_scene();
    const GlyphLibrary glyphs =
        GlyphLibrary::procedural(scene.glyph_size(), scene.class_count);
    // Crossing paths around t = 3.
    const SequenceSample seq = straight_track(
        6, {{0, 32.0, 18.0, 0.0, 2.0}, {2, 32.0, 30.0, 0.0, -2.0}});
    std::vector<RealGrid> frames;
    for (int t = 0; t < 2; ++t) frames.push_back(render_frame(scene, glyphs, seq, t));

    const PipelineConfig cfg = matched_config(PipelineOrder::kSemPred);
    const PipelineWeights weights = matched_weights(scene);
    const auto predicted = run_sem_pred(frames, cfg, weights);
    for (int s = 0; s < 3; ++s) {
      const int t = 2 + s;
      for (const int cls : {0, 2}) {
        const auto blobs = blob_centroid(predicted[s], cls);
        REQUIRE(!blobs.empty());
        const auto& obj = seq.objects[cls == 0 ? 0 : 1];
        CHECK(std::hypot(blobs[0].x - obj.x[t], blobs[0].y - obj.y[t]) < 1.0);
      }
    }
  }

  TEST_CASE("static scene is a fixpoint of pred_sem") {
    const SceneConfig scene = pipeline_scene();
    const GlyphLibrary glyphs =
        GlyphLibrary::procedural(scene.glyph_size(), scene.class_count);
    const SequenceSample seq = straight_track(6, {{1, 28.0, 36.0, 0.0, 0.0}});
    std::vector<RealGrid> frames;
    for (int t = 0; t < 2; ++t) frames.push_back(render_frame(scene, glyphs, seq, t));

    const PipelineConfig cfg = matched_config(PipelineOrder::kPredSem);
    const PipelineWeights weights = matched_weights(scene);
    const auto predicted = run_pred_sem(frames, cfg, weights);
    const SemanticMap expect =
        extract_matched(frames[1], weights.templates, weights.match);
    for (const auto& map : predicted) {
      double err = 0.0;
      for (size_t i = 0; i < map.data.size(); ++i) {
        err = std::max(err, std::abs(map.data[i] - expect.data[i]));
      }
      CHECK(err < 2e-3);
    }
  }

  TEST_CASE("pred_sem tracks a moving glyph") {
    const SceneConfig scene = pipeline_scene();
    const GlyphLibrary glyphs =
        GlyphLibrary::procedural(scene.glyph_size(), scene.class_count);
    const SequenceSample seq = straight_track(6, {{2, 33.0, 20.0, 0.0, 2.0}});
    std::vector<RealGrid> frames;
    for (int t = 0; t < 2; ++t) frames.push_back(render_frame(scene, glyphs, seq, t));

    const PipelineConfig cfg = matched_config(PipelineOrder::kPredSem);
    const PipelineWeights weights = matched_weights(scene);
    const auto predicted = run_pred_sem(frames, cfg, weights);
    for (int s = 0; s < 3; ++s) {
      const auto blobs = blob_centroid(predicted[s], 2);
      REQUIRE(!blobs.empty());
      const int t = 2 + s;
      CHECK(std::hypot(blobs[0].x - seq.objects[0].x[t],
                       blobs[0].y - seq.objects[0].y[t]) < 1.0);
    }
  }

  TEST_CASE("multi-channel rollout equals independent single-channel runs") {
    const SceneConfig scene = pipeline_scene(2);
    const SequenceSample seq = straight_track(
        3, {{0, 24.0, 20.0, 1.0, 1.5}, {1, 40.0, 44.0, -1.0, 0.5}});
    std::vector<RealGrid> seeds;
    for (int t = 0; t < 2; ++t) seeds.push_back(render_maps(scene, seq, t));

    LftConfig lft;
    TransportConfig transport;
    transport.smoothing_radius = 1;
    const auto joint = lfdtn_rollout(seeds, 2, lft, transport, nullptr);

    for (int c = 0; c < 2; ++c) {
      std::vector<RealGrid> plane_seeds;
      for (const auto& s : seeds) plane_seeds.push_back(s.channel(c));
      const auto solo = lfdtn_rollout(plane_seeds, 2, lft, transport, nullptr);
      for (size_t s = 0; s < solo.size(); ++s) {
        const RealGrid jc = joint[s].channel(c);
        for (size_t i = 0; i < jc.data.size(); ++i) {
          CHECK(jc.data[i] == solo[s].data[i]);
        }
      }
    }
  }

  TEST_CASE("evaluate is deterministic and reports are byte-stable") {
    SceneConfig scene = pipeline_scene();
    scene.seed = 11;
    const Dataset ds = generate_dataset(scene, 0, 0, 4);
    const PipelineConfig cfg = matched_config(PipelineOrder::kSemPred);
    const PipelineWeights weights = matched_weights(scene);

    const EvalSummary a = evaluate(ds, cfg, weights);
    const EvalSummary b = evaluate(ds, cfg, weights);
    REQUIRE(a.per_sequence.size() == b.per_sequence.size());
    for (size_t i = 0; i < a.per_sequence.size(); ++i) {
      CHECK(a.per_sequence[i].mse == b.per_sequence[i].mse);
      CHECK(a.per_sequence[i].dssim == b.per_sequence[i].dssim);
    }

    EvalReport ra, rb;
    ra.config_hash = rb.config_hash = hash_hex(pipeline_config_to_json(cfg));
    ra.seed = rb.seed = 11;
    ra.add_run(a, "sem_pred", "0");
    rb.add_run(b, "sem_pred", "0");
    CHECK(ra.to_csv() == rb.to_csv());
    CHECK(ra.to_json() == rb.to_json());
  }

  TEST_CASE("fraction zero fine-tuning returns bit-identical weights") {
    SceneConfig scene = pipeline_scene(2);
    scene.seed = 21;
    const Dataset ds = generate_dataset(scene, 0, 2, 0);
    PipelineConfig cfg = matched_config(PipelineOrder::kSemPred);
    cfg.extractor = ExtractorKind::kLearned;
    cfg.transport.mode = TransportMode::kLearned;

    PipelineWeights weights = matched_weights(scene);
    weights.extractor = ExtractorParams::make(2);
    weights.extractor.randomize(3, 0.5);
    weights.transport_sem.randomize(4, 0.5);

    const PipelineWeights frozen =
        finetune(cfg, weights, FinetuneSpec{0.0, false}, ds, TrainOptions{});
    CHECK(frozen.extractor.values == weights.extractor.values);
    CHECK(frozen.transport_sem.values == weights.transport_sem.values);

    CHECK_THROWS_AS(
        finetune(cfg, weights, FinetuneSpec{0.3, false}, ds, TrainOptions{}),
        std::invalid_argument);
  }

  TEST_CASE("short fine-tuning lowers the joint loss") {
    SceneConfig scene = pipeline_scene(2);
    scene.seed = 31;
    const Dataset ds = generate_dataset(scene, 0, 3, 0);
    PipelineConfig cfg = matched_config(PipelineOrder::kSemPred);
    cfg.extractor = ExtractorKind::kLearned;
    cfg.transport.mode = TransportMode::kLearned;

    PipelineWeights weights = matched_weights(scene);
    weights.extractor = ExtractorParams::make(2);
    weights.extractor.randomize(13, 0.4);
    weights.transport_sem = ConvFilterParams::transport_default(1);
    weights.transport_sem.identity_init();

    const double before = joint_loss(cfg, weights, ds, 0);
    TrainOptions opts;
    opts.epochs = 4;
    opts.lr = 0.01;
    opts.min_updates = 12;
    const PipelineWeights tuned =
        finetune(cfg, weights, FinetuneSpec{1.0, false}, ds, opts);
    const double after = joint_loss(cfg, tuned, ds, 0);
    CHECK(after < before);
  }

  TEST_CASE("learned transport trained on constant-velocity sequences") {
    SceneConfig scene = pipeline_scene(2);
    scene.num_objects = 1;
    scene.min_speed = 0.8;
    scene.max_speed = 2.2;
    scene.seed = 77;
    const Dataset ds = generate_dataset(scene, 200, 0, 12);

    ConvFilterParams transport = ConvFilterParams::transport_default(1);
    transport.identity_init();
    TrainOptions opts;
    opts.epochs = 1;
    opts.lr = 0.005;
    opts.seed = 5;
    pretrain_transport(ds, transport, LftConfig{}, TransportLevel::kBlobs, opts);

    // One-step field error against the generator velocity, confidence
    // weighted over the lattice.
    double err = 0.0, mass = 0.0;
    for (int i = 0; i < ds.test_count; ++i) {
      const SequenceSample& seq = ds.test(i);
      const RealGrid m0 = render_maps(scene, seq, 0).channel(seq.objects[0].class_id);
      const RealGrid m1 = render_maps(scene, seq, 1).channel(seq.objects[0].class_id);
      const LftConfig lft;
      const std::vector<PhaseField> history = {phase_difference(
          lft_analyze_motion(m0, lft), lft_analyze_motion(m1, lft))};
      const LearnedTransport out = transport_learned(history, transport);
      const double vx = seq.objects[0].x[2] - seq.objects[0].x[1];
      const double vy = seq.objects[0].y[2] - seq.objects[0].y[1];
      for (int t = 0; t < out.field.tiles(); ++t) {
        const double c = out.field.confidence[t];
        err += c * std::hypot(out.field.dx[t] - vx, out.field.dy[t] - vy);
        mass += c;
      }
    }
    REQUIRE(mass > 0.0);
    CHECK(err / mass < 0.1);
  }

  TEST_CASE("parameter budget check") {
    const SceneConfig scene = pipeline_scene();
    PipelineWeights w = matched_weights(scene);
    CHECK_NOTHROW(check_parameter_budget(w));
    // A transport with twice the width breaks the fairness budget.
    w.transport_pix.layers[1].out_c = 32;
    w.transport_pix.layers[2].in_c = 32;
    w.transport_pix.values.assign(w.transport_pix.param_count(), 0.0);
    CHECK_THROWS_AS(check_parameter_budget(w), std::invalid_argument);
  }

  TEST_CASE("config validation") {
    PipelineConfig cfg;
    cfg.seed_frames = 1;
    CHECK_THROWS_AS(cfg.validate(), DimensionError);
    cfg.seed_frames = 2;
    cfg.share_weights_across_channels = false;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  }
}
