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

#ifndef SEMPRED_DATASET_HPP_
#define SEMPRED_DATASET_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "sempred/grid.hpp"

namespace sempred {

enum class GlyphSource { kProcedural, kIdxFile };

// Synthetic scene: a few textured glyphs moving with constant velocity on a
// square canvas, elastic wall bounce optional, one Gaussian activity blob
// per object rendered into its class channel.
struct SceneConfig {
  int canvas = 64;  // 64 or 128
  int num_objects = 2;
  int class_count = 10;  // K semantic channels
  double min_speed = 0.5;
  double max_speed = 2.5;  // px/step, magnitude
  GlyphSource glyph_source = GlyphSource::kProcedural;
  std::string idx_images;  // used when glyph_source == kIdxFile
  std::string idx_labels;
  bool bounce_at_walls = true;
  int sequence_length = 5;
  double blob_sigma = 2.0;
  uint64_t seed = 1;

  // Odd sizes center the glyph on a pixel, which keeps matched-filter
  // templates alignable without a half-pixel bias.
  int glyph_size() const { return canvas == 128 ? 25 : 13; }
  void validate() const;
};

std::string scene_config_to_json(const SceneConfig& cfg);
SceneConfig scene_config_from_json(const std::string& text);

// One moving object: which glyph it is and where it sits at each frame.
struct ObjectTrack {
  int class_id = 0;
  uint32_t variant = 0;  // index into the per-class stamp list (IDX mode)
  std::vector<double> x, y;  // center of mass per frame
};

struct SequenceSample {
  int length = 0;
  std::vector<ObjectTrack> objects;
};

// Glyph rasters: analytic textured shapes per class, or stamps loaded from
// an IDX image/label pair.
class GlyphLibrary {
 public:
  static GlyphLibrary procedural(int glyph_size, int class_count);
  static GlyphLibrary from_idx(const std::string& images,
                               const std::string& labels, int glyph_size,
                               int class_count);

  // Glyph alpha at a continuous offset from the glyph center.
  double sample(int class_id, uint32_t variant, double dy, double dx) const;
  int variants(int class_id) const;
  int size() const { return size_; }
  // Centered raster stamp (used as the matched-filter template).
  RealGrid stamp(int class_id) const;

 private:
  int size_ = 0;
  int class_count_ = 0;
  bool procedural_ = true;
  std::vector<std::vector<RealGrid>> idx_stamps_;  // per class
};

// Constant-velocity trajectories with optional elastic bounce.
SequenceSample generate_sequence(const SceneConfig& cfg);
SequenceSample generate_sequence(const SceneConfig& cfg, uint64_t seed);

// Deterministic renders from a track record.
RealGrid render_frame(const SceneConfig& cfg, const GlyphLibrary& glyphs,
                      const SequenceSample& seq, int t);
RealGrid render_maps(const SceneConfig& cfg, const SequenceSample& seq, int t);
std::vector<RealGrid> render_frames(const SceneConfig& cfg,
                                    const GlyphLibrary& glyphs,
                                    const SequenceSample& seq);
std::vector<RealGrid> render_all_maps(const SceneConfig& cfg,
                                      const SequenceSample& seq);

// Matched-filter templates, one per class.
std::vector<RealGrid> class_templates(const SceneConfig& cfg,
                                      const GlyphLibrary& glyphs);

// A generated corpus with its split boundaries: [pretrain | joint | test].
struct Dataset {
  SceneConfig config;
  int pretrain_count = 0;
  int joint_count = 0;
  int test_count = 0;
  std::vector<SequenceSample> sequences;

  int total() const { return pretrain_count + joint_count + test_count; }
  const SequenceSample& pretrain(int i) const { return sequences[i]; }
  const SequenceSample& joint(int i) const {
    return sequences[pretrain_count + i];
  }
  const SequenceSample& test(int i) const {
    return sequences[pretrain_count + joint_count + i];
  }
};

// Per-sequence seeds derive from config.seed xor the sequence index.
Dataset generate_dataset(const SceneConfig& cfg, int pretrain_count,
                         int joint_count, int test_count);

// manifest.json + data.bin with per-item offsets. Byte-deterministic for a
// fixed config and seed.
void save_dataset(const Dataset& ds, const std::string& dir);
Dataset load_dataset(const std::string& dir);

// ---- tensor container (JSON header + little-endian float32 payload) ----

// All grids must share one shape; stored as [count, channels, h, w].
void write_tensor_container(const std::string& path,
                            const std::vector<RealGrid>& grids);
std::vector<RealGrid> read_tensor_container(const std::string& path);

// ---- IDX (big-endian, ubyte) ----

struct IdxTensor {
  std::vector<int> dims;
  std::vector<uint8_t> data;
};

IdxTensor read_idx(const std::string& path);

}  // namespace sempred

#endif  // SEMPRED_DATASET_HPP_
