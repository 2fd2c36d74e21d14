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

#ifndef SEMPRED_SEMANTICS_HPP_
#define SEMPRED_SEMANTICS_HPP_

#include <vector>

#include "sempred/autodiff.hpp"
#include "sempred/grid.hpp"
#include "sempred/transport.hpp"

namespace sempred {

// K channels of unnormalized activity, one Gaussian blob per detected
// object, peak 1 at the object center. No per-pixel normalization: blobs
// from overlapping objects simply add.
using SemanticMap = RealGrid;

struct MatchOptions {
  int max_per_class = 2;   // detections kept per class
  double threshold = 0.5;  // normalized cross-correlation acceptance
  double blob_sigma = 2.0;
};

// Deterministic extractor: normalized cross-correlation against each class
// template, subpixel-refined top-k peaks, Gaussian blobs rendered at the
// accepted peaks.
SemanticMap extract_matched(const RealGrid& frame,
                            const std::vector<RealGrid>& templates,
                            const MatchOptions& options);

// Small encoder-decoder: two stride-2 stages down, one skip connection on
// the way up, linear head, trained on the unnormalized responses with MSE.
// Layers are stored flat in ConvFilterParams layout; the structural wiring
// (downsampling, upsampling, skip concat) is fixed by position.
struct ExtractorParams {
  std::vector<ConvLayerDesc> layers;
  std::vector<double> values;

  int param_count() const;
  int class_count() const { return layers.empty() ? 0 : layers.back().out_c; }
  int downsample_factor() const { return 4; }
  void validate() const;

  static ExtractorParams make(int class_count);
  void zero_init();
  void randomize(uint64_t seed, double gain = 1.0);
};

struct ExtractorBinding {
  std::vector<Var> slots;
};

ExtractorBinding bind_extractor_params(GradientTape& tape,
                                       const ExtractorParams& params);

// Frame variable [1,H,W] -> semantic map variable [K,H,W]; H and W must be
// divisible by the downsample factor.
Var extractor_graph(GradientTape& tape, const ExtractorParams& params,
                    const ExtractorBinding& binding, Var frame);

struct LearnedExtraction {
  SemanticMap map;
  GradientTape tape;  // terminal = the map variable
  Var map_var;
};

LearnedExtraction extract_learned(const RealGrid& frame,
                                  const ExtractorParams& params);

// Forward pass only.
SemanticMap extract_infer(const RealGrid& frame, const ExtractorParams& params);

struct Blob {
  double x = 0.0;
  double y = 0.0;
  double mass = 0.0;
};

// Components above 0.3 * channel max (8-connected), intensity-weighted
// centroids, heaviest first. An all-zero channel yields an empty list.
std::vector<Blob> blob_centroid(const SemanticMap& map, int class_id);

}  // namespace sempred

#endif  // SEMPRED_SEMANTICS_HPP_
