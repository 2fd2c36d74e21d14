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

#ifndef SEMPRED_PIPELINE_HPP_
#define SEMPRED_PIPELINE_HPP_

#include <optional>
#include <string>
#include <vector>

#include "sempred/dataset.hpp"
#include "sempred/lft.hpp"
#include "sempred/semantics.hpp"
#include "sempred/transport.hpp"

namespace sempred {

enum class PipelineOrder { kSemPred, kPredSem };
enum class ExtractorKind { kMatched, kLearned };

struct PipelineConfig {
  PipelineOrder order = PipelineOrder::kSemPred;
  int seed_frames = 2;
  int predict_steps = 3;
  LftConfig lft;
  TransportConfig transport;
  ExtractorKind extractor = ExtractorKind::kLearned;
  // Transport weights are shared across all class channels; required for the
  // parameter-budget fairness between the two orders.
  bool share_weights_across_channels = true;

  void validate() const;
};

std::string pipeline_config_to_json(const PipelineConfig& cfg);

struct PipelineWeights {
  ExtractorParams extractor;
  ConvFilterParams transport_sem;  // predicts blob channels
  ConvFilterParams transport_pix;  // predicts signal frames
  std::vector<RealGrid> templates;  // matched extractor
  MatchOptions match;
};

// Both orders use the same extractor plus one transport of the shared
// architecture, so their trainable budgets must agree within 1%.
void check_parameter_budget(const PipelineWeights& weights);

struct RolloutTrace {
  // Per predicted step: the transported field of channel 0 (pixel level for
  // Pred_Sem) and, for Pred_Sem, the intermediate frame predictions.
  std::vector<VectorField> fields;
  std::vector<RealGrid> predicted_frames;
  TileLayout layout;
};

// Closed-loop LFDTN on a stack of aligned channel planes: each prediction
// feeds the next phase difference. seeds holds seed_frames multi-channel
// grids (oldest first); transport weights are shared across channels.
std::vector<RealGrid> lfdtn_rollout(const std::vector<RealGrid>& seeds,
                                    int steps, const LftConfig& lft_cfg,
                                    const TransportConfig& transport_cfg,
                                    const ConvFilterParams* learned,
                                    RolloutTrace* trace = nullptr);

// Extract semantics on the seed frames, then predict the blob channels.
std::vector<SemanticMap> run_sem_pred(const std::vector<RealGrid>& frames,
                                      const PipelineConfig& cfg,
                                      const PipelineWeights& weights,
                                      RolloutTrace* trace = nullptr);

// Predict the signal frames, then extract semantics per predicted frame.
std::vector<SemanticMap> run_pred_sem(const std::vector<RealGrid>& frames,
                                      const PipelineConfig& cfg,
                                      const PipelineWeights& weights,
                                      RolloutTrace* trace = nullptr);

// ---- evaluation ----

struct SequenceMetrics {
  int seq_index = -1;
  double l1 = 0.0;
  double mse = 0.0;
  double dssim = 0.0;
  double blob_err = 0.0;  // mean px distance of blob centroids to the truth
};

struct EvalSummary {
  std::vector<SequenceMetrics> per_sequence;
  SequenceMetrics aggregate;
};

// Runs the configured order over the test split and scores the predicted
// maps against the generator ground truth. Parallel over sequences with a
// deterministic merge.
EvalSummary evaluate(const Dataset& ds, const PipelineConfig& cfg,
                     const PipelineWeights& weights);

}  // namespace sempred

#endif  // SEMPRED_PIPELINE_HPP_
