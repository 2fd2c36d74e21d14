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

#ifndef SEMPRED_TRAINING_HPP_
#define SEMPRED_TRAINING_HPP_

#include <cstdint>
#include <vector>

#include "sempred/dataset.hpp"
#include "sempred/pipeline.hpp"

namespace sempred {

struct TrainOptions {
  int epochs = 4;
  double lr = 0.01;
  double momentum = 0.9;
  double grad_clip = 10.0;  // global gradient norm cap
  uint64_t seed = 1;
  int extractor_crop = 32;  // training crop side for the extractor
  int min_updates = 25;     // floor for tiny fine-tuning fractions
};

// Plain SGD with momentum; updates are single-threaded and deterministic.
class SgdOptimizer {
 public:
  SgdOptimizer(double lr, double momentum, size_t n)
      : lr_(lr), momentum_(momentum), velocity_(n, 0.0) {}

  void step(std::vector<double>& params, const std::vector<double>& grad,
            double clip);

 private:
  double lr_;
  double momentum_;
  std::vector<double> velocity_;
};

// Supervised single-frame pretraining against the generator blob maps,
// on random content-biased crops of the pretrain split.
void pretrain_extractor(const Dataset& ds, ExtractorParams& params,
                        const TrainOptions& opts);

enum class TransportLevel { kBlobs, kPixels };

// Transport pretraining through the full prediction pipeline: on ground
// truth blob channels (the Sem_Pred transport) or on raw frames (Pred_Sem).
void pretrain_transport(const Dataset& ds, ConvFilterParams& params,
                        const LftConfig& lft_cfg, TransportLevel level,
                        const TrainOptions& opts);

struct FinetuneSpec {
  double fraction = 0.0;     // share of the joint split: {0,.01,.05,.1,.2,1}
  bool from_scratch = false; // random start, full joint split
};

bool valid_fraction(double fraction);

// Joint end-to-end refinement of extractor plus the order's transport
// against ground-truth future semantic maps. Fraction 0 returns the input
// weights untouched.
PipelineWeights finetune(const PipelineConfig& cfg,
                         const PipelineWeights& start, const FinetuneSpec& spec,
                         const Dataset& ds, const TrainOptions& opts);

// One joint-loss evaluation (no update); used by the trainers and tests.
double joint_loss(const PipelineConfig& cfg, const PipelineWeights& weights,
                  const Dataset& ds, int joint_index);

}  // namespace sempred

#endif  // SEMPRED_TRAINING_HPP_
