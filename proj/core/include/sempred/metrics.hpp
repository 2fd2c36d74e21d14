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

#ifndef SEMPRED_METRICS_HPP_
#define SEMPRED_METRICS_HPP_

#include "sempred/grid.hpp"

namespace sempred {

// Mean absolute difference over all pixels and channels.
double metric_l1(const RealGrid& pred, const RealGrid& truth);

// Mean squared difference.
double metric_mse(const RealGrid& pred, const RealGrid& truth);

// Mean SSIM over the region where the full 11x11 Gaussian window (sigma 1.5)
// fits, averaged over channels; C1 = (0.01 L)^2, C2 = (0.03 L)^2 with L = 1.
double ssim(const RealGrid& a, const RealGrid& b);

// Structural dissimilarity (1 - ssim) / 2, in [0, 1].
double metric_dssim(const RealGrid& pred, const RealGrid& truth);

}  // namespace sempred

#endif  // SEMPRED_METRICS_HPP_
