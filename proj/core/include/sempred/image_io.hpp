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

#ifndef SEMPRED_IMAGE_IO_HPP_
#define SEMPRED_IMAGE_IO_HPP_

#include <string>

#include "sempred/grid.hpp"
#include "sempred/phase_motion.hpp"

namespace sempred {

// Binary PGM (P5), values clamped to [0,1] and scaled to 0..255.
void write_pgm(const std::string& path, const RealGrid& image, int channel = 0);

// Upscaled grayscale render of a frame with per-tile motion arrows drawn on
// top, one arrow per lattice site from the tile center along (dx, dy).
RealGrid field_overlay(const RealGrid& frame, const VectorField& field,
                       const TileLayout& layout, int upscale = 4,
                       double arrow_gain = 3.0);

}  // namespace sempred

#endif  // SEMPRED_IMAGE_IO_HPP_
