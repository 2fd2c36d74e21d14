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

#include "sempred/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "sempred/errors.hpp"

namespace sempred {

void write_pgm(const std::string& path, const RealGrid& image, int channel) {
  if (channel < 0 || channel >= image.channels) {
    throw DimensionError("write_pgm: channel out of range");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("write_pgm: cannot open " + path);
  out << "P5\n" << image.width << " " << image.height << "\n255\n";
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      const double v = std::clamp(image.at(y, x, channel), 0.0, 1.0);
      out.put(static_cast<char>(std::lround(v * 255.0)));
    }
  }
}

namespace {

void draw_line(RealGrid& img, double y0, double x0, double y1, double x1,
               double value) {
  const int steps =
      std::max(1, static_cast<int>(std::ceil(std::max(std::abs(y1 - y0),
                                                      std::abs(x1 - x0)))));
  for (int i = 0; i <= steps; ++i) {
    const double t = static_cast<double>(i) / steps;
    const int y = static_cast<int>(std::lround(y0 + t * (y1 - y0)));
    const int x = static_cast<int>(std::lround(x0 + t * (x1 - x0)));
    if (y >= 0 && y < img.height && x >= 0 && x < img.width) {
      img.at(y, x) = value;
    }
  }
}

}  // namespace

RealGrid field_overlay(const RealGrid& frame, const VectorField& field,
                       const TileLayout& layout, int upscale,
                       double arrow_gain) {
  if (field.rows_u != layout.rows_u || field.cols_v != layout.cols_v) {
    throw LatticeMismatchError("field_overlay: lattice mismatch");
  }
  RealGrid canvas(frame.height * upscale, frame.width * upscale, 1, 0.0);
  for (int y = 0; y < canvas.height; ++y) {
    for (int x = 0; x < canvas.width; ++x) {
      canvas.at(y, x) = 0.55 * frame.at(y / upscale, x / upscale, 0);
    }
  }
  for (int u = 0; u < layout.rows_u; ++u) {
    for (int v = 0; v < layout.cols_v; ++v) {
      const int t = field.index(u, v);
      const double cy = (layout.window_origin_y(u) + layout.window / 2.0) * upscale;
      const double cx = (layout.window_origin_x(v) + layout.window / 2.0) * upscale;
      if (cy < 0 || cy >= canvas.height || cx < 0 || cx >= canvas.width) continue;
      const double ty = cy + field.dy[t] * arrow_gain * upscale / 2.0;
      const double tx = cx + field.dx[t] * arrow_gain * upscale / 2.0;
      draw_line(canvas, cy, cx, ty, tx, 1.0);
      // Arrowhead: a brighter dot at the tip.
      const int hy = static_cast<int>(std::lround(ty));
      const int hx = static_cast<int>(std::lround(tx));
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int py = hy + dy, px = hx + dx;
          if (py >= 0 && py < canvas.height && px >= 0 && px < canvas.width) {
            canvas.at(py, px) = 1.0;
          }
        }
      }
    }
  }
  return canvas;
}

}  // namespace sempred
