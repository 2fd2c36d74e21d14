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

#include "sempred/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "json.hpp"
#include "sempred/errors.hpp"
#include "sempred/parallel.hpp"
#include "sempred/rng.hpp"

namespace sempred {

namespace {

using nlohmann::json;

constexpr double kMaxStepShift = 8.0;  // transport bound for the default tiling

// ---- little-endian byte helpers ----

void put_u32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

uint32_t get_u32(const std::string& in, size_t& pos) {
  if (pos + 4 > in.size()) throw TruncatedPayloadError("container: short u32");
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<uint32_t>(static_cast<uint8_t>(in[pos + i])) << (8 * i);
  }
  pos += 4;
  return v;
}

void put_f32(std::string& out, float v) {
  uint32_t bits;
  std::memcpy(&bits, &v, 4);
  put_u32(out, bits);
}

float get_f32(const std::string& in, size_t& pos) {
  const uint32_t bits = get_u32(in, pos);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

void put_f64(std::string& out, double v) {
  uint64_t bits;
  std::memcpy(&bits, &v, 8);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

double get_f64(const std::string& in, size_t& pos) {
  if (pos + 8 > in.size()) throw TruncatedPayloadError("container: short f64");
  uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) {
    bits |= static_cast<uint64_t>(static_cast<uint8_t>(in[pos + i])) << (8 * i);
  }
  pos += 8;
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  return bytes;
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

// ---- procedural glyphs ----

double smooth_cov(double signed_dist, double edge = 1.3) {
  const double t = std::clamp(0.5 - signed_dist / edge, 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

// Five smooth base shapes, filled for classes 0-4 and hollow for 5-9, each
// modulated by an oriented cosine carrier with a class-specific orientation,
// frequency, and phase. The carriers keep cross-class correlation low while
// staying band-limited enough for clean subpixel shifts.
double glyph_alpha(int class_id, double dy, double dx, double radius) {
  const int cls = class_id % 10;
  const double r = std::hypot(dx, dy);
  const double R = radius;
  double q;  // shape metric, compared against R
  switch (cls % 5) {
    case 0:
      q = r;
      break;
    case 1:
      q = std::max(std::abs(dx), std::abs(dy)) * 1.13;
      break;
    case 2:
      q = (std::abs(dx) + std::abs(dy)) * 0.80;
      break;
    case 3: {
      const double a = 0.866 * std::abs(dx) + 0.5 * dy;
      q = std::max({a * 1.35, -dy * 1.05, r * 0.82});
      break;
    }
    default: {  // four-lobe rosette
      const double ang = std::atan2(dy, dx);
      q = r / (0.75 + 0.25 * std::cos(4.0 * ang));
      break;
    }
  }
  const double d = cls < 5 ? q - R : std::max(q - R, 0.64 * R - q);
  const double cov = smooth_cov(d);
  if (cov <= 0.0) return 0.0;
  const double theta =
      std::numbers::pi * cls / 10.0 + std::numbers::pi / 20.0;
  const double freq = 0.26 + 0.014 * ((cls * 7) % 10);
  const double phase = 2.0 * std::numbers::pi * freq *
                           (std::cos(theta) * dx + std::sin(theta) * dy) +
                       2.399 * cls;
  const double tex = 0.15 + 0.425 * (1.0 + std::cos(phase));
  return cov * tex;
}

double bilinear(const RealGrid& g, double y, double x) {
  const int y0 = static_cast<int>(std::floor(y));
  const int x0 = static_cast<int>(std::floor(x));
  const double fy = y - y0, fx = x - x0;
  auto at = [&](int yy, int xx) {
    if (yy < 0 || yy >= g.height || xx < 0 || xx >= g.width) return 0.0;
    return g.at(yy, xx);
  };
  return (1 - fy) * ((1 - fx) * at(y0, x0) + fx * at(y0, x0 + 1)) +
         fy * ((1 - fx) * at(y0 + 1, x0) + fx * at(y0 + 1, x0 + 1));
}

}  // namespace

void SceneConfig::validate() const {
  if (canvas != 64 && canvas != 128) {
    throw DimensionError("SceneConfig: canvas must be 64 or 128");
  }
  if (num_objects < 1 || class_count < 1) {
    throw DimensionError("SceneConfig: need at least one object and class");
  }
  if (min_speed < 0.0 || max_speed < min_speed || max_speed > kMaxStepShift) {
    throw DimensionError("SceneConfig: speeds must satisfy 0 <= min <= max <= 8");
  }
  if (sequence_length < 1) {
    throw DimensionError("SceneConfig: sequence_length must be >= 1");
  }
  if (blob_sigma <= 0.0) {
    throw DimensionError("SceneConfig: blob_sigma must be positive");
  }
  if (glyph_size() >= canvas) {
    throw DimensionError("SceneConfig: glyph larger than canvas");
  }
}

std::string scene_config_to_json(const SceneConfig& cfg) {
  json j;
  j["canvas"] = cfg.canvas;
  j["num_objects"] = cfg.num_objects;
  j["class_count"] = cfg.class_count;
  j["min_speed"] = cfg.min_speed;
  j["max_speed"] = cfg.max_speed;
  j["glyph_source"] =
      cfg.glyph_source == GlyphSource::kProcedural ? "procedural" : "idx_file";
  j["idx_images"] = cfg.idx_images;
  j["idx_labels"] = cfg.idx_labels;
  j["bounce_at_walls"] = cfg.bounce_at_walls;
  j["sequence_length"] = cfg.sequence_length;
  j["blob_sigma"] = cfg.blob_sigma;
  j["seed"] = cfg.seed;
  return j.dump();
}

SceneConfig scene_config_from_json(const std::string& text) {
  const json j = json::parse(text);
  SceneConfig cfg;
  cfg.canvas = j.value("canvas", cfg.canvas);
  cfg.num_objects = j.value("num_objects", cfg.num_objects);
  cfg.class_count = j.value("class_count", cfg.class_count);
  cfg.min_speed = j.value("min_speed", cfg.min_speed);
  cfg.max_speed = j.value("max_speed", cfg.max_speed);
  if (j.value("glyph_source", std::string("procedural")) == "idx_file") {
    cfg.glyph_source = GlyphSource::kIdxFile;
  }
  cfg.idx_images = j.value("idx_images", cfg.idx_images);
  cfg.idx_labels = j.value("idx_labels", cfg.idx_labels);
  cfg.bounce_at_walls = j.value("bounce_at_walls", cfg.bounce_at_walls);
  cfg.sequence_length = j.value("sequence_length", cfg.sequence_length);
  cfg.blob_sigma = j.value("blob_sigma", cfg.blob_sigma);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.validate();
  return cfg;
}

GlyphLibrary GlyphLibrary::procedural(int glyph_size, int class_count) {
  GlyphLibrary lib;
  lib.size_ = glyph_size;
  lib.class_count_ = class_count;
  lib.procedural_ = true;
  return lib;
}

GlyphLibrary GlyphLibrary::from_idx(const std::string& images,
                                    const std::string& labels, int glyph_size,
                                    int class_count) {
  const IdxTensor img = read_idx(images);
  const IdxTensor lab = read_idx(labels);
  if (img.dims.size() != 3) {
    throw DimensionError("GlyphLibrary: IDX image tensor must be 3D");
  }
  if (lab.dims.size() != 1 || lab.dims[0] != img.dims[0]) {
    throw DimensionError("GlyphLibrary: IDX label count mismatch");
  }
  const int n = img.dims[0], ih = img.dims[1], iw = img.dims[2];

  GlyphLibrary lib;
  lib.size_ = glyph_size;
  lib.class_count_ = class_count;
  lib.procedural_ = false;
  lib.idx_stamps_.resize(class_count);
  for (int i = 0; i < n; ++i) {
    const int label = lab.data[i];
    if (label >= class_count) continue;
    RealGrid stamp(glyph_size, glyph_size, 1, 0.0);
    // Bilinear resize from the source raster.
    RealGrid src(ih, iw, 1);
    for (int p = 0; p < ih * iw; ++p) {
      src.data[p] = img.data[static_cast<size_t>(i) * ih * iw + p] / 255.0;
    }
    for (int y = 0; y < glyph_size; ++y) {
      for (int x = 0; x < glyph_size; ++x) {
        const double sy = (y + 0.5) * ih / glyph_size - 0.5;
        const double sx = (x + 0.5) * iw / glyph_size - 0.5;
        stamp.at(y, x) = bilinear(src, sy, sx);
      }
    }
    lib.idx_stamps_[label].push_back(std::move(stamp));
  }
  return lib;
}

double GlyphLibrary::sample(int class_id, uint32_t variant, double dy,
                            double dx) const {
  if (procedural_) {
    return glyph_alpha(class_id, dy, dx, size_ / 2.0 - 1.2);
  }
  const auto& stamps = idx_stamps_[class_id];
  if (stamps.empty()) return 0.0;
  const RealGrid& s = stamps[variant % stamps.size()];
  const double c = (size_ - 1) / 2.0;
  return bilinear(s, dy + c, dx + c);
}

int GlyphLibrary::variants(int class_id) const {
  if (procedural_) return 1;
  return std::max<int>(1, static_cast<int>(idx_stamps_[class_id].size()));
}

RealGrid GlyphLibrary::stamp(int class_id) const {
  RealGrid out(size_, size_, 1, 0.0);
  const double c = (size_ - 1) / 2.0;
  for (int y = 0; y < size_; ++y) {
    for (int x = 0; x < size_; ++x) {
      out.at(y, x) = sample(class_id, 0, y - c, x - c);
    }
  }
  return out;
}

SequenceSample generate_sequence(const SceneConfig& cfg) {
  return generate_sequence(cfg, cfg.seed);
}

SequenceSample generate_sequence(const SceneConfig& cfg, uint64_t seed) {
  cfg.validate();
  Rng rng(seed);
  const double margin = cfg.glyph_size() / 2.0 + 2.0;
  const double lo = margin;
  const double hi = cfg.canvas - 1.0 - margin;

  // Distinct classes while they last, uniform afterwards.
  std::vector<int> classes(cfg.class_count);
  for (int i = 0; i < cfg.class_count; ++i) classes[i] = i;
  rng.shuffle(classes);

  SequenceSample seq;
  seq.length = cfg.sequence_length;
  for (int i = 0; i < cfg.num_objects; ++i) {
    ObjectTrack obj;
    obj.class_id = i < cfg.class_count
                       ? classes[i]
                       : static_cast<int>(rng.uniform_index(cfg.class_count));
    obj.variant = static_cast<uint32_t>(rng.next_u64() & 0xffffffffu);
    double x = rng.uniform(lo, hi);
    double y = rng.uniform(lo, hi);
    const double speed = rng.uniform(cfg.min_speed, cfg.max_speed);
    const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
    double vx = speed * std::cos(angle);
    double vy = speed * std::sin(angle);

    for (int t = 0; t < cfg.sequence_length; ++t) {
      obj.x.push_back(x);
      obj.y.push_back(y);
      x += vx;
      y += vy;
      if (cfg.bounce_at_walls) {
        while (x < lo || x > hi) {
          if (x < lo) x = 2.0 * lo - x;
          if (x > hi) x = 2.0 * hi - x;
          vx = -vx;
        }
        while (y < lo || y > hi) {
          if (y < lo) y = 2.0 * lo - y;
          if (y > hi) y = 2.0 * hi - y;
          vy = -vy;
        }
      }
    }
    seq.objects.push_back(std::move(obj));
  }
  return seq;
}

RealGrid render_frame(const SceneConfig& cfg, const GlyphLibrary& glyphs,
                      const SequenceSample& seq, int t) {
  RealGrid frame(cfg.canvas, cfg.canvas, 1, 0.0);
  const int reach = glyphs.size() / 2 + 2;
  for (const auto& obj : seq.objects) {
    const double cy = obj.y[t], cx = obj.x[t];
    const int y0 = std::max(0, static_cast<int>(std::floor(cy)) - reach);
    const int y1 = std::min(cfg.canvas - 1, static_cast<int>(std::ceil(cy)) + reach);
    const int x0 = std::max(0, static_cast<int>(std::floor(cx)) - reach);
    const int x1 = std::min(cfg.canvas - 1, static_cast<int>(std::ceil(cx)) + reach);
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        frame.at(y, x) += glyphs.sample(obj.class_id, obj.variant, y - cy, x - cx);
      }
    }
  }
  for (double& v : frame.data) v = std::min(v, 1.0);
  return frame;
}

RealGrid render_maps(const SceneConfig& cfg, const SequenceSample& seq, int t) {
  RealGrid maps(cfg.canvas, cfg.canvas, cfg.class_count, 0.0);
  const double sigma = cfg.blob_sigma;
  const int reach = static_cast<int>(std::ceil(6.0 * sigma));
  for (const auto& obj : seq.objects) {
    const double cy = obj.y[t], cx = obj.x[t];
    const int y0 = std::max(0, static_cast<int>(std::floor(cy)) - reach);
    const int y1 = std::min(cfg.canvas - 1, static_cast<int>(std::ceil(cy)) + reach);
    const int x0 = std::max(0, static_cast<int>(std::floor(cx)) - reach);
    const int x1 = std::min(cfg.canvas - 1, static_cast<int>(std::ceil(cx)) + reach);
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const double r2 = (y - cy) * (y - cy) + (x - cx) * (x - cx);
        maps.at(y, x, obj.class_id) += std::exp(-r2 / (2.0 * sigma * sigma));
      }
    }
  }
  return maps;
}

std::vector<RealGrid> render_frames(const SceneConfig& cfg,
                                    const GlyphLibrary& glyphs,
                                    const SequenceSample& seq) {
  std::vector<RealGrid> out;
  out.reserve(seq.length);
  for (int t = 0; t < seq.length; ++t) out.push_back(render_frame(cfg, glyphs, seq, t));
  return out;
}

std::vector<RealGrid> render_all_maps(const SceneConfig& cfg,
                                      const SequenceSample& seq) {
  std::vector<RealGrid> out;
  out.reserve(seq.length);
  for (int t = 0; t < seq.length; ++t) out.push_back(render_maps(cfg, seq, t));
  return out;
}

std::vector<RealGrid> class_templates(const SceneConfig& cfg,
                                      const GlyphLibrary& glyphs) {
  std::vector<RealGrid> out;
  out.reserve(cfg.class_count);
  for (int c = 0; c < cfg.class_count; ++c) out.push_back(glyphs.stamp(c));
  return out;
}

Dataset generate_dataset(const SceneConfig& cfg, int pretrain_count,
                         int joint_count, int test_count) {
  cfg.validate();
  Dataset ds;
  ds.config = cfg;
  ds.pretrain_count = pretrain_count;
  ds.joint_count = joint_count;
  ds.test_count = test_count;
  ds.sequences.resize(ds.total());
  parallel_for(ds.total(), [&](int i) {
    ds.sequences[i] = generate_sequence(cfg, derive_seed(cfg.seed, i));
  });
  return ds;
}

namespace {

std::string pack_sequence(const SequenceSample& seq) {
  json header;
  header["length"] = seq.length;
  std::vector<int> classes;
  std::vector<uint32_t> variants;
  for (const auto& o : seq.objects) {
    classes.push_back(o.class_id);
    variants.push_back(o.variant);
  }
  header["classes"] = classes;
  header["variants"] = variants;
  const std::string htext = header.dump();

  std::string out;
  put_u32(out, static_cast<uint32_t>(htext.size()));
  out += htext;
  for (const auto& o : seq.objects) {
    for (int t = 0; t < seq.length; ++t) {
      put_f64(out, o.x[t]);
      put_f64(out, o.y[t]);
    }
  }
  return out;
}

SequenceSample unpack_sequence(const std::string& bytes) {
  size_t pos = 0;
  const uint32_t hlen = get_u32(bytes, pos);
  if (pos + hlen > bytes.size()) {
    throw TruncatedPayloadError("dataset record: short header");
  }
  const json header = json::parse(bytes.substr(pos, hlen));
  pos += hlen;
  SequenceSample seq;
  seq.length = header.at("length").get<int>();
  const auto classes = header.at("classes").get<std::vector<int>>();
  const auto variants = header.at("variants").get<std::vector<uint32_t>>();
  for (size_t i = 0; i < classes.size(); ++i) {
    ObjectTrack o;
    o.class_id = classes[i];
    o.variant = variants[i];
    for (int t = 0; t < seq.length; ++t) {
      o.x.push_back(get_f64(bytes, pos));
      o.y.push_back(get_f64(bytes, pos));
    }
    seq.objects.push_back(std::move(o));
  }
  return seq;
}

}  // namespace

void save_dataset(const Dataset& ds, const std::string& dir) {
  std::filesystem::create_directories(dir);
  std::string data;
  json items = json::array();
  for (const auto& seq : ds.sequences) {
    const std::string rec = pack_sequence(seq);
    items.push_back({{"offset", data.size()}, {"length", rec.size()}});
    data += rec;
  }
  write_file(dir + "/data.bin", data);

  json manifest;
  manifest["version"] = 1;
  manifest["config"] = json::parse(scene_config_to_json(ds.config));
  manifest["splits"] = {{"pretrain", ds.pretrain_count},
                        {"joint", ds.joint_count},
                        {"test", ds.test_count}};
  manifest["items"] = items;
  write_file(dir + "/manifest.json", manifest.dump(2) + "\n");
}

Dataset load_dataset(const std::string& dir) {
  const json manifest = json::parse(read_file(dir + "/manifest.json"));
  if (manifest.at("version").get<int>() != 1) {
    throw VersionMismatchError("dataset manifest: unsupported version");
  }
  Dataset ds;
  ds.config = scene_config_from_json(manifest.at("config").dump());
  ds.pretrain_count = manifest.at("splits").at("pretrain").get<int>();
  ds.joint_count = manifest.at("splits").at("joint").get<int>();
  ds.test_count = manifest.at("splits").at("test").get<int>();
  const std::string data = read_file(dir + "/data.bin");
  for (const auto& item : manifest.at("items")) {
    const size_t offset = item.at("offset").get<size_t>();
    const size_t length = item.at("length").get<size_t>();
    if (offset + length > data.size()) {
      throw TruncatedPayloadError("dataset: item extends past data.bin");
    }
    ds.sequences.push_back(unpack_sequence(data.substr(offset, length)));
  }
  if (static_cast<int>(ds.sequences.size()) != ds.total()) {
    throw TruncatedPayloadError("dataset: item count does not match splits");
  }
  return ds;
}

void write_tensor_container(const std::string& path,
                            const std::vector<RealGrid>& grids) {
  if (grids.empty()) {
    throw DimensionError("write_tensor_container: no grids");
  }
  for (const auto& g : grids) {
    if (g.height != grids[0].height || g.width != grids[0].width ||
        g.channels != grids[0].channels) {
      throw DimensionError("write_tensor_container: mixed shapes");
    }
  }
  json header;
  header["version"] = 1;
  header["dtype"] = "float32";
  header["shape"] = {static_cast<int>(grids.size()), grids[0].channels,
                     grids[0].height, grids[0].width};
  const std::string htext = header.dump();

  std::string out;
  put_u32(out, static_cast<uint32_t>(htext.size()));
  out += htext;
  for (const auto& g : grids) {
    for (double v : g.data) put_f32(out, static_cast<float>(v));
  }
  write_file(path, out);
}

std::vector<RealGrid> read_tensor_container(const std::string& path) {
  const std::string bytes = read_file(path);
  size_t pos = 0;
  const uint32_t hlen = get_u32(bytes, pos);
  if (pos + hlen > bytes.size()) {
    throw TruncatedPayloadError("tensor container: short header");
  }
  const json header = json::parse(bytes.substr(pos, hlen));
  pos += hlen;
  if (header.at("version").get<int>() != 1) {
    throw VersionMismatchError("tensor container: unsupported version " +
                               std::to_string(header.at("version").get<int>()));
  }
  if (header.at("dtype").get<std::string>() != "float32") {
    throw VersionMismatchError("tensor container: unsupported dtype");
  }
  const auto shape = header.at("shape").get<std::vector<int>>();
  if (shape.size() != 4) {
    throw DimensionError("tensor container: shape must be 4D");
  }
  const size_t expect = static_cast<size_t>(shape[0]) * shape[1] * shape[2] *
                        shape[3] * 4;
  if (bytes.size() - pos < expect) {
    throw TruncatedPayloadError("tensor container: payload short by " +
                                std::to_string(expect - (bytes.size() - pos)) +
                                " bytes");
  }
  std::vector<RealGrid> grids;
  for (int i = 0; i < shape[0]; ++i) {
    RealGrid g(shape[2], shape[3], shape[1]);
    for (double& v : g.data) v = get_f32(bytes, pos);
    grids.push_back(std::move(g));
  }
  return grids;
}

IdxTensor read_idx(const std::string& path) {
  const std::string bytes = read_file(path);
  if (bytes.size() < 4) throw IdxMagicError("idx: file shorter than magic");
  const uint8_t b0 = bytes[0], b1 = bytes[1], dtype = bytes[2],
                ndim = bytes[3];
  if (b0 != 0 || b1 != 0 || dtype != 0x08) {
    throw IdxMagicError("idx: bad magic number in " + path);
  }
  size_t pos = 4;
  IdxTensor t;
  size_t total = 1;
  for (int d = 0; d < ndim; ++d) {
    if (pos + 4 > bytes.size()) throw TruncatedPayloadError("idx: short dims");
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v = (v << 8) | static_cast<uint8_t>(bytes[pos + i]);  // big-endian
    }
    pos += 4;
    t.dims.push_back(static_cast<int>(v));
    total *= v;
  }
  if (bytes.size() - pos < total) {
    throw TruncatedPayloadError("idx: payload short by " +
                                std::to_string(total - (bytes.size() - pos)) +
                                " bytes");
  }
  t.data.assign(bytes.begin() + pos, bytes.begin() + pos + total);
  return t;
}

}  // namespace sempred
