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
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "sempred/dataset.hpp"
#include "sempred/errors.hpp"
#include "sempred/rng.hpp"
#include "sempred/semantics.hpp"

using namespace sempred;

namespace {

std::string temp_dir(const char* tag) {
  const auto dir = std::filesystem::temp_directory_path() /
                   (std::string("sempred_test_") + tag);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

}  // namespace

TEST_SUITE("dataset") {
  TEST_CASE("constant speed without bounce moves linearly") {
    SceneConfig cfg;
    cfg.num_objects = 1;
    cfg.min_speed = 1.0;
    cfg.max_speed = 1.0;
    cfg.bounce_at_walls = false;
    cfg.sequence_length = 5;
    const SequenceSample seq = generate_sequence(cfg, 42);
    const auto& obj = seq.objects[0];
    const double dx = obj.x[1] - obj.x[0];
    const double dy = obj.y[1] - obj.y[0];
    CHECK(std::abs(std::hypot(dx, dy) - 1.0) < 1e-12);
    for (int t = 1; t < 4; ++t) {
      CHECK(obj.x[t + 1] - obj.x[t] == doctest::Approx(dx).epsilon(1e-12));
      CHECK(obj.y[t + 1] - obj.y[t] == doctest::Approx(dy).epsilon(1e-12));
    }
  }

  TEST_CASE("bounce keeps objects inside the wall margins") {
    SceneConfig cfg;
    cfg.num_objects = 3;
    cfg.min_speed = 2.0;
    cfg.max_speed = 2.5;
    cfg.sequence_length = 40;
    const SequenceSample seq = generate_sequence(cfg, 7);
    const double margin = cfg.glyph_size() / 2.0 + 2.0;
    for (const auto& obj : seq.objects) {
      for (int t = 0; t < seq.length; ++t) {
        CHECK(obj.x[t] >= margin - 1e-9);
        CHECK(obj.x[t] <= cfg.canvas - 1.0 - margin + 1e-9);
        CHECK(obj.y[t] >= margin - 1e-9);
        CHECK(obj.y[t] <= cfg.canvas - 1.0 - margin + 1e-9);
      }
    }
  }

  TEST_CASE("blob channel peaks at 1 on integer centers") {
    SceneConfig cfg;
    cfg.class_count = 4;
    SequenceSample seq;
    seq.length = 1;
    ObjectTrack obj;
    obj.class_id = 2;
    obj.x = {30.0};
    obj.y = {20.0};
    seq.objects.push_back(obj);
    const RealGrid maps = render_maps(cfg, seq, 0);
    CHECK(maps.at(20, 30, 2) == doctest::Approx(1.0).epsilon(1e-6));
    // The other channels stay empty.
    for (int c = 0; c < 4; ++c) {
      if (c == 2) continue;
      for (double v :
           std::vector<double>{maps.at(20, 30, c), maps.at(10, 10, c)}) {
        CHECK(v == 0.0);
      }
    }
  }

  TEST_CASE("two same-class blobs recover their trajectories") {
    SceneConfig cfg;
    cfg.class_count = 3;
    SequenceSample seq;
    seq.length = 1;
    for (const auto& [y, x] : {std::pair{18.25, 14.5}, std::pair{44.75, 47.0}}) {
      ObjectTrack obj;
      obj.class_id = 1;
      obj.x = {x};
      obj.y = {y};
      seq.objects.push_back(obj);
    }
    const RealGrid maps = render_maps(cfg, seq, 0);
    const auto blobs = blob_centroid(maps, 1);
    REQUIRE(blobs.size() == 2);
    for (const auto& obj : seq.objects) {
      double best = 1e9;
      for (const auto& blob : blobs) {
        best = std::min(best, std::hypot(blob.x - obj.x[0], blob.y - obj.y[0]));
      }
      CHECK(best < 0.1);
    }
  }

  TEST_CASE("ground-truth consistency on generated sequences") {
    SceneConfig cfg;
    cfg.class_count = 4;
    cfg.num_objects = 2;
    cfg.sequence_length = 4;
    const SequenceSample seq = generate_sequence(cfg, 99);
    for (int t = 0; t < seq.length; ++t) {
      const RealGrid maps = render_maps(cfg, seq, t);
      for (const auto& obj : seq.objects) {
        const auto blobs = blob_centroid(maps, obj.class_id);
        REQUIRE(!blobs.empty());
        double best = 1e9;
        for (const auto& blob : blobs) {
          best = std::min(best,
                          std::hypot(blob.x - obj.x[t], blob.y - obj.y[t]));
        }
        CHECK(best < 0.1);
      }
    }
  }

  TEST_CASE("generator determinism produces identical dataset files") {
    SceneConfig cfg;
    cfg.class_count = 3;
    cfg.seed = 2024;
    const Dataset a = generate_dataset(cfg, 2, 2, 2);
    const Dataset b = generate_dataset(cfg, 2, 2, 2);
    const std::string da = temp_dir("ds_a"), db = temp_dir("ds_b");
    save_dataset(a, da);
    save_dataset(b, db);
    CHECK(slurp(da + "/data.bin") == slurp(db + "/data.bin"));
    CHECK(slurp(da + "/manifest.json") == slurp(db + "/manifest.json"));
  }

  TEST_CASE("dataset save-load round trip") {
    SceneConfig cfg;
    cfg.class_count = 3;
    cfg.seed = 5;
    const Dataset ds = generate_dataset(cfg, 1, 1, 1);
    const std::string dir = temp_dir("ds_rt");
    save_dataset(ds, dir);
    const Dataset back = load_dataset(dir);
    REQUIRE(back.sequences.size() == ds.sequences.size());
    CHECK(back.pretrain_count == 1);
    CHECK(back.test_count == 1);
    for (size_t i = 0; i < ds.sequences.size(); ++i) {
      REQUIRE(back.sequences[i].objects.size() == ds.sequences[i].objects.size());
      for (size_t o = 0; o < ds.sequences[i].objects.size(); ++o) {
        CHECK(back.sequences[i].objects[o].class_id ==
              ds.sequences[i].objects[o].class_id);
        CHECK(back.sequences[i].objects[o].x == ds.sequences[i].objects[o].x);
        CHECK(back.sequences[i].objects[o].y == ds.sequences[i].objects[o].y);
      }
    }
  }

  TEST_CASE("tensor container round trip is bit exact") {
    Rng rng(1);
    std::vector<RealGrid> grids;
    for (int i = 0; i < 10; ++i) {
      RealGrid g(32, 32, 1);
      // float32-representable values so the container dtype is lossless
      for (double& v : g.data) v = static_cast<float>(rng.uniform());
      grids.push_back(std::move(g));
    }
    const std::string dir = temp_dir("container");
    write_tensor_container(dir + "/t.bin", grids);
    const std::vector<RealGrid> back = read_tensor_container(dir + "/t.bin");
    REQUIRE(back.size() == grids.size());
    for (size_t i = 0; i < grids.size(); ++i) {
      CHECK(back[i].data == grids[i].data);
    }
    write_tensor_container(dir + "/t2.bin", back);
    CHECK(slurp(dir + "/t.bin") == slurp(dir + "/t2.bin"));
  }

  TEST_CASE("tensor container version mismatch is detected") {
    const std::string dir = temp_dir("container_bad");
    const std::string header = R"({"version":9,"dtype":"float32","shape":[1,1,1,1]})";
    std::string bytes;
    const uint32_t hlen = static_cast<uint32_t>(header.size());
    for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<char>((hlen >> (8 * i)) & 0xff));
    bytes += header;
    bytes += std::string(4, '\0');
    std::ofstream(dir + "/bad.bin", std::ios::binary) << bytes;
    CHECK_THROWS_AS(read_tensor_container(dir + "/bad.bin"),
                    VersionMismatchError);
  }

  TEST_CASE("idx fixture parses bit-exactly") {
    // Hand-built IDX: magic 0x00000803, dims 2x4x4, payload 0..31.
    std::string bytes;
    bytes += '\0';
    bytes += '\0';
    bytes += static_cast<char>(0x08);
    bytes += static_cast<char>(0x03);
    for (uint32_t dim : {2u, 4u, 4u}) {
      for (int i = 3; i >= 0; --i) bytes += static_cast<char>((dim >> (8 * i)) & 0xff);
    }
    for (int i = 0; i < 32; ++i) bytes += static_cast<char>(i);
    const std::string dir = temp_dir("idx");
    std::ofstream(dir + "/fixture.idx", std::ios::binary) << bytes;

    const IdxTensor t = read_idx(dir + "/fixture.idx");
    REQUIRE(t.dims == std::vector<int>{2, 4, 4});
    for (int i = 0; i < 32; ++i) CHECK(t.data[i] == i);

    // Wrong magic.
    std::string bad = bytes;
    bad[2] = 0x07;
    std::ofstream(dir + "/bad.idx", std::ios::binary) << bad;
    CHECK_THROWS_AS(read_idx(dir + "/bad.idx"), IdxMagicError);

    // Truncated payload.
    std::ofstream(dir + "/short.idx", std::ios::binary)
        << bytes.substr(0, bytes.size() - 4);
    CHECK_THROWS_AS(read_idx(dir + "/short.idx"), TruncatedPayloadError);
  }

  TEST_CASE("idx glyph library renders moving digits") {
    // Synthetic 6-image IDX pair: one 8x8 "digit" per class 0..2, twice.
    std::string imgs, labs;
    auto be32 = [](std::string& out, uint32_t v) {
      for (int i = 3; i >= 0; --i) out += static_cast<char>((v >> (8 * i)) & 0xff);
    };
    imgs += '\0';
    imgs += '\0';
    imgs += static_cast<char>(0x08);
    imgs += static_cast<char>(0x03);
    be32(imgs, 6);
    be32(imgs, 8);
    be32(imgs, 8);
    for (int i = 0; i < 6; ++i) {
      for (int p = 0; p < 64; ++p) {
        imgs += static_cast<char>((p + 40 * (i % 3)) % 256);
      }
    }
    labs += '\0';
    labs += '\0';
    labs += static_cast<char>(0x08);
    labs += static_cast<char>(0x01);
    be32(labs, 6);
    for (int i = 0; i < 6; ++i) labs += static_cast<char>(i % 3);
    const std::string dir = temp_dir("idx_lib");
    std::ofstream(dir + "/img.idx", std::ios::binary) << imgs;
    std::ofstream(dir + "/lab.idx", std::ios::binary) << labs;

    SceneConfig cfg;
    cfg.class_count = 3;
    cfg.num_objects = 1;
    cfg.glyph_source = GlyphSource::kIdxFile;
    cfg.idx_images = dir + "/img.idx";
    cfg.idx_labels = dir + "/lab.idx";
    const GlyphLibrary lib = GlyphLibrary::from_idx(
        cfg.idx_images, cfg.idx_labels, cfg.glyph_size(), cfg.class_count);
    CHECK(lib.variants(0) == 2);
    const SequenceSample seq = generate_sequence(cfg, 3);
    const RealGrid frame = render_frame(cfg, lib, seq, 0);
    double total = 0.0;
    for (double v : frame.data) total += v;
    CHECK(total > 0.0);
  }

  TEST_CASE("scene config json round trip") {
    SceneConfig cfg;
    cfg.canvas = 128;
    cfg.class_count = 6;
    cfg.blob_sigma = 4.0;
    cfg.seed = 77;
    const SceneConfig back = scene_config_from_json(scene_config_to_json(cfg));
    CHECK(back.canvas == 128);
    CHECK(back.class_count == 6);
    CHECK(back.blob_sigma == 4.0);
    CHECK(back.seed == 77);
  }

  TEST_CASE("config validation") {
    SceneConfig bad;
    bad.canvas = 100;
    CHECK_THROWS_AS(bad.validate(), DimensionError);
    SceneConfig fast;
    fast.max_speed = 9.0;
    CHECK_THROWS_AS(fast.validate(), DimensionError);
  }
}
