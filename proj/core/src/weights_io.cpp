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

#include "sempred/weights_io.hpp"

#include <cstring>
#include <fstream>
#include <vector>

#include "json.hpp"
#include "sempred/errors.hpp"

namespace sempred {

namespace {

using nlohmann::json;

json describe_layers(const std::vector<ConvLayerDesc>& layers) {
  json out = json::array();
  for (const auto& l : layers) {
    out.push_back({{"kh", l.kh},
                   {"kw", l.kw},
                   {"in_c", l.in_c},
                   {"out_c", l.out_c},
                   {"stride", l.stride},
                   {"activation",
                    l.activation == Activation::kLeakyRelu ? "leaky_relu"
                                                           : "identity"}});
  }
  return out;
}

std::vector<ConvLayerDesc> parse_layers(const json& j) {
  std::vector<ConvLayerDesc> layers;
  for (const auto& e : j) {
    ConvLayerDesc l;
    l.kh = e.at("kh").get<int>();
    l.kw = e.at("kw").get<int>();
    l.in_c = e.at("in_c").get<int>();
    l.out_c = e.at("out_c").get<int>();
    l.stride = e.at("stride").get<int>();
    l.activation = e.at("activation").get<std::string>() == "leaky_relu"
                       ? Activation::kLeakyRelu
                       : Activation::kIdentity;
    layers.push_back(l);
  }
  return layers;
}

void write_weights(const std::string& path, const std::string& kind,
                   const std::vector<ConvLayerDesc>& layers,
                   const std::vector<double>& values, uint64_t seed,
                   const std::string& note) {
  json header;
  header["format"] = "sempred-weights";
  header["version"] = 1;
  header["kind"] = kind;
  header["layers"] = describe_layers(layers);
  header["param_count"] = values.size();
  header["seed"] = seed;
  header["note"] = note;
  const std::string htext = header.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  const uint32_t hlen = static_cast<uint32_t>(htext.size());
  char lenbuf[4];
  for (int i = 0; i < 4; ++i) lenbuf[i] = static_cast<char>((hlen >> (8 * i)) & 0xff);
  out.write(lenbuf, 4);
  out.write(htext.data(), static_cast<std::streamsize>(htext.size()));
  for (double v : values) {
    const float f = static_cast<float>(v);
    uint32_t bits;
    std::memcpy(&bits, &f, 4);
    char buf[4];
    for (int i = 0; i < 4; ++i) buf[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
    out.write(buf, 4);
  }
}

struct LoadedWeights {
  std::vector<ConvLayerDesc> layers;
  std::vector<double> values;
};

LoadedWeights read_weights(const std::string& path, const std::string& kind) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  if (bytes.size() < 4) throw TruncatedPayloadError("weights: missing header");
  uint32_t hlen = 0;
  for (int i = 0; i < 4; ++i) {
    hlen |= static_cast<uint32_t>(static_cast<uint8_t>(bytes[i])) << (8 * i);
  }
  if (bytes.size() < 4 + hlen) {
    throw TruncatedPayloadError("weights: header extends past file");
  }
  const json header = json::parse(bytes.substr(4, hlen));
  if (header.value("format", std::string()) != "sempred-weights" ||
      header.at("version").get<int>() != 1) {
    throw VersionMismatchError("weights: unsupported format or version");
  }
  if (header.at("kind").get<std::string>() != kind) {
    throw VersionMismatchError("weights: file holds '" +
                               header.at("kind").get<std::string>() +
                               "', expected '" + kind + "'");
  }
  const size_t count = header.at("param_count").get<size_t>();
  if (bytes.size() - 4 - hlen < count * 4) {
    throw TruncatedPayloadError("weights: parameter block short");
  }
  LoadedWeights out;
  out.layers = parse_layers(header.at("layers"));
  out.values.resize(count);
  size_t pos = 4 + hlen;
  for (size_t i = 0; i < count; ++i) {
    uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) {
      bits |= static_cast<uint32_t>(static_cast<uint8_t>(bytes[pos + b]))
              << (8 * b);
    }
    pos += 4;
    float f;
    std::memcpy(&f, &bits, 4);
    out.values[i] = f;
  }
  return out;
}

}  // namespace

void save_transport_weights(const std::string& path,
                            const ConvFilterParams& params, uint64_t seed,
                            const std::string& note) {
  params.validate();
  write_weights(path, "transport", params.layers, params.values, seed, note);
}

ConvFilterParams load_transport_weights(const std::string& path) {
  LoadedWeights lw = read_weights(path, "transport");
  ConvFilterParams p;
  p.layers = std::move(lw.layers);
  p.values = std::move(lw.values);
  p.validate();
  return p;
}

void save_extractor_weights(const std::string& path,
                            const ExtractorParams& params, uint64_t seed,
                            const std::string& note) {
  params.validate();
  write_weights(path, "extractor", params.layers, params.values, seed, note);
}

ExtractorParams load_extractor_weights(const std::string& path) {
  LoadedWeights lw = read_weights(path, "extractor");
  ExtractorParams p;
  p.layers = std::move(lw.layers);
  p.values = std::move(lw.values);
  p.validate();
  return p;
}

}  // namespace sempred
