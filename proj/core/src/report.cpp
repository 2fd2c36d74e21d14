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

#include "sempred/report.hpp"

#include <charconv>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace sempred {

namespace {

// Shortest round-trip decimal form keeps report bytes deterministic.
std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

void EvalReport::add_run(const EvalSummary& summary, const std::string& order,
                         const std::string& fraction, bool keep_sequences) {
  if (keep_sequences) {
    for (const auto& m : summary.per_sequence) {
      rows.push_back({"sequence", m.seq_index, order, fraction, m.l1, m.mse,
                      m.dssim, m.blob_err});
    }
  }
  const auto& a = summary.aggregate;
  rows.push_back(
      {"aggregate", -1, order, fraction, a.l1, a.mse, a.dssim, a.blob_err});
}

std::string EvalReport::to_csv() const {
  std::string out =
      "row_type,seq_index,order,fraction,l1,mse,dssim,blob_err,config_hash,"
      "seed\n";
  for (const auto& r : rows) {
    out += r.row_type + ',' + std::to_string(r.seq_index) + ',' + r.order +
           ',' + r.fraction + ',' + fmt(r.l1) + ',' + fmt(r.mse) + ',' +
           fmt(r.dssim) + ',' + fmt(r.blob_err) + ',' + config_hash + ',' +
           std::to_string(seed) + '\n';
  }
  return out;
}

std::string EvalReport::to_json() const {
  nlohmann::json j;
  j["config_hash"] = config_hash;
  j["seed"] = seed;
  nlohmann::json rows_json = nlohmann::json::array();
  for (const auto& r : rows) {
    rows_json.push_back({{"row_type", r.row_type},
                         {"seq_index", r.seq_index},
                         {"order", r.order},
                         {"fraction", r.fraction},
                         {"l1", r.l1},
                         {"mse", r.mse},
                         {"dssim", r.dssim},
                         {"blob_err", r.blob_err}});
  }
  j["rows"] = rows_json;
  return j.dump(2) + "\n";
}

void EvalReport::write_csv(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  const std::string text = to_csv();
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

void EvalReport::write_json(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  const std::string text = to_json();
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

uint64_t fnv1a64(const std::string& text) {
  uint64_t hash = 1469598103934665603ULL;
  for (const char c : text) {
    hash ^= static_cast<uint8_t>(c);
    hash *= 1099511628211ULL;
  }
  return hash;
}

std::string hash_hex(const std::string& text) {
  char buf[17];
  snprintf(buf, sizeof(buf), "%016llx",
           static_cast<unsigned long long>(fnv1a64(text)));
  return std::string(buf);
}

}  // namespace sempred
