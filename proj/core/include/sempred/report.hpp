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

#ifndef SEMPRED_REPORT_HPP_
#define SEMPRED_REPORT_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "sempred/pipeline.hpp"

namespace sempred {

// One CSV/JSON row: per-sequence metrics or the aggregate of a run.
struct ReportRow {
  std::string row_type;  // "sequence" or "aggregate"
  int seq_index = -1;    // -1 for aggregates
  std::string order;     // "sem_pred" or "pred_sem"
  std::string fraction;  // "0", "1", "5", "10", "20", "100", "scratch"
  double l1 = 0.0;
  double mse = 0.0;
  double dssim = 0.0;
  double blob_err = 0.0;
};

// Metric table of one or more runs plus the run metadata. Serialization is
// byte-deterministic for identical inputs.
struct EvalReport {
  std::string config_hash;
  uint64_t seed = 0;
  std::vector<ReportRow> rows;

  void add_run(const EvalSummary& summary, const std::string& order,
               const std::string& fraction, bool keep_sequences = true);

  std::string to_csv() const;
  std::string to_json() const;
  void write_csv(const std::string& path) const;
  void write_json(const std::string& path) const;
};

uint64_t fnv1a64(const std::string& text);
std::string hash_hex(const std::string& text);

}  // namespace sempred

#endif  // SEMPRED_REPORT_HPP_
