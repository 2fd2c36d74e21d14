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

#ifndef SEMPRED_PARALLEL_HPP_
#define SEMPRED_PARALLEL_HPP_

#include <functional>

namespace sempred {

// Worker cap: min(hardware_concurrency, SEMPRED_THREADS) when the env var is
// set, at least 1.
int worker_count();

// Runs fn(i) for i in [0, n). Each index must write only to its own output
// slot so results are independent of the thread count and schedule.
void parallel_for(int n, const std::function<void(int)>& fn);

}  // namespace sempred

#endif  // SEMPRED_PARALLEL_HPP_
