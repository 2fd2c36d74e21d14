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

#ifndef SEMPRED_WEIGHTS_IO_HPP_
#define SEMPRED_WEIGHTS_IO_HPP_

#include <cstdint>
#include <string>

#include "sempred/semantics.hpp"
#include "sempred/transport.hpp"

namespace sempred {

// Weight files: a length-prefixed JSON header (architecture descriptor,
// seed, training note) followed by the parameters as little-endian float32.
// Saving a loaded file reproduces it byte for byte.

void save_transport_weights(const std::string& path,
                            const ConvFilterParams& params, uint64_t seed,
                            const std::string& note);
ConvFilterParams load_transport_weights(const std::string& path);

void save_extractor_weights(const std::string& path,
                            const ExtractorParams& params, uint64_t seed,
                            const std::string& note);
ExtractorParams load_extractor_weights(const std::string& path);

}  // namespace sempred

#endif  // SEMPRED_WEIGHTS_IO_HPP_
