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

#ifndef SEMPRED_ERRORS_HPP_
#define SEMPRED_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace sempred {

// Shape or size violation of a documented precondition.
class DimensionError : public std::invalid_argument {
 public:
  explicit DimensionError(const std::string& what)
      : std::invalid_argument(what) {}
};

// Two tile lattices that must agree (rows, cols, tile size) do not.
class LatticeMismatchError : public std::invalid_argument {
 public:
  explicit LatticeMismatchError(const std::string& what)
      : std::invalid_argument(what) {}
};

// Overlap-add denominator vanished at a pixel that still carries signal.
class DegenerateCoverageError : public std::runtime_error {
 public:
  explicit DegenerateCoverageError(const std::string& what)
      : std::runtime_error(what) {}
};

// IDX file does not start with a recognized magic number.
class IdxMagicError : public std::runtime_error {
 public:
  explicit IdxMagicError(const std::string& what)
      : std::runtime_error(what) {}
};

// File ended before the payload promised by its header.
class TruncatedPayloadError : public std::runtime_error {
 public:
  explicit TruncatedPayloadError(const std::string& what)
      : std::runtime_error(what) {}
};

// Container or weight file written by an incompatible format version.
class VersionMismatchError : public std::runtime_error {
 public:
  explicit VersionMismatchError(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace sempred

#endif  // SEMPRED_ERRORS_HPP_
