// Copyright 2026 The specmask Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SPECMASK_ERRORS_HPP_
#define SPECMASK_ERRORS_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>

namespace specmask {

// Caller supplied an argument outside the operation's contract (bad rank,
// overlapping split indices, length mismatch, ...). Maps to CLI exit code 2.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Input data violates an invariant (non-finite entries, asymmetric matrix,
// empty band mask, ...). Maps to CLI exit code 3.
class InvalidData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A binary file failed to parse. Carries the byte offset of the failure.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::uint64_t offset)
      : std::runtime_error(what + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

// File could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace specmask

#endif  // SPECMASK_ERRORS_HPP_
