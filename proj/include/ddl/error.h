/* Copyright 2026 The ddlring Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef DDL_ERROR_H_
#define DDL_ERROR_H_

#include <stdexcept>
#include <string>

namespace ddl {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller violated an operation's precondition (bad argument, unknown id).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Malformed or semantically invalid topology document. `location` is a JSON
// pointer (e.g. "/nodes/3/parent") or a byte offset for syntax errors.
class TopologyError : public Error {
 public:
  enum class Kind { syntax, semantic };

  TopologyError(Kind kind, std::string location, const std::string& message)
      : Error(location.empty() ? message : location + ": " + message),
        kind_(kind),
        location_(std::move(location)) {}

  Kind kind() const { return kind_; }
  const std::string& location() const { return location_; }

 private:
  Kind kind_;
  std::string location_;
};

// Failure inside a running collective. `rank` names the rank at fault (or -1
// when unknown) and `phase` the schedule phase in progress (or -1).
class CollectiveError : public Error {
 public:
  CollectiveError(const std::string& message, int rank = -1, int phase = -1)
      : Error(message), rank_(rank), phase_(phase) {}

  int rank() const { return rank_; }
  int phase() const { return phase_; }

 private:
  int rank_;
  int phase_;
};

// The coordinator cancelled the collective after a failure elsewhere.
class CollectiveAborted : public CollectiveError {
 public:
  using CollectiveError::CollectiveError;
};

}  // namespace ddl

#endif  // DDL_ERROR_H_
