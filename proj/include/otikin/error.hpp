// Copyright 2026 The otikin Authors
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

#ifndef OTIKIN_ERROR_HPP_
#define OTIKIN_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace otikin {

// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A precondition on an argument was violated (bad horizon, dimension mismatch...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Measure data could not be turned into a valid probability measure.
class MeasureError : public Error {
 public:
  using Error::Error;
};

// Internal solver failure. Valid inputs should never produce one.
class SolverError : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidArgument(what);
}

}  // namespace detail
}  // namespace otikin

#endif  // OTIKIN_ERROR_HPP_
