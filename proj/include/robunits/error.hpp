// include/robunits/error.hpp
//
// Copyright 2026  The robunits Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace robunits {

// All library failures derive from Error so callers can catch one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or truncated file contents.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Well-formed file using an encoding we do not read.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

// Bad arguments or violated preconditions.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Input too short or silent for the requested transform.
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

// Target cannot be aligned to the given number of frames.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

// Brute-force oracle asked to enumerate too many paths.
class SizeError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf reached the optimizer or a training loop diverged.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace robunits
