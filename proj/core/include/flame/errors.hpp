// Copyright 2026 The Flame Authors.
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

#ifndef FLAME_ERRORS_HPP_
#define FLAME_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace flame {

// Base for all library errors. Subclasses map onto the error kinds the
// public operations document (range, validation, parse, ...).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what, int position = -1)
      : Error(what), position_(position) {}
  // Offending label index, line number or byte offset; -1 when unknown.
  int position() const { return position_; }

 private:
  int position_;
};

class DegenerateGeometryError : public Error {
 public:
  using Error::Error;
};

class LookupError : public Error {
 public:
  using Error::Error;
};

// Network / transport level failure (timeouts, bind failures, refused
// connections). Never cached by the discovery layer.
class TransportError : public Error {
 public:
  using Error::Error;
};

}  // namespace flame

#endif  // FLAME_ERRORS_HPP_
