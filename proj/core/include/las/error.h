// Copyright 2026 The las-desk Authors.
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

#ifndef LAS_ERROR_H_
#define LAS_ERROR_H_

#include <stdexcept>
#include <string>

namespace las {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand shapes disagree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Value outside an operation's mathematical domain, or a non-finite result.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Caller broke a documented precondition (e.g. non-scalar loss).
class ContractError : public Error {
 public:
  using Error::Error;
};

// Bad user-supplied data: audio, text, token ids, files.
class InputError : public Error {
 public:
  using Error::Error;
};

// Inconsistent configuration values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace las

#endif  // LAS_ERROR_H_
