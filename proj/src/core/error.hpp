/*
 * Copyright 2026 The iea-sim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>

namespace iea {

/// Configuration or argument rejected before any simulation work started.
class ValidationError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Camera whose parameters violate the pinhole model preconditions.
class InvalidCamera : public ValidationError {
public:
  using ValidationError::ValidationError;
};

/// Failure while a run is in progress (I/O, sockets, child processes).
class RuntimeFailure : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// File that could not be opened, read or written.
class IoError : public RuntimeFailure {
public:
  using RuntimeFailure::RuntimeFailure;
};

class DecodeError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace iea
