/* Copyright 2026 The PICE Authors
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

namespace pice {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A model or configuration violates its invariants.
class InvalidModelError : public Error {
 public:
  using Error::Error;
};

class InvalidInputError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

class DivisionError : public Error {
 public:
  using Error::Error;
};

// Dispatcher queue is full; the caller is expected to fall back to the cloud.
class BackpressureError : public Error {
 public:
  using Error::Error;
};

class UndefinedMetricsError : public Error {
 public:
  using Error::Error;
};

class DivergenceUndefinedError : public Error {
 public:
  using Error::Error;
};

class BackendError : public Error {
 public:
  using Error::Error;
};

// Transient backend failure (timeout, connection refused). Safe to retry.
class RetryableError : public BackendError {
 public:
  using BackendError::BackendError;
};

// The remote answered with something we cannot interpret.
class ProtocolError : public BackendError {
 public:
  using BackendError::BackendError;
};

}  // namespace pice
