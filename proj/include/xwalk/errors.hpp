// Copyright 2026 The xwalk Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace xwalk {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Degenerate geometry: collinear points, singular systems, points at infinity.
class GeometryError : public Error {
 public:
  using Error::Error;
};

class PlacementError : public Error {
 public:
  PlacementError(std::size_t index, const std::string& what)
      : Error("foreground " + std::to_string(index) + ": " + what), index_(index) {}
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

class GenerationError : public Error {
 public:
  using Error::Error;
};

class InputError : public Error {
 public:
  using Error::Error;
};

// Detector adapter failures.
class AdapterError : public Error {
 public:
  using Error::Error;
};

class AdapterTimeout : public AdapterError {
 public:
  using AdapterError::AdapterError;
};

class AdapterDead : public AdapterError {
 public:
  using AdapterError::AdapterError;
};

class ProtocolError : public AdapterError {
 public:
  ProtocolError(const std::string& what, std::string payload)
      : AdapterError(what), payload_(std::move(payload)) {}
  const std::string& payload() const { return payload_; }

 private:
  std::string payload_;
};

}  // namespace xwalk
