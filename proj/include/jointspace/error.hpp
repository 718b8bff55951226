// Copyright (c) 2026, the jointspace authors.
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

#pragma once

#include <stdexcept>
#include <string>

namespace jointspace {

// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// A parameter is outside its documented domain (rates, counts, templates...).
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

// Matrix/vector dimensions do not line up.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Neither title nor description can produce a caption.
class CaptionUnavailable : public Error {
 public:
  using Error::Error;
};

// A caption normalizes to nothing the text encoder can hash.
class DegenerateText : public Error {
 public:
  using Error::Error;
};

// A gradient contained NaN/Inf; the training run is aborted.
class NonFiniteGradient : public Error {
 public:
  using Error::Error;
};

// A retrieval query was issued against an empty index.
class EmptyIndex : public Error {
 public:
  using Error::Error;
};

// A query id has no entry in the relevance map.
class MissingRelevance : public Error {
 public:
  using Error::Error;
};

// Manifest parsing/validation failure (message carries the line number).
class ManifestError : public Error {
 public:
  using Error::Error;
};

// File format or filesystem failure (bad magic, CRC mismatch, unreadable...).
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace jointspace
