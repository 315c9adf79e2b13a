/*
 * Copyright (c) dskip contributors.
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

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dskip {

/// Predicate text or descriptor string failed to parse. `position` is a
/// 0-based byte offset into the input.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, std::size_t position)
      : std::runtime_error(message + " at position " + std::to_string(position)),
        position_(position) {}

  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

/// Dataset-level problem: missing schema, unreadable object, bad manifest.
class DatasetError : public std::runtime_error {
 public:
  explicit DatasetError(const std::string& message) : std::runtime_error(message) {}
};

/// Stored metadata does not round-trip or does not match its descriptor.
class StoreCorruptionError : public std::runtime_error {
 public:
  explicit StoreCorruptionError(const std::string& message) : std::runtime_error(message) {}
};

/// A UDF failed at evaluation time (e.g. malformed polygon literal).
class UdfError : public std::runtime_error {
 public:
  explicit UdfError(const std::string& message) : std::runtime_error(message) {}
};

}  // namespace dskip
