// Copyright 2026 The eqvfl Authors
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

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace eqvfl {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// A requested size exceeds a configured capacity (qubits, matrix size, frame size).
class CapacityError : public Error {
   public:
    using Error::Error;
};

/// An argument violates an operation's precondition (index range, overlap, shape).
class PreconditionError : public Error {
   public:
    using Error::Error;
};

/// Measurement was requested on a state whose probability mass vanished.
class DegenerateMeasurementError : public Error {
   public:
    using Error::Error;
};

/// A statevector or mass function failed its normalization check.
class InvalidStateError : public Error {
   public:
    using Error::Error;
};

/// Malformed binary input. Carries the byte offset where parsing stopped.
class FormatError : public Error {
   public:
    FormatError(const std::string &what, std::size_t offset)
        : Error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

   private:
    std::size_t offset_;
};

/// Malformed delimited text. Row and column are 1-based; column 0 means "whole row".
class ParseError : public Error {
   public:
    ParseError(const std::string &what, std::size_t row, std::size_t column)
        : Error(what + " (row " + std::to_string(row) + ", column " + std::to_string(column) + ")"),
          row_(row),
          column_(column) {}
    std::size_t row() const noexcept { return row_; }
    std::size_t column() const noexcept { return column_; }

   private:
    std::size_t row_;
    std::size_t column_;
};

/// Teleportation message stream violated exactly-once delivery.
class ProtocolError : public Error {
   public:
    using Error::Error;
};

/// A teleportation session closed with corrections still pending.
class IncompleteSessionError : public Error {
   public:
    using Error::Error;
};

/// Invalid experiment configuration. The message starts with the offending field path.
class ConfigError : public Error {
   public:
    ConfigError(const std::string &field, const std::string &what) : Error(field + ": " + what), field_(field) {}
    const std::string &field() const noexcept { return field_; }

   private:
    std::string field_;
};

}  // namespace eqvfl
