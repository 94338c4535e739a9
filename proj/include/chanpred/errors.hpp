// SPDX-License-Identifier: Apache-2.0
//
// chanpred - channel predictors for time-variant flat-fading channels
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace chanpred {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation (non-finite input, sigma^2 <= 0, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

/// Prediction step outside [1, pred_len].
class InvalidStepError : public Error {
public:
    using Error::Error;
};

/// Factorization broke down. pivot() is the zero-based index of the offending pivot.
class SingularMatrixError : public Error {
public:
    SingularMatrixError(const std::string& what, std::size_t pivot)
        : Error(what + " (pivot " + std::to_string(pivot) + ")"), pivot_(pivot) {}
    std::size_t pivot() const noexcept { return pivot_; }

private:
    std::size_t pivot_;
};

class IllPosedDecomposition : public Error {
public:
    using Error::Error;
};

/// NaN/Inf encountered. index() is the batch sample (loss evaluation) or the step (training).
class NumericFailure : public Error {
public:
    NumericFailure(const std::string& what, std::size_t index)
        : Error(what + " (index " + std::to_string(index) + ")"), index_(index) {}
    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

/// Malformed configuration text.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::string key, std::size_t line)
        : Error("line " + std::to_string(line) + ", key '" + key + "': " + what),
          key_(std::move(key)), line_(line) {}
    const std::string& key() const noexcept { return key_; }
    std::size_t line() const noexcept { return line_; }

private:
    std::string key_;
    std::size_t line_;
};

}  // namespace chanpred
