/* Copyright 2026 The SMN Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef SMN_ERROR_HPP_
#define SMN_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace smn {

enum class ErrorKind {
  kDimension,
  kVocabulary,
  kUsage,
  kNumericInput,
  kConfig,
  kData,
  kAlignment,
  kVerification,
};

// Base of every error thrown by the library. The kind decides the CLI exit
// code (see cli::exit_code_for).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& what)
      : Error(ErrorKind::kDimension, "dimension error: " + what) {}
};

class VocabularyError : public Error {
 public:
  explicit VocabularyError(const std::string& what)
      : Error(ErrorKind::kVocabulary, "vocabulary error: " + what) {}
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what)
      : Error(ErrorKind::kUsage, "usage error: " + what) {}
};

class NumericInputError : public Error {
 public:
  explicit NumericInputError(const std::string& what)
      : Error(ErrorKind::kNumericInput, "numeric input error: " + what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what)
      : Error(ErrorKind::kConfig, "config error: " + what) {}
};

// Missing, unreadable or corrupt files.
class DataError : public Error {
 public:
  explicit DataError(const std::string& what)
      : Error(ErrorKind::kData, "data error: " + what) {}
};

class AlignmentError : public Error {
 public:
  explicit AlignmentError(const std::string& what)
      : Error(ErrorKind::kAlignment, "alignment error: " + what) {}
};

class VerificationError : public Error {
 public:
  explicit VerificationError(const std::string& what)
      : Error(ErrorKind::kVerification, "verification failure: " + what) {}
};

}  // namespace smn

#endif  // SMN_ERROR_HPP_
