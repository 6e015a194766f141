// Copyright 2026 The nbfix Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef NBF_ERROR_H_
#define NBF_ERROR_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nbf {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A dump or config line that does not match the schema.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::string field, const std::string& what);
  std::size_t line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  std::size_t line_;
  std::string field_;
};

class DuplicateIdError : public Error {
 public:
  explicit DuplicateIdError(std::string utt_id);
  const std::string& utt_id() const { return utt_id_; }

 private:
  std::string utt_id_;
};

// Raised when an operation needs a reference the record does not carry.
class MissingReferenceError : public Error {
 public:
  explicit MissingReferenceError(std::string utt_id);
  const std::string& utt_id() const { return utt_id_; }

 private:
  std::string utt_id_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Scorer plugin errors.
class ProtocolError : public Error {
 public:
  ProtocolError(const std::string& what, std::string offending_line);
  const std::string& offending_line() const { return line_; }

 private:
  std::string line_;
};

class TimeoutError : public Error {
 public:
  explicit TimeoutError(std::string utt_id);
  const std::string& utt_id() const { return utt_id_; }

 private:
  std::string utt_id_;
};

class TransportError : public Error {
 public:
  using Error::Error;
};

}  // namespace nbf

#endif  // NBF_ERROR_H_
