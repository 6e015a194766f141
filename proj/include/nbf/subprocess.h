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

#ifndef NBF_SUBPROCESS_H_
#define NBF_SUBPROCESS_H_

#include <sys/types.h>

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace nbf {

// Splits a command string into argv. Supports single and double quotes and
// backslash escapes; no variable expansion.
std::vector<std::string> SplitCommandLine(std::string_view command);

// A child process talking line-delimited text over its stdin/stdout.
// stderr is inherited. SIGPIPE is ignored process-wide once the first
// subprocess is created.
class Subprocess {
 public:
  explicit Subprocess(const std::vector<std::string>& argv);
  ~Subprocess();

  Subprocess(const Subprocess&) = delete;
  Subprocess& operator=(const Subprocess&) = delete;

  enum class Status { kOk, kTimeout, kClosed };

  struct Exchange {
    Status status = Status::kOk;
    std::vector<std::string> lines;  // complete output lines, '\n' removed
  };

  // Writes every input line and reads one output line per input line.
  // Writing and reading are interleaved so large batches cannot deadlock.
  // `timeout` bounds the wait for each successive output line. On kTimeout
  // or kClosed, `lines` holds what arrived before the failure.
  Exchange Run(const std::vector<std::string>& input, std::chrono::milliseconds timeout);

  void CloseInput();
  // Waits for exit and returns the exit code (128 + signal if killed).
  int Wait();
  // Waits up to `grace`, then kills. Returns the exit code.
  int Terminate(std::chrono::milliseconds grace);
  bool running() const { return pid_ > 0 && !exit_code_; }

 private:
  std::optional<int> TryReap();

  pid_t pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string pending_;
  std::optional<int> exit_code_;
};

}  // namespace nbf

#endif  // NBF_SUBPROCESS_H_
