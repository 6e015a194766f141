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

#include "nbf/subprocess.h"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <mutex>
#include <thread>

#include "nbf/error.h"

extern char** environ;

namespace nbf {

std::vector<std::string> SplitCommandLine(std::string_view command) {
  std::vector<std::string> argv;
  std::string cur;
  bool have = false;
  char quote = 0;
  for (std::size_t i = 0; i < command.size(); ++i) {
    const char c = command[i];
    if (quote) {
      if (c == quote) {
        quote = 0;
      } else if (c == '\\' && quote == '"' && i + 1 < command.size()) {
        cur.push_back(command[++i]);
      } else {
        cur.push_back(c);
      }
    } else if (c == '\'' || c == '"') {
      quote = c;
      have = true;
    } else if (c == '\\' && i + 1 < command.size()) {
      cur.push_back(command[++i]);
      have = true;
    } else if (c == ' ' || c == '\t' || c == '\n') {
      if (have) argv.push_back(std::move(cur));
      cur.clear();
      have = false;
    } else {
      cur.push_back(c);
      have = true;
    }
  }
  if (quote) throw Error("unterminated quote in command");
  if (have) argv.push_back(std::move(cur));
  return argv;
}

namespace {

void IgnoreSigpipe() {
  static std::once_flag once;
  std::call_once(once, [] { ::signal(SIGPIPE, SIG_IGN); });
}

int DecodeStatus(int status) {
  if (WIFEXITED(status)) return WEXITSTATUS(status);
  if (WIFSIGNALED(status)) return 128 + WTERMSIG(status);
  return -1;
}

void CloseFd(int* fd) {
  if (*fd >= 0) {
    ::close(*fd);
    *fd = -1;
  }
}

}  // namespace

Subprocess::Subprocess(const std::vector<std::string>& argv) {
  if (argv.empty()) throw Error("empty command");
  IgnoreSigpipe();
  int in_pipe[2];
  int out_pipe[2];
  if (::pipe2(in_pipe, O_CLOEXEC) != 0) {
    throw TransportError(std::string("pipe: ") + std::strerror(errno));
  }
  if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    throw TransportError(std::string("pipe: ") + std::strerror(errno));
  }
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, in_pipe[0], STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, out_pipe[1], STDOUT_FILENO);

  std::vector<char*> cargv;
  cargv.reserve(argv.size() + 1);
  for (const auto& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
  cargv.push_back(nullptr);

  const int rc = ::posix_spawnp(&pid_, cargv[0], &actions, nullptr,
                                cargv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  if (rc != 0) {
    ::close(in_pipe[1]);
    ::close(out_pipe[0]);
    pid_ = -1;
    throw TransportError("cannot start '" + argv[0] + "': " + std::strerror(rc));
  }
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
  ::fcntl(to_child_, F_SETFL, ::fcntl(to_child_, F_GETFL) | O_NONBLOCK);
}

Subprocess::~Subprocess() { Terminate(std::chrono::milliseconds(1000)); }

Subprocess::Exchange Subprocess::Run(const std::vector<std::string>& input,
                                     std::chrono::milliseconds timeout) {
  using Clock = std::chrono::steady_clock;
  Exchange ex;
  std::string out_buf;
  for (const auto& l : input) {
    out_buf += l;
    out_buf += '\n';
  }
  std::size_t written = 0;
  auto deadline = Clock::now() + timeout;
  char buf[65536];

  auto take_lines = [&] {
    std::size_t pos;
    while (ex.lines.size() < input.size() &&
           (pos = pending_.find('\n')) != std::string::npos) {
      ex.lines.push_back(pending_.substr(0, pos));
      pending_.erase(0, pos + 1);
      deadline = Clock::now() + timeout;
    }
  };
  take_lines();

  while (ex.lines.size() < input.size()) {
    if (from_child_ < 0) {
      ex.status = Status::kClosed;
      return ex;
    }
    pollfd fds[2];
    nfds_t nfds = 0;
    fds[nfds++] = {from_child_, POLLIN, 0};
    const bool want_write = written < out_buf.size() && to_child_ >= 0;
    if (want_write) fds[nfds++] = {to_child_, POLLOUT, 0};

    const auto now = Clock::now();
    if (now >= deadline) {
      ex.status = Status::kTimeout;
      return ex;
    }
    const auto wait =
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now);
    const int n = ::poll(fds, nfds, static_cast<int>(wait.count()) + 1);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw TransportError(std::string("poll: ") + std::strerror(errno));
    }
    if (n == 0) continue;

    if (want_write && (fds[1].revents & (POLLOUT | POLLERR | POLLHUP))) {
      const ssize_t w = ::write(to_child_, out_buf.data() + written,
                                out_buf.size() - written);
      if (w > 0) {
        written += static_cast<std::size_t>(w);
      } else if (w < 0 && errno != EAGAIN && errno != EINTR) {
        // Reader went away; keep draining whatever output remains.
        CloseFd(&to_child_);
      }
    }
    if (fds[0].revents & (POLLIN | POLLERR | POLLHUP)) {
      const ssize_t r = ::read(from_child_, buf, sizeof(buf));
      if (r > 0) {
        pending_.append(buf, static_cast<std::size_t>(r));
        take_lines();
      } else if (r == 0) {
        CloseFd(&from_child_);
      } else if (errno != EAGAIN && errno != EINTR) {
        CloseFd(&from_child_);
      }
    }
  }
  return ex;
}

void Subprocess::CloseInput() { CloseFd(&to_child_); }

std::optional<int> Subprocess::TryReap() {
  if (exit_code_ || pid_ <= 0) return exit_code_;
  int status = 0;
  const pid_t r = ::waitpid(pid_, &status, WNOHANG);
  if (r == pid_) exit_code_ = DecodeStatus(status);
  return exit_code_;
}

int Subprocess::Wait() {
  CloseInput();
  if (exit_code_ || pid_ <= 0) return exit_code_.value_or(-1);
  int status = 0;
  while (::waitpid(pid_, &status, 0) < 0 && errno == EINTR) {
  }
  exit_code_ = DecodeStatus(status);
  CloseFd(&from_child_);
  return *exit_code_;
}

int Subprocess::Terminate(std::chrono::milliseconds grace) {
  CloseInput();
  if (pid_ <= 0) return -1;
  const auto until = std::chrono::steady_clock::now() + grace;
  while (!TryReap() && std::chrono::steady_clock::now() < until) {
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  if (!TryReap()) {
    ::kill(pid_, SIGKILL);
    Wait();
  }
  CloseFd(&from_child_);
  return *exit_code_;
}

}  // namespace nbf
