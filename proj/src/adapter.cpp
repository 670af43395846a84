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

#include "xwalk/adapter.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <thread>

#include "xwalk/errors.hpp"
#include "xwalk/image_io.hpp"

extern char** environ;

namespace xwalk {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

std::string make_detect_request(std::int64_t id, const Raster& image) {
  const auto png = encode_png(image);
  json j{{"type", "detect"}, {"id", id}, {"image_png_b64", base64_encode(png)}};
  return j.dump();
}

std::vector<Detection> parse_detect_response(const std::string& line, std::int64_t expected_id) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("response is not JSON: ") + e.what(), line);
  }
  try {
    const std::string type = j.at("type").get<std::string>();
    const std::int64_t id = j.at("id").get<std::int64_t>();
    if (id != expected_id)
      throw ProtocolError("response id " + std::to_string(id) + " does not match request " + std::to_string(expected_id), line);
    if (type == "error") throw AdapterError("adapter error: " + j.at("message").get<std::string>());
    if (type != "detections") throw ProtocolError("unexpected response type '" + type + "'", line);
    std::vector<Detection> out;
    for (const auto& d : j.at("detections")) {
      Detection det = detection_from_json(d);
      if (!is_valid(det)) throw ProtocolError("detection violates box/score invariants", line);
      out.push_back(std::move(det));
    }
    return out;
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("malformed response: ") + e.what(), line);
  }
}

AdapterProcess::AdapterProcess(const std::string& command, std::chrono::milliseconds timeout) : timeout_(timeout) {
  // A dead adapter must surface as an error, not kill the client.
  ::signal(SIGPIPE, SIG_IGN);
  int in_pipe[2];
  int out_pipe[2];
  if (::pipe2(in_pipe, O_CLOEXEC) != 0 || ::pipe2(out_pipe, O_CLOEXEC) != 0)
    throw AdapterDead(std::string("pipe: ") + std::strerror(errno));

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, in_pipe[0], STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, out_pipe[1], STDOUT_FILENO);
  const char* argv[] = {"/bin/sh", "-c", command.c_str(), nullptr};
  pid_t pid = 0;
  const int rc = posix_spawn(&pid, "/bin/sh", &actions, nullptr, const_cast<char* const*>(argv), environ);
  posix_spawn_file_actions_destroy(&actions);
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  if (rc != 0) {
    ::close(in_pipe[1]);
    ::close(out_pipe[0]);
    throw AdapterDead(std::string("spawn failed: ") + std::strerror(rc));
  }
  pid_ = pid;
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];

  std::string hello;
  try {
    hello = read_line();
  } catch (...) {
    terminate();
    throw;
  }
  try {
    const json j = json::parse(hello);
    const std::string type = j.at("type").get<std::string>();
    if (type == "error") {
      const std::string msg = j.value("message", "");
      terminate();
      throw AdapterError("adapter failed to start: " + msg);
    }
    if (type != "hello") throw ProtocolError("expected hello handshake", hello);
    name_ = j.at("name").get<std::string>();
    classes_ = j.value("classes", std::vector<std::string>{});
  } catch (const json::exception& e) {
    terminate();
    throw ProtocolError(std::string("bad handshake: ") + e.what(), hello);
  } catch (const ProtocolError&) {
    terminate();
    throw;
  }
}

AdapterProcess::~AdapterProcess() { terminate(); }

void AdapterProcess::terminate() {
  if (to_child_ >= 0) ::close(to_child_);
  to_child_ = -1;
  if (pid_ > 0) {
    // Closing stdin asks the adapter to exit; give it a moment before killing.
    int status = 0;
    for (int i = 0; i < 50; ++i) {
      if (::waitpid(pid_, &status, WNOHANG) == pid_) {
        pid_ = -1;
        break;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(2));
    }
    if (pid_ > 0) {
      ::kill(pid_, SIGKILL);
      ::waitpid(pid_, &status, 0);
      pid_ = -1;
    }
  }
  if (from_child_ >= 0) ::close(from_child_);
  from_child_ = -1;
  broken_ = true;
}

void AdapterProcess::send_line(const std::string& line) {
  if (!alive()) throw AdapterDead("adapter process is not running");
  std::string payload = line + "\n";
  std::size_t off = 0;
  while (off < payload.size()) {
    const ssize_t n = ::write(to_child_, payload.data() + off, payload.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      broken_ = true;
      throw AdapterDead(std::string("write to adapter failed: ") + std::strerror(errno));
    }
    off += static_cast<std::size_t>(n);
  }
}

std::string AdapterProcess::read_line() {
  const auto deadline = Clock::now() + timeout_;
  for (;;) {
    const auto nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      return line;
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
    if (left.count() <= 0) {
      broken_ = true;
      throw AdapterTimeout("adapter did not answer within " + std::to_string(timeout_.count()) + " ms");
    }
    pollfd pfd{from_child_, POLLIN, 0};
    const int rc = ::poll(&pfd, 1, static_cast<int>(left.count()));
    if (rc < 0) {
      if (errno == EINTR) continue;
      broken_ = true;
      throw AdapterDead(std::string("poll failed: ") + std::strerror(errno));
    }
    if (rc == 0) continue;
    char chunk[65536];
    const ssize_t n = ::read(from_child_, chunk, sizeof chunk);
    if (n < 0) {
      if (errno == EINTR) continue;
      broken_ = true;
      throw AdapterDead(std::string("read from adapter failed: ") + std::strerror(errno));
    }
    if (n == 0) {
      broken_ = true;
      throw AdapterDead("adapter closed its output (process exited)");
    }
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

std::string AdapterProcess::roundtrip(const std::string& line) {
  send_line(line);
  return read_line();
}

std::vector<Detection> AdapterProcess::detect(const Raster& image) {
  const std::int64_t id = next_id_++;
  send_line(make_detect_request(id, image));
  return parse_detect_response(read_line(), id);
}

std::vector<Detection> external_detect(const Raster& image, AdapterProcess& adapter) { return adapter.detect(image); }

ExternalDetector::ExternalDetector(std::string command, int processes, std::chrono::milliseconds timeout)
    : command_(std::move(command)) {
  if (processes < 1) processes = 1;
  for (int i = 0; i < processes; ++i) sessions_.push_back(std::make_unique<AdapterProcess>(command_, timeout));
  busy_.assign(sessions_.size(), false);
}

std::vector<Detection> ExternalDetector::detect(const Raster& image) {
  std::size_t slot = sessions_.size();
  for (;;) {
    {
      std::lock_guard lock(mu_);
      for (std::size_t i = 0; i < busy_.size(); ++i)
        if (!busy_[i]) {
          busy_[i] = true;
          slot = i;
          break;
        }
    }
    if (slot < sessions_.size()) break;
    std::this_thread::yield();
  }
  struct Release {
    ExternalDetector* self;
    std::size_t slot;
    ~Release() {
      std::lock_guard lock(self->mu_);
      self->busy_[slot] = false;
    }
  } release{this, slot};
  return sessions_[slot]->detect(image);
}

}  // namespace xwalk
