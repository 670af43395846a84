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

#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "xwalk/detect.hpp"

namespace xwalk {

// Detector exchange protocol: newline-delimited JSON over an adapter
// process's stdin/stdout.
//   adapter -> {"type":"hello","name":str,"classes":[str]}        on startup
//   client  -> {"type":"detect","id":int,"image_png_b64":str}
//   adapter -> {"type":"detections","id":int,"detections":[...]}
//           or {"type":"error","id":int,"message":str}
// Boxes are top-left anchored, in pixels.

std::string make_detect_request(std::int64_t id, const Raster& image);

/// Parses and validates one response line. Throws ProtocolError on schema or
/// invariant violations and AdapterError for an adapter-side error message.
std::vector<Detection> parse_detect_response(const std::string& line, std::int64_t expected_id);

/// One adapter process; requests are issued one at a time.
class AdapterProcess {
 public:
  static constexpr std::chrono::milliseconds kDefaultTimeout{30000};

  /// Spawns `command` through /bin/sh and waits for the hello handshake.
  explicit AdapterProcess(const std::string& command, std::chrono::milliseconds timeout = kDefaultTimeout);
  ~AdapterProcess();
  AdapterProcess(const AdapterProcess&) = delete;
  AdapterProcess& operator=(const AdapterProcess&) = delete;

  const std::string& adapter_name() const { return name_; }
  const std::vector<std::string>& classes() const { return classes_; }
  bool alive() const { return pid_ > 0 && !broken_; }

  std::vector<Detection> detect(const Raster& image);

  /// Sends a raw line and returns the next response line (test hook).
  std::string roundtrip(const std::string& line);

 private:
  void send_line(const std::string& line);
  std::string read_line();
  void terminate();

  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  bool broken_ = false;
  std::chrono::milliseconds timeout_;
  std::string buffer_;
  std::string name_;
  std::vector<std::string> classes_;
  std::int64_t next_id_ = 1;
};

/// Sends one request through the adapter and returns validated detections.
std::vector<Detection> external_detect(const Raster& image, AdapterProcess& adapter);

/// Pool of adapter processes; each call borrows an idle session.
class ExternalDetector : public Detector {
 public:
  ExternalDetector(std::string command, int processes = 1,
                   std::chrono::milliseconds timeout = AdapterProcess::kDefaultTimeout);
  std::vector<Detection> detect(const Raster& image) override;
  bool concurrent() const override { return sessions_.size() > 1; }
  std::string name() const override { return "cmd:" + command_; }

 private:
  std::string command_;
  std::vector<std::unique_ptr<AdapterProcess>> sessions_;
  std::vector<bool> busy_;
  std::mutex mu_;
};

}  // namespace xwalk
