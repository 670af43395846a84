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

#include <chrono>
#include <string>

#include <gtest/gtest.h>
#include <json.hpp>

#include "xwalk/adapter.hpp"
#include "xwalk/errors.hpp"
#include "xwalk/image_io.hpp"

namespace xwalk {
namespace {

using namespace std::chrono_literals;

std::string mock(const std::string& args) { return std::string(XWALK_MOCK_ADAPTER) + " " + args; }

TEST(Protocol, RequestCarriesPng) {
  Raster img(3, 2, 3, 0.0);
  img.at(2, 1, 0) = 1.0;
  const auto j = nlohmann::json::parse(make_detect_request(17, img));
  EXPECT_EQ(j.at("type"), "detect");
  EXPECT_EQ(j.at("id"), 17);
  EXPECT_EQ(decode_png(base64_decode(j.at("image_png_b64").get<std::string>())), img);
}

TEST(Protocol, ParseResponse) {
  const std::string ok =
      R"({"type":"detections","id":4,"detections":[{"x":1,"y":2,"w":3,"h":4,"objectness":0.5,"class_scores":null}]})";
  const auto dets = parse_detect_response(ok, 4);
  ASSERT_EQ(dets.size(), 1u);
  EXPECT_EQ(dets[0].box, (Box{1, 2, 3, 4}));
  EXPECT_THROW(parse_detect_response(ok, 5), ProtocolError);
  EXPECT_THROW(parse_detect_response(R"({"type":"error","id":4,"message":"x"})", 4), AdapterError);
  EXPECT_THROW(parse_detect_response(R"({"type":"detections","id":4})", 4), ProtocolError);
  EXPECT_THROW(parse_detect_response(R"({"type":"detections","id":4,"detections":[{"x":1,"y":2,"w":-3,"h":4,"objectness":0.5}]})", 4),
               ProtocolError);
  try {
    parse_detect_response("garbage", 1);
    FAIL();
  } catch (const ProtocolError& e) {
    EXPECT_EQ(e.payload(), "garbage");
  }
}

TEST(Adapter, HandshakeAndFixedList) {
  AdapterProcess p(mock("fixed"), 5000ms);
  EXPECT_EQ(p.adapter_name(), "mock-fixed");
  ASSERT_EQ(p.classes().size(), 1u);
  for (int i = 0; i < 3; ++i) {
    const auto dets = external_detect(Raster(8, 8, 3, 0.5), p);
    ASSERT_EQ(dets.size(), 1u);
    EXPECT_EQ(dets[0].box, (Box{1, 2, 3, 4}));
    EXPECT_EQ(dets[0].objectness, 0.8);
    ASSERT_TRUE(dets[0].class_scores);
  }
}

TEST(Adapter, ImageArrivesIntact) {
  AdapterProcess p(mock("size"), 5000ms);
  const auto dets = p.detect(Raster(37, 21, 3, 0.1));
  ASSERT_EQ(dets.size(), 1u);
  EXPECT_EQ(dets[0].box.w, 37);
  EXPECT_EQ(dets[0].box.h, 21);
}

TEST(Adapter, ObjectnessAboveOneIsProtocolError) {
  AdapterProcess p(mock("bad-objectness"), 5000ms);
  try {
    p.detect(Raster(4, 4, 3));
    FAIL();
  } catch (const ProtocolError& e) {
    EXPECT_NE(e.payload().find("1.5"), std::string::npos);
  }
}

TEST(Adapter, MalformedResponseKeepsPayload) {
  AdapterProcess p(mock("malformed"), 5000ms);
  try {
    p.detect(Raster(4, 4, 3));
    FAIL();
  } catch (const ProtocolError& e) {
    EXPECT_NE(e.payload().find("\"detections\": ["), std::string::npos);
  }
}

TEST(Adapter, WrongIdIsProtocolError) {
  AdapterProcess p(mock("wrong-id"), 5000ms);
  EXPECT_THROW(p.detect(Raster(4, 4, 3)), ProtocolError);
}

TEST(Adapter, ErrorResponseLeavesProcessAlive) {
  AdapterProcess p(mock("error"), 5000ms);
  EXPECT_THROW(p.detect(Raster(4, 4, 3)), AdapterError);
  EXPECT_TRUE(p.alive());
  EXPECT_THROW(p.detect(Raster(4, 4, 3)), AdapterError);
}

TEST(Adapter, SlowAdapterTimesOut) {
  AdapterProcess p(mock("delay 2000"), 200ms);
  const auto start = std::chrono::steady_clock::now();
  EXPECT_THROW(p.detect(Raster(4, 4, 3)), AdapterTimeout);
  EXPECT_LT(std::chrono::steady_clock::now() - start, 1500ms);
  EXPECT_FALSE(p.alive());
  EXPECT_THROW(p.detect(Raster(4, 4, 3)), AdapterDead);
}

TEST(Adapter, DelayWithinTimeoutSucceeds) {
  AdapterProcess p(mock("delay 50"), 3000ms);
  EXPECT_EQ(p.detect(Raster(4, 4, 3)).size(), 1u);
}

TEST(Adapter, CrashIsAdapterDead) {
  AdapterProcess p(mock("crash"), 5000ms);
  EXPECT_THROW(p.detect(Raster(4, 4, 3)), AdapterDead);
  EXPECT_FALSE(p.alive());
}

TEST(Adapter, StartupFailures) {
  EXPECT_THROW(AdapterProcess(mock("silent"), 200ms), AdapterTimeout);
  EXPECT_THROW(AdapterProcess(mock("bad-hello"), 5000ms), ProtocolError);
  EXPECT_THROW(AdapterProcess(mock("fail-start"), 5000ms), AdapterError);
  EXPECT_THROW(AdapterProcess("exit 0", 5000ms), AdapterDead);
  EXPECT_THROW(AdapterProcess("/nonexistent/adapter", 5000ms), AdapterDead);
}

TEST(Adapter, RawRoundTripOfBadRequest) {
  AdapterProcess p(mock("fixed"), 5000ms);
  const auto reply = nlohmann::json::parse(p.roundtrip("{not json"));
  EXPECT_EQ(reply.at("type"), "error");
  EXPECT_EQ(p.detect(Raster(4, 4, 3)).size(), 1u);
}

TEST(ExternalDetectorPool, ConcurrentRequests) {
  ExternalDetector det(mock("size"), 3, 5000ms);
  EXPECT_TRUE(det.concurrent());
  std::vector<int> widths(24, 0);
#pragma omp parallel for num_threads(3)
  for (int i = 0; i < 24; ++i) widths[i] = static_cast<int>(det.detect(Raster(10 + i, 10, 3)).at(0).box.w);
  for (int i = 0; i < 24; ++i) EXPECT_EQ(widths[i], 10 + i);
  EXPECT_EQ(det.max_objectness(Raster(10, 10, 3)), 0.5);
}

}  // namespace
}  // namespace xwalk
