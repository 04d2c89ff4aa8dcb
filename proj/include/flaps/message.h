// Copyright 2026 The FLaPS Simulator Authors
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

#ifndef FLAPS_MESSAGE_H_
#define FLAPS_MESSAGE_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>

#include "absl/status/statusor.h"
#include "flaps/ara.h"
#include "flaps/buds.h"
#include "flaps/learn.h"

namespace flaps {

// The server is node 0; clients use their user id.
using NodeId = std::uint32_t;
inline constexpr NodeId kServerId = 0;

namespace msg {

struct ReadyQuery {
  bool operator==(const ReadyQuery&) const = default;
};
struct ReadyAck {
  bool operator==(const ReadyAck&) const = default;
};
struct BudgetBroadcast {
  std::int64_t k = 0;
  bool operator==(const BudgetBroadcast&) const = default;
};
struct ClusterAssign {
  std::int64_t cluster_id = 0;
  NodeId head_id = 0;
  bool operator==(const ClusterAssign&) const = default;
};
struct DataReport {
  ShuffledReport report;
  bool operator==(const DataReport&) const = default;
};
struct ModelDownload {
  ModelParams model;
  bool operator==(const ModelDownload&) const = default;
};
struct WeightReport {
  ShuffledReport report;
  bool operator==(const WeightReport&) const = default;
};
struct GlobalUpdate {
  FedWeights weights;
  bool operator==(const GlobalUpdate& o) const {
    return weights.params == o.weights.params &&
           weights.total_examples == o.weights.total_examples;
  }
};

}  // namespace msg

// Variant index + 1 is the wire tag.
using MessageBody =
    std::variant<msg::ReadyQuery, msg::ReadyAck, msg::BudgetBroadcast,
                 msg::ClusterAssign, msg::DataReport, msg::ModelDownload,
                 msg::WeightReport, msg::GlobalUpdate>;

enum class MessageType : std::uint8_t {
  kReadyQuery = 1,
  kReadyAck,
  kBudgetBroadcast,
  kClusterAssign,
  kDataReport,
  kModelDownload,
  kWeightReport,
  kGlobalUpdate,
};
inline constexpr int kNumMessageTypes = 8;

std::string_view MessageTypeName(MessageType type);

struct Message {
  NodeId sender = 0;
  NodeId receiver = 0;
  // Seconds on the transport clock; set on send, not carried in the frame.
  double timestamp = 0;
  MessageBody body;

  MessageType type() const {
    return static_cast<MessageType>(body.index() + 1);
  }
};

// Frame: tag (1 byte), sender (4), receiver (4), payload length (8), payload.
// Integers are big-endian.
inline constexpr std::size_t kFrameHeaderSize = 17;

std::string EncodeFrame(const Message& message);
absl::StatusOr<Message> DecodeFrame(std::string_view frame);

// Payload length announced by a frame header.
absl::StatusOr<std::uint64_t> FramePayloadLength(std::string_view header);

std::string SerializeFedWeights(const FedWeights& weights);
absl::StatusOr<FedWeights> DeserializeFedWeights(std::string_view bytes);

}  // namespace flaps

#endif  // FLAPS_MESSAGE_H_
