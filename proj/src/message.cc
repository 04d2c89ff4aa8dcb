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

#include "flaps/message.h"

#include <type_traits>

#include "absl/status/status.h"
#include "flaps/status_macros.h"
#include "flaps/str_util.h"
#include "flaps/wire.h"

namespace flaps {
namespace {

std::string EncodePayload(const MessageBody& body) {
  return std::visit(
      [](const auto& m) -> std::string {
        using T = std::decay_t<decltype(m)>;
        ByteWriter w;
        if constexpr (std::is_same_v<T, msg::BudgetBroadcast>) {
          w.I64(m.k);
        } else if constexpr (std::is_same_v<T, msg::ClusterAssign>) {
          w.I64(m.cluster_id);
          w.U32(m.head_id);
        } else if constexpr (std::is_same_v<T, msg::DataReport> ||
                             std::is_same_v<T, msg::WeightReport>) {
          return SerializeReport(m.report);
        } else if constexpr (std::is_same_v<T, msg::ModelDownload>) {
          return SerializeModel(m.model);
        } else if constexpr (std::is_same_v<T, msg::GlobalUpdate>) {
          return SerializeFedWeights(m.weights);
        }
        return w.Release();
      },
      body);
}

absl::Status ExpectEnd(const ByteReader& r) {
  if (!r.done()) {
    return absl::DataLossError(StrCat(
        r.remaining(), " trailing payload bytes at offset ", r.offset()));
  }
  return absl::OkStatus();
}

absl::StatusOr<MessageBody> DecodePayload(MessageType type,
                                          std::string_view payload) {
  ByteReader r(payload);
  switch (type) {
    case MessageType::kReadyQuery:
      FLAPS_RETURN_IF_ERROR(ExpectEnd(r));
      return msg::ReadyQuery{};
    case MessageType::kReadyAck:
      FLAPS_RETURN_IF_ERROR(ExpectEnd(r));
      return msg::ReadyAck{};
    case MessageType::kBudgetBroadcast: {
      FLAPS_ASSIGN_OR_RETURN(std::int64_t k, r.I64());
      FLAPS_RETURN_IF_ERROR(ExpectEnd(r));
      return msg::BudgetBroadcast{k};
    }
    case MessageType::kClusterAssign: {
      FLAPS_ASSIGN_OR_RETURN(std::int64_t cluster, r.I64());
      FLAPS_ASSIGN_OR_RETURN(std::uint32_t head, r.U32());
      FLAPS_RETURN_IF_ERROR(ExpectEnd(r));
      return msg::ClusterAssign{cluster, head};
    }
    case MessageType::kDataReport: {
      FLAPS_ASSIGN_OR_RETURN(ShuffledReport report, DeserializeReport(payload));
      return msg::DataReport{std::move(report)};
    }
    case MessageType::kModelDownload: {
      FLAPS_ASSIGN_OR_RETURN(ModelParams model, DeserializeModel(payload));
      return msg::ModelDownload{std::move(model)};
    }
    case MessageType::kWeightReport: {
      FLAPS_ASSIGN_OR_RETURN(ShuffledReport report, DeserializeReport(payload));
      return msg::WeightReport{std::move(report)};
    }
    case MessageType::kGlobalUpdate: {
      FLAPS_ASSIGN_OR_RETURN(FedWeights weights,
                             DeserializeFedWeights(payload));
      return msg::GlobalUpdate{std::move(weights)};
    }
  }
  return absl::DataLossError(
      StrCat("unknown message tag ", static_cast<int>(type)));
}

}  // namespace

std::string_view MessageTypeName(MessageType type) {
  switch (type) {
    case MessageType::kReadyQuery:
      return "ReadyQuery";
    case MessageType::kReadyAck:
      return "ReadyAck";
    case MessageType::kBudgetBroadcast:
      return "BudgetBroadcast";
    case MessageType::kClusterAssign:
      return "ClusterAssign";
    case MessageType::kDataReport:
      return "DataReport";
    case MessageType::kModelDownload:
      return "ModelDownload";
    case MessageType::kWeightReport:
      return "WeightReport";
    case MessageType::kGlobalUpdate:
      return "GlobalUpdate";
  }
  return "Unknown";
}

std::string EncodeFrame(const Message& message) {
  const std::string payload = EncodePayload(message.body);
  ByteWriter w;
  w.U8(static_cast<std::uint8_t>(message.type()));
  w.U32(message.sender);
  w.U32(message.receiver);
  w.U64(payload.size());
  w.Bytes(payload);
  return w.Release();
}

absl::StatusOr<std::uint64_t> FramePayloadLength(std::string_view header) {
  ByteReader r(header);
  FLAPS_RETURN_IF_ERROR(r.Bytes(9).status());
  return r.U64();
}

absl::StatusOr<Message> DecodeFrame(std::string_view frame) {
  ByteReader r(frame);
  FLAPS_ASSIGN_OR_RETURN(std::uint8_t tag, r.U8());
  if (tag < 1 || tag > kNumMessageTypes) {
    return absl::DataLossError(StrCat(
        "unknown message tag ", static_cast<int>(tag), " at byte offset 0"));
  }
  Message m;
  FLAPS_ASSIGN_OR_RETURN(m.sender, r.U32());
  FLAPS_ASSIGN_OR_RETURN(m.receiver, r.U32());
  FLAPS_ASSIGN_OR_RETURN(std::uint64_t length, r.U64());
  if (length != r.remaining()) {
    return absl::DataLossError(StrCat("frame announces ", length,
                                      " payload bytes but carries ",
                                      r.remaining()));
  }
  FLAPS_ASSIGN_OR_RETURN(std::string_view payload, r.Bytes(length));
  FLAPS_ASSIGN_OR_RETURN(m.body,
                         DecodePayload(static_cast<MessageType>(tag), payload));
  return m;
}

std::string SerializeFedWeights(const FedWeights& weights) {
  ByteWriter w;
  w.I64(weights.total_examples);
  w.U64(weights.params.size());
  for (double v : weights.params) w.F64(v);
  return w.Release();
}

absl::StatusOr<FedWeights> DeserializeFedWeights(std::string_view bytes) {
  ByteReader r(bytes);
  FedWeights out;
  FLAPS_ASSIGN_OR_RETURN(out.total_examples, r.I64());
  FLAPS_ASSIGN_OR_RETURN(std::uint64_t n, r.U64());
  if (n != r.remaining() / 8 || r.remaining() % 8 != 0) {
    return absl::DataLossError(StrCat("weight vector announces ", n,
                                      " values but payload holds ",
                                      r.remaining(), " bytes"));
  }
  out.params.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    FLAPS_ASSIGN_OR_RETURN(double v, r.F64());
    out.params.push_back(v);
  }
  return out;
}

}  // namespace flaps
