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

#ifndef FLAPS_TRANSPORT_H_
#define FLAPS_TRANSPORT_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "flaps/message.h"
#include "flaps/random.h"

namespace flaps {

struct LogEntry {
  MessageType type = MessageType::kReadyQuery;
  NodeId sender = 0;
  NodeId receiver = 0;
  double timestamp = 0;
  std::size_t payload_bytes = 0;
};

// Delivers framed messages to per-node mailboxes. Every message crosses the
// codec in both directions, so receivers only ever see decoded frames.
class Transport {
 public:
  virtual ~Transport() = default;

  virtual absl::Status Send(Message message) = 0;
  // Blocks until every sent message has been delivered, then advances the
  // clock past the last delivery.
  virtual absl::Status Flush() = 0;
  // Removes and returns the messages delivered to `node`, in delivery order.
  std::vector<Message> Drain(NodeId node);

  virtual double Now() const { return clock_; }
  // One entry per delivered message, in delivery order.
  const std::vector<LogEntry>& log() const { return log_; }

 protected:
  // Records the message in the log and places it in the receiver's mailbox.
  void Deliver(Message message, std::size_t payload_bytes);

  double clock_ = 0;
  std::vector<LogEntry> log_;
  std::map<NodeId, std::vector<Message>> mailboxes_;
};

// Fixed plus uniform jitter delay, in simulated seconds.
struct LatencyModel {
  double fixed_s = 1e-3;
  double jitter_s = 5e-4;
  absl::Status Validate() const;
  bool operator==(const LatencyModel&) const = default;
};

// In-process delivery on a simulated clock. Fully deterministic for a seed.
class SimTransport : public Transport {
 public:
  SimTransport(LatencyModel latency, std::uint64_t seed);

  absl::Status Send(Message message) override;
  absl::Status Flush() override;

 private:
  LatencyModel latency_;
  Rng rng_;
  double last_arrival_ = 0;
};

// Frames travel over a loopback TCP connection and are decoded by a receiver
// thread. Timestamps come from the monotonic clock.
class TcpTransport : public Transport {
 public:
  static absl::StatusOr<std::unique_ptr<TcpTransport>> Create();
  ~TcpTransport() override;

  absl::Status Send(Message message) override;
  absl::Status Flush() override;
  double Now() const override;

 private:
  struct Impl;
  explicit TcpTransport(std::unique_ptr<Impl> impl);
  std::unique_ptr<Impl> impl_;
};

enum class TransportKind { kSim, kTcp };

absl::StatusOr<std::unique_ptr<Transport>> MakeTransport(
    TransportKind kind, const LatencyModel& latency, std::uint64_t seed);

absl::StatusOr<TransportKind> ParseTransportKind(std::string_view name);
std::string_view TransportKindName(TransportKind kind);

}  // namespace flaps

#endif  // FLAPS_TRANSPORT_H_
