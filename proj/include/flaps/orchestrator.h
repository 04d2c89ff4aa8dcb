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

#ifndef FLAPS_ORCHESTRATOR_H_
#define FLAPS_ORCHESTRATOR_H_

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "flaps/dataset.h"
#include "flaps/learn.h"
#include "flaps/random.h"
#include "flaps/transport.h"

namespace flaps {

enum class Mode { kFlaps, kFl, kCentral };

std::string_view ModeName(Mode mode);
absl::StatusOr<Mode> ParseMode(std::string_view name);

// Points in a round where a client may vanish.
//   kReady: before answering the ready poll.
//   kDataReport: a cluster member fails to send its data report.
//   kPostDataReport: a cluster member leaves after its report was delivered.
//   kHeadTraining: a head leaves before uploading weights.
enum class DropPhase { kReady, kDataReport, kPostDataReport, kHeadTraining };
inline constexpr int kNumDropPhases = 4;

std::string_view DropPhaseName(DropPhase phase);
absl::StatusOr<DropPhase> ParseDropPhase(std::string_view name);

struct DropModel {
  std::array<double, kNumDropPhases> p{};

  double& at(DropPhase phase) { return p[static_cast<int>(phase)]; }
  double at(DropPhase phase) const { return p[static_cast<int>(phase)]; }
  absl::Status Validate() const;
  bool operator==(const DropModel&) const = default;
};

// Each client survives independently with probability 1 - p(phase). Order of
// the survivors follows `clients`.
std::vector<std::int64_t> ApplyDropModel(DropPhase phase,
                                         std::span<const std::int64_t> clients,
                                         const DropModel& drops, Rng& rng);

// Train/test split plus the client partition of the training rows.
struct Federation {
  TrainTestSplit data;
  std::vector<ClientShard> shards;  // shards[i].user_id == i + 1
};

absl::StatusOr<Federation> MakeFederation(const LabeledDataset& data,
                                          int n_clients, double test_fraction,
                                          std::uint64_t seed);

struct RoundConfig {
  // Number of clusters. When unset a budget is drawn per round from
  // [2, min(20, ready clients - 1)].
  std::optional<int> k;
  std::uint64_t seed = 0;
  std::vector<int> hidden;
  TrainConfig train;
  DropModel drops;
  TransportKind transport = TransportKind::kSim;
  LatencyModel latency;
  int max_attempts = 3;
  double retry_delay_s = 0;
};

struct TimingRecord {
  double t1 = 0;
  double t2 = 0;
  double t3 = 0;
  double t4 = 0;
  double total = 0;
};

enum class EdgeClass {
  kServerNode,  // model downloads and weight uploads
  kBroadcast,   // ready poll, budget, assignment and global update traffic
  kClientHead,  // data reports from members to their head
};

std::string_view EdgeClassName(EdgeClass edge);
EdgeClass EdgeClassOf(MessageType type);

using MessageCounts = std::map<std::pair<EdgeClass, MessageType>, std::int64_t>;

struct RoundResult {
  Mode mode = Mode::kFlaps;
  std::optional<int> k;
  std::uint64_t seed = 0;  // experiment seed from the config
  int attempt = 1;
  bool aborted = false;
  std::string abort_reason;
  Metrics metrics;
  TimingRecord timing;
  std::vector<LogEntry> log;
  std::vector<std::int64_t> heads;            // user ids, by cluster id
  std::vector<std::int64_t> dropped_clients;  // sorted user ids
  std::vector<double> head_train_seconds;     // per surviving head or client
  std::vector<std::string> diagnostics;
  FedWeights global;
};

// Seed driving every random stream of the given attempt. Attempt 1 uses the
// experiment seed itself.
std::uint64_t AttemptSeed(std::uint64_t seed, int attempt);

// One FLaPS round. A round that loses too many clients comes back with
// `aborted` set rather than as an error.
absl::StatusOr<RoundResult> RunFlapsRound(const Federation& federation,
                                          const RoundConfig& config,
                                          int attempt = 1);

// Re-runs an aborted round from the ready poll with the next attempt seed.
// Fails with kResourceExhausted once `config.max_attempts` is used up.
absl::StatusOr<RoundResult> RestartRound(const Federation& federation,
                                         const RoundResult& previous,
                                         const RoundConfig& config);

// RunFlapsRound followed by restarts until success or attempts run out.
absl::StatusOr<RoundResult> RunFlapsWithRestarts(const Federation& federation,
                                                 const RoundConfig& config);

// Every client trains on its own shard; the server averages all of them.
absl::StatusOr<RoundResult> RunFlBaseline(const Federation& federation,
                                          const RoundConfig& config);

// One model on the full training set; no messages.
absl::StatusOr<RoundResult> RunCentralBaseline(const Federation& federation,
                                               const RoundConfig& config);

MessageCounts CountMessages(std::span<const LogEntry> log);
std::int64_t CountEdge(const MessageCounts& counts, EdgeClass edge);
std::int64_t CountType(const MessageCounts& counts, MessageType type);

// Messages whose sender and receiver are both clients outside `heads`.
std::vector<LogEntry> TopologyViolations(std::span<const LogEntry> log,
                                         std::span<const std::int64_t> heads);

}  // namespace flaps

#endif  // FLAPS_ORCHESTRATOR_H_
