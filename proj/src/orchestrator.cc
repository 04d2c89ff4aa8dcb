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

#include "flaps/orchestrator.h"

#include <algorithm>
#include <chrono>
#include <memory>
#include <numeric>
#include <random>
#include <set>
#include <thread>

#include "flaps/ara.h"
#include "flaps/buds.h"
#include "flaps/clustering.h"
#include "flaps/status_macros.h"
#include "flaps/str_util.h"

namespace flaps {
namespace {

using Clock = std::chrono::steady_clock;

double SecondsSince(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Rng DropRng(std::uint64_t round_seed, DropPhase phase) {
  return MakeRng(round_seed, Stream::kDrop, static_cast<std::uint64_t>(phase));
}

// Attributes of a client's data report; the index range is the query.
constexpr int kReportAttributes = 5;
constexpr int kReportQueryAttributes = 2;

absl::StatusOr<AttributeTable> ClientReportTable(const ClientShard& shard,
                                                 std::int64_t cluster_id,
                                                 const OneHotCodec& codec) {
  AttributeTable t = AttributeTable::WithColumns(
      {std::string(kUserIdAttr), std::string(kCountAttr),
       std::string(kMaxIndexAttr), std::string(kMinIndexAttr),
       std::string(kClusterIdAttr)});
  FLAPS_ASSIGN_OR_RETURN(BitString user,
                         codec.EncodeValue(kUserIdAttr, shard.user_id));
  FLAPS_ASSIGN_OR_RETURN(BitString count,
                         codec.EncodeValue(kCountAttr, shard.count));
  t.rows.push_back({Cell{std::move(user)}, Cell{std::move(count)},
                    Cell{shard.max_index}, Cell{shard.min_index},
                    Cell{cluster_id}});
  return ReduceAttributes(
      t, {std::string(kMaxIndexAttr), std::string(kMinIndexAttr)});
}

absl::Status AppendRows(const AttributeTable& from, AttributeTable& into) {
  if (from.column_names != into.column_names ||
      from.tied_groups != into.tied_groups) {
    return absl::InvalidArgumentError(
        "data report columns do not match the head's");
  }
  into.rows.insert(into.rows.end(), from.rows.begin(), from.rows.end());
  return absl::OkStatus();
}

// Shared bookkeeping for the message-driven rounds.
class Round {
 public:
  Round(const Federation& federation, const RoundConfig& config, Mode mode,
        int attempt)
      : fed_(federation),
        config_(config),
        round_seed_(AttemptSeed(config.seed, attempt)) {
    result_.mode = mode;
    result_.seed = config.seed;
    result_.attempt = attempt;
  }

  absl::Status Init() {
    FLAPS_RETURN_IF_ERROR(config_.train.Validate());
    FLAPS_RETURN_IF_ERROR(config_.drops.Validate());
    FLAPS_ASSIGN_OR_RETURN(
        transport_,
        MakeTransport(config_.transport, config_.latency, round_seed_));
    const Architecture arch{.input_dim = static_cast<int>(fed_.data.train.dim),
                            .hidden = config_.hidden,
                            .n_classes = fed_.data.train.n_classes};
    FLAPS_ASSIGN_OR_RETURN(
        init_, InitModel(arch, DeriveSeed(config_.seed, Stream::kInit)));
    return absl::OkStatus();
  }

  Transport& net() { return *transport_; }
  RoundResult& result() { return result_; }
  const ModelParams& init() const { return init_; }
  std::uint64_t round_seed() const { return round_seed_; }

  absl::Status Send(NodeId from, NodeId to, MessageBody body) {
    return transport_->Send(Message{from, to, 0, std::move(body)});
  }

  void Drop(std::int64_t user) { dropped_.insert(user); }
  bool IsDropped(std::int64_t user) const { return dropped_.contains(user); }

  RoundResult Abort(std::string reason) {
    result_.aborted = true;
    result_.abort_reason = std::move(reason);
    return Finish();
  }

  RoundResult Finish() {
    result_.dropped_clients.assign(dropped_.begin(), dropped_.end());
    result_.log = transport_->log();
    const TimingRecord& t = result_.timing;
    result_.timing.total = t.t1 + t.t2 + t.t3 + t.t4;
    return std::move(result_);
  }

  // Aggregates the weight reports in the server mailbox, averages, evaluates
  // and broadcasts the global model to `recipients`.
  absl::Status AggregateAndBroadcast(std::span<const std::int64_t> recipients) {
    std::vector<ShuffledReport> reports;
    for (Message& m : transport_->Drain(kServerId)) {
      if (auto* w = std::get_if<msg::WeightReport>(&m.body)) {
        reports.push_back(std::move(w->report));
      }
    }
    AggregatedWeights agg = AggregateWeightReports(reports, init_.NumParams());
    result_.diagnostics.insert(result_.diagnostics.end(),
                               agg.diagnostics.begin(), agg.diagnostics.end());
    FLAPS_ASSIGN_OR_RETURN(result_.global, FedAvg(agg.accepted));
    FLAPS_ASSIGN_OR_RETURN(
        ModelParams model,
        ModelParams::Unflatten(init_.arch, result_.global.params));
    FLAPS_ASSIGN_OR_RETURN(result_.metrics, Evaluate(model, fed_.data.test));
    for (std::int64_t user : recipients) {
      if (IsDropped(user)) continue;
      FLAPS_RETURN_IF_ERROR(Send(kServerId, static_cast<NodeId>(user),
                                 msg::GlobalUpdate{result_.global}));
    }
    return transport_->Flush();
  }

 private:
  const Federation& fed_;
  const RoundConfig& config_;
  std::uint64_t round_seed_;
  std::unique_ptr<Transport> transport_;
  ModelParams init_;
  std::set<std::int64_t> dropped_;
  RoundResult result_;
};

std::vector<std::int64_t> AllClients(const Federation& fed) {
  std::vector<std::int64_t> ids;
  for (const ClientShard& s : fed.shards) ids.push_back(s.user_id);
  return ids;
}

std::vector<std::int64_t> ShardIndices(const ClientShard& shard) {
  std::vector<std::int64_t> out;
  for (std::int64_t i = shard.min_index; i <= shard.max_index; ++i)
    out.push_back(i);
  return out;
}

double Mean(std::span<const double> v) {
  if (v.empty()) return 0;
  return std::accumulate(v.begin(), v.end(), 0.0) /
         static_cast<double>(v.size());
}

}  // namespace

std::string_view ModeName(Mode mode) {
  switch (mode) {
    case Mode::kFlaps:
      return "flaps";
    case Mode::kFl:
      return "fl";
    case Mode::kCentral:
      return "central";
  }
  return "unknown";
}

absl::StatusOr<Mode> ParseMode(std::string_view name) {
  for (Mode m : {Mode::kFlaps, Mode::kFl, Mode::kCentral}) {
    if (ModeName(m) == name) return m;
  }
  return absl::InvalidArgumentError(
      StrCat("unknown mode '", name, "', expected flaps, fl or central"));
}

std::string_view DropPhaseName(DropPhase phase) {
  switch (phase) {
    case DropPhase::kReady:
      return "ready";
    case DropPhase::kDataReport:
      return "data_report";
    case DropPhase::kPostDataReport:
      return "post_data_report";
    case DropPhase::kHeadTraining:
      return "head_training";
  }
  return "unknown";
}

absl::StatusOr<DropPhase> ParseDropPhase(std::string_view name) {
  for (int i = 0; i < kNumDropPhases; ++i) {
    const auto phase = static_cast<DropPhase>(i);
    if (DropPhaseName(phase) == name) return phase;
  }
  return absl::InvalidArgumentError(StrCat(
      "unknown drop phase '", name,
      "', expected ready, data_report, post_data_report or head_training"));
}

absl::Status DropModel::Validate() const {
  for (int i = 0; i < kNumDropPhases; ++i) {
    if (!(p[i] >= 0 && p[i] <= 1)) {
      return absl::InvalidArgumentError(StrCat(
          "drop probability for ", DropPhaseName(static_cast<DropPhase>(i)),
          " must be in [0, 1], got ", p[i]));
    }
  }
  return absl::OkStatus();
}

std::vector<std::int64_t> ApplyDropModel(DropPhase phase,
                                         std::span<const std::int64_t> clients,
                                         const DropModel& drops, Rng& rng) {
  std::bernoulli_distribution drop(drops.at(phase));
  std::vector<std::int64_t> out;
  for (std::int64_t c : clients) {
    if (!drop(rng)) out.push_back(c);
  }
  return out;
}

absl::StatusOr<Federation> MakeFederation(const LabeledDataset& data,
                                          int n_clients, double test_fraction,
                                          std::uint64_t seed) {
  FLAPS_RETURN_IF_ERROR(data.Validate());
  Federation fed;
  FLAPS_ASSIGN_OR_RETURN(fed.data, SplitTrainTest(data, test_fraction, seed));
  FLAPS_ASSIGN_OR_RETURN(
      fed.shards,
      PartitionRandom(static_cast<std::int64_t>(fed.data.train.size()),
                      n_clients, seed));
  return fed;
}

std::string_view EdgeClassName(EdgeClass edge) {
  switch (edge) {
    case EdgeClass::kServerNode:
      return "server_node";
    case EdgeClass::kBroadcast:
      return "broadcast";
    case EdgeClass::kClientHead:
      return "client_head";
  }
  return "unknown";
}

EdgeClass EdgeClassOf(MessageType type) {
  switch (type) {
    case MessageType::kModelDownload:
    case MessageType::kWeightReport:
      return EdgeClass::kServerNode;
    case MessageType::kDataReport:
      return EdgeClass::kClientHead;
    default:
      return EdgeClass::kBroadcast;
  }
}

std::uint64_t AttemptSeed(std::uint64_t seed, int attempt) {
  return attempt <= 1 ? seed
                      : DeriveSeed(seed, Stream::kRestart,
                                   static_cast<std::uint64_t>(attempt));
}

absl::StatusOr<RoundResult> RunFlapsRound(const Federation& fed,
                                          const RoundConfig& config,
                                          int attempt) {
  const int n = static_cast<int>(fed.shards.size());
  if (config.k.has_value() && (*config.k < 2 || *config.k >= n)) {
    return absl::InvalidArgumentError(
        StrCat("k must satisfy 2 <= k < n_clients (", n, "), got ", *config.k));
  }
  Round round(fed, config, Mode::kFlaps, attempt);
  FLAPS_RETURN_IF_ERROR(round.Init());
  Transport& net = round.net();
  RoundResult& res = round.result();
  const std::uint64_t seed = round.round_seed();
  const std::vector<std::int64_t> everyone = AllClients(fed);
  auto shard_of = [&](std::int64_t user) -> const ClientShard& {
    return fed.shards[static_cast<std::size_t>(user - 1)];
  };

  // T1: ready poll, budget, clustering.
  auto start = Clock::now();
  for (std::int64_t c : everyone) {
    FLAPS_RETURN_IF_ERROR(
        round.Send(kServerId, static_cast<NodeId>(c), msg::ReadyQuery{}));
  }
  FLAPS_RETURN_IF_ERROR(net.Flush());
  Rng ready_rng = DropRng(seed, DropPhase::kReady);
  const auto alive =
      ApplyDropModel(DropPhase::kReady, everyone, config.drops, ready_rng);
  for (std::int64_t c : everyone) net.Drain(static_cast<NodeId>(c));
  for (std::int64_t c : alive) {
    FLAPS_RETURN_IF_ERROR(
        round.Send(static_cast<NodeId>(c), kServerId, msg::ReadyAck{}));
  }
  FLAPS_RETURN_IF_ERROR(net.Flush());
  std::vector<std::int64_t> ready;
  for (const Message& m : net.Drain(kServerId)) ready.push_back(m.sender);
  std::sort(ready.begin(), ready.end());
  for (std::int64_t c : everyone) {
    if (!std::binary_search(ready.begin(), ready.end(), c)) round.Drop(c);
  }
  const int n_ready = static_cast<int>(ready.size());
  int k = 0;
  if (config.k.has_value()) {
    k = *config.k;
  } else if (n_ready >= 3) {
    Rng budget_rng = MakeRng(seed, Stream::kBudget);
    FLAPS_ASSIGN_OR_RETURN(
        k, ChooseBudget(budget_rng, 2, std::min(20, n_ready - 1)));
  }
  if (k == 0 || n_ready <= k) {
    res.timing.t1 = SecondsSince(start);
    return round.Abort(StrCat(
        n_ready, " of ", n, " clients answered the ready poll; need more than ",
        std::max(k, 2)));
  }
  res.k = k;
  for (std::int64_t c : ready) {
    FLAPS_RETURN_IF_ERROR(
        round.Send(kServerId, static_cast<NodeId>(c), msg::BudgetBroadcast{k}));
  }
  std::vector<ClientShard> ready_shards;
  for (std::int64_t c : ready) ready_shards.push_back(shard_of(c));
  const auto features = ClientFeatures(ready_shards);
  FLAPS_ASSIGN_OR_RETURN(
      ClusterAssignment clusters,
      KMeans(features, k, DeriveSeed(seed, Stream::kKMeans)));
  for (std::size_t h : clusters.heads) res.heads.push_back(ready[h]);
  for (std::size_t i = 0; i < ready.size(); ++i) {
    const int c = clusters.labels[i];
    FLAPS_RETURN_IF_ERROR(
        round.Send(kServerId, static_cast<NodeId>(ready[i]),
                   msg::ClusterAssign{c, static_cast<NodeId>(res.heads[c])}));
  }
  FLAPS_RETURN_IF_ERROR(net.Flush());
  std::map<std::int64_t, msg::ClusterAssign> assigned;
  for (std::int64_t c : ready) {
    for (Message& m : net.Drain(static_cast<NodeId>(c))) {
      if (auto* a = std::get_if<msg::ClusterAssign>(&m.body)) assigned[c] = *a;
    }
  }
  res.timing.t1 = SecondsSince(start);

  // T2: members report their shard metadata to their head.
  start = Clock::now();
  const std::set<std::int64_t> head_set(res.heads.begin(), res.heads.end());
  std::vector<std::int64_t> members;
  for (std::int64_t c : ready) {
    if (!head_set.contains(c)) members.push_back(c);
  }
  FLAPS_ASSIGN_OR_RETURN(
      OneHotCodec codec,
      OneHotCodec::FromShards(
          fed.shards, {std::string(kUserIdAttr), std::string(kCountAttr)}));
  FLAPS_ASSIGN_OR_RETURN(
      const int channels,
      ChannelCount(kReportAttributes, kReportQueryAttributes));
  Rng report_drop_rng = DropRng(seed, DropPhase::kDataReport);
  const auto reporting = ApplyDropModel(DropPhase::kDataReport, members,
                                        config.drops, report_drop_rng);
  for (std::int64_t c : members) {
    if (!std::binary_search(reporting.begin(), reporting.end(), c))
      round.Drop(c);
  }
  for (std::int64_t c : reporting) {
    const msg::ClusterAssign& a = assigned.at(c);
    FLAPS_ASSIGN_OR_RETURN(AttributeTable table,
                           ClientReportTable(shard_of(c), a.cluster_id, codec));
    Rng shuffle_rng =
        MakeRng(seed, Stream::kDataShuffle, static_cast<std::uint64_t>(c));
    FLAPS_ASSIGN_OR_RETURN(ShuffledReport report,
                           IterativeShuffle(table, channels, 1, shuffle_rng));
    FLAPS_RETURN_IF_ERROR(round.Send(static_cast<NodeId>(c), a.head_id,
                                     msg::DataReport{std::move(report)}));
  }
  FLAPS_RETURN_IF_ERROR(net.Flush());
  std::vector<AttributeTable> head_tables(k);
  for (int c = 0; c < k; ++c) {
    const std::int64_t head = res.heads[c];
    FLAPS_ASSIGN_OR_RETURN(head_tables[c],
                           ClientReportTable(shard_of(head), c, codec));
    for (Message& m : net.Drain(static_cast<NodeId>(head))) {
      if (auto* d = std::get_if<msg::DataReport>(&m.body)) {
        FLAPS_RETURN_IF_ERROR(AppendRows(d->report.table, head_tables[c]));
      }
    }
  }
  // Members leaving now cannot take back what their head already holds.
  Rng post_rng = DropRng(seed, DropPhase::kPostDataReport);
  const auto staying = ApplyDropModel(DropPhase::kPostDataReport, reporting,
                                      config.drops, post_rng);
  for (std::int64_t c : reporting) {
    if (!std::binary_search(staying.begin(), staying.end(), c)) round.Drop(c);
  }
  res.timing.t2 = SecondsSince(start);

  // T3: heads merge, train and upload privatized weights.
  start = Clock::now();
  Rng head_rng = DropRng(seed, DropPhase::kHeadTraining);
  std::vector<std::int64_t> cluster_ids(k);
  std::iota(cluster_ids.begin(), cluster_ids.end(), 0);
  const auto training = ApplyDropModel(DropPhase::kHeadTraining, cluster_ids,
                                       config.drops, head_rng);
  for (std::int64_t c : cluster_ids) {
    if (!std::binary_search(training.begin(), training.end(), c))
      round.Drop(res.heads[c]);
  }
  if (training.empty()) {
    res.timing.t3 = SecondsSince(start);
    return round.Abort(
        StrCat("all ", k, " cluster heads dropped before training"));
  }
  for (std::int64_t c : training) {
    FLAPS_RETURN_IF_ERROR(round.Send(kServerId,
                                     static_cast<NodeId>(res.heads[c]),
                                     msg::ModelDownload{round.init()}));
  }
  FLAPS_RETURN_IF_ERROR(net.Flush());
  for (std::int64_t c : training) {
    const auto head = static_cast<NodeId>(res.heads[c]);
    std::optional<ModelParams> model;
    for (Message& m : net.Drain(head)) {
      if (auto* d = std::get_if<msg::ModelDownload>(&m.body))
        model = std::move(d->model);
    }
    if (!model.has_value()) {
      return absl::InternalError(StrCat("head ", head, " received no model"));
    }
    const auto head_start = Clock::now();
    const AttributeTable& table = head_tables[c];
    Rng shuffle_rng = MakeRng(seed, Stream::kDataShuffle,
                              static_cast<std::uint64_t>(n + 1 + c));
    FLAPS_ASSIGN_OR_RETURN(
        ShuffledReport merged,
        IterativeShuffle(table, channels, DefaultBatchCount(table.num_rows()),
                         shuffle_rng));
    FLAPS_ASSIGN_OR_RETURN(
        std::vector<std::int64_t> indices,
        MergeDataReports(std::span<const ShuffledReport>(&merged, 1)));
    Rng train_rng = MakeRng(seed, Stream::kTrain);
    FLAPS_ASSIGN_OR_RETURN(
        TrainResult trained,
        TrainUntilConverged(*std::move(model), fed.data.train, indices,
                            config.train, train_rng));
    Rng weight_rng =
        MakeRng(seed, Stream::kWeightShuffle, static_cast<std::uint64_t>(c));
    FLAPS_ASSIGN_OR_RETURN(
        ShuffledReport report,
        WeightReport(trained.params.Flatten(),
                     {c, static_cast<std::int64_t>(indices.size())},
                     weight_rng));
    FLAPS_RETURN_IF_ERROR(
        round.Send(head, kServerId, msg::WeightReport{std::move(report)}));
    res.head_train_seconds.push_back(SecondsSince(head_start));
  }
  FLAPS_RETURN_IF_ERROR(net.Flush());
  // Heads train in parallel in the modeled system, so T3 is the mean.
  res.timing.t3 = Mean(res.head_train_seconds);

  // T4: server aggregation.
  start = Clock::now();
  FLAPS_RETURN_IF_ERROR(round.AggregateAndBroadcast(ready));
  res.timing.t4 = SecondsSince(start);
  return round.Finish();
}

absl::StatusOr<RoundResult> RestartRound(const Federation& federation,
                                         const RoundResult& previous,
                                         const RoundConfig& config) {
  if (!previous.aborted) {
    return absl::FailedPreconditionError(
        "only an aborted round can be restarted");
  }
  const int next = previous.attempt + 1;
  if (next > config.max_attempts) {
    return absl::ResourceExhaustedError(
        StrCat("round aborted on all ", config.max_attempts,
               " attempts; last reason: ", previous.abort_reason));
  }
  if (config.retry_delay_s > 0) {
    std::this_thread::sleep_for(
        std::chrono::duration<double>(config.retry_delay_s));
  }
  return RunFlapsRound(federation, config, next);
}

absl::StatusOr<RoundResult> RunFlapsWithRestarts(const Federation& federation,
                                                 const RoundConfig& config) {
  FLAPS_ASSIGN_OR_RETURN(RoundResult result, RunFlapsRound(federation, config));
  while (result.aborted) {
    FLAPS_ASSIGN_OR_RETURN(result, RestartRound(federation, result, config));
  }
  return result;
}

absl::StatusOr<RoundResult> RunFlBaseline(const Federation& fed,
                                          const RoundConfig& config) {
  Round round(fed, config, Mode::kFl, 1);
  FLAPS_RETURN_IF_ERROR(round.Init());
  Transport& net = round.net();
  RoundResult& res = round.result();
  const std::vector<std::int64_t> everyone = AllClients(fed);

  for (std::int64_t c : everyone) {
    FLAPS_RETURN_IF_ERROR(round.Send(kServerId, static_cast<NodeId>(c),
                                     msg::ModelDownload{round.init()}));
  }
  FLAPS_RETURN_IF_ERROR(net.Flush());
  for (std::int64_t c : everyone) {
    const ClientShard& shard = fed.shards[static_cast<std::size_t>(c - 1)];
    std::optional<ModelParams> model;
    for (Message& m : net.Drain(static_cast<NodeId>(c))) {
      if (auto* d = std::get_if<msg::ModelDownload>(&m.body))
        model = std::move(d->model);
    }
    if (!model.has_value() || shard.count == 0) continue;
    const auto client_start = Clock::now();
    Rng train_rng = MakeRng(round.round_seed(), Stream::kTrain);
    FLAPS_ASSIGN_OR_RETURN(
        TrainResult trained,
        TrainUntilConverged(*std::move(model), fed.data.train,
                            ShardIndices(shard), config.train, train_rng));
    Rng weight_rng = MakeRng(round.round_seed(), Stream::kWeightShuffle,
                             static_cast<std::uint64_t>(c));
    FLAPS_ASSIGN_OR_RETURN(
        ShuffledReport report,
        WeightReport(trained.params.Flatten(), {c, shard.count}, weight_rng));
    FLAPS_RETURN_IF_ERROR(round.Send(static_cast<NodeId>(c), kServerId,
                                     msg::WeightReport{std::move(report)}));
    res.head_train_seconds.push_back(SecondsSince(client_start));
  }
  FLAPS_RETURN_IF_ERROR(net.Flush());
  res.timing.t3 = Mean(res.head_train_seconds);

  const auto start = Clock::now();
  FLAPS_RETURN_IF_ERROR(round.AggregateAndBroadcast(everyone));
  res.timing.t4 = SecondsSince(start);
  return round.Finish();
}

absl::StatusOr<RoundResult> RunCentralBaseline(const Federation& fed,
                                               const RoundConfig& config) {
  Round round(fed, config, Mode::kCentral, 1);
  FLAPS_RETURN_IF_ERROR(round.Init());
  RoundResult& res = round.result();
  std::vector<std::int64_t> all(fed.data.train.size());
  std::iota(all.begin(), all.end(), 0);

  auto start = Clock::now();
  Rng train_rng = MakeRng(round.round_seed(), Stream::kTrain);
  FLAPS_ASSIGN_OR_RETURN(TrainResult trained,
                         TrainUntilConverged(round.init(), fed.data.train, all,
                                             config.train, train_rng));
  res.head_train_seconds.push_back(SecondsSince(start));
  res.timing.t3 = res.head_train_seconds.back();

  start = Clock::now();
  res.global = {trained.params.Flatten(),
                static_cast<std::int64_t>(all.size())};
  FLAPS_ASSIGN_OR_RETURN(res.metrics, Evaluate(trained.params, fed.data.test));
  res.timing.t4 = SecondsSince(start);
  return round.Finish();
}

MessageCounts CountMessages(std::span<const LogEntry> log) {
  MessageCounts counts;
  for (const LogEntry& e : log) ++counts[{EdgeClassOf(e.type), e.type}];
  return counts;
}

std::int64_t CountEdge(const MessageCounts& counts, EdgeClass edge) {
  std::int64_t total = 0;
  for (const auto& [key, n] : counts) {
    if (key.first == edge) total += n;
  }
  return total;
}

std::int64_t CountType(const MessageCounts& counts, MessageType type) {
  auto it = counts.find({EdgeClassOf(type), type});
  return it == counts.end() ? 0 : it->second;
}

std::vector<LogEntry> TopologyViolations(std::span<const LogEntry> log,
                                         std::span<const std::int64_t> heads) {
  auto plain_client = [&](NodeId id) {
    return id != kServerId &&
           std::find(heads.begin(), heads.end(),
                     static_cast<std::int64_t>(id)) == heads.end();
  };
  std::vector<LogEntry> out;
  for (const LogEntry& e : log) {
    if (plain_client(e.sender) && plain_client(e.receiver)) out.push_back(e);
  }
  return out;
}

}  // namespace flaps
