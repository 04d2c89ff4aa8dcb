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

// Runs every acceptance criterion and prints one PASS/FAIL line per
// criterion. Exits non-zero if any criterion fails.

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "flaps/ara.h"
#include "flaps/buds.h"
#include "flaps/experiment.h"
#include "flaps/learn.h"
#include "flaps/orchestrator.h"

namespace flaps {
namespace {

using Clock = std::chrono::steady_clock;

double Since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;

  // Records the first failure only; later ones are usually consequences.
  void Check(bool ok, const std::string& what) {
    if (!ok && pass) {
      pass = false;
      detail = what;
    }
  }
};

// Every round any criterion runs, for the topology check.
std::vector<RoundResult>& AllRounds() {
  static auto* rounds = new std::vector<RoundResult>;
  return *rounds;
}

RoundResult Keep(RoundResult r) {
  AllRounds().push_back(r);
  return r;
}

std::multiset<Cell> ColumnCells(const AttributeTable& t, std::size_t c) {
  std::multiset<Cell> out;
  for (const auto& row : t.rows) out.insert(row[c]);
  return out;
}

Outcome ShuffleCorrectness() {
  Outcome o;
  const auto start = Clock::now();
  std::mt19937_64 gen(1);
  for (int trial = 0; trial < 10000 && o.pass; ++trial) {
    const int n_attrs = 1 + gen() % 6;
    const std::size_t rows = 1 + gen() % 60;
    std::vector<std::string> names;
    for (int c = 0; c < n_attrs; ++c) names.push_back(fmt::format("x{}", c));
    AttributeTable t = AttributeTable::WithColumns(names);
    for (std::size_t r = 0; r < rows; ++r) {
      std::vector<Cell> row;
      for (int c = 0; c < n_attrs; ++c) {
        // Row-tagged values make any split of a tied group visible.
        const auto v = static_cast<std::int64_t>(r * 16 + gen() % 3);
        if (c % 2 == 0) {
          row.push_back({Scalar{v}});
        } else {
          row.push_back({Scalar{BitString{static_cast<std::uint8_t>(v & 1),
                                          static_cast<std::uint8_t>(r & 1)}}});
        }
      }
      t.rows.push_back(std::move(row));
    }
    std::set<std::string> query;
    for (const auto& n : names) {
      if (gen() % 2) query.insert(n);
    }
    if (query.empty()) query.insert(names.back());
    auto reduced = ReduceAttributes(t, query);
    if (!reduced.ok()) {
      o.Check(false, reduced.status().ToString());
      break;
    }
    const std::size_t m = reduced->num_columns();
    const int shufflers = static_cast<int>(m + gen() % 4);
    const int batches = 1 + gen() % 6;
    Rng rng(gen());
    Rng replay = rng;
    auto out = IterativeShuffle(*reduced, shufflers, batches, rng);
    auto plan = PlanShuffle(reduced->num_rows(), m, shufflers, batches, replay);
    if (!out.ok() || !plan.ok()) {
      o.Check(false, "shuffle failed");
      break;
    }
    o.Check(out->plan_digest == plan->Digest(),
            fmt::format("trial {}: plan digest", trial));
    o.Check(out->table.tied_groups == reduced->tied_groups,
            "tied groups changed");
    for (std::size_t c = 0; c < m; ++c) {
      o.Check(ColumnCells(out->table, c) == ColumnCells(*reduced, c),
              fmt::format("trial {}: column {} multiset changed", trial, c));
    }
    for (const auto& ids : plan->assignment) {
      o.Check(std::set<int>(ids.begin(), ids.end()).size() == ids.size(),
              fmt::format("trial {}: shuffler drawn twice in a batch", trial));
    }
  }
  const double secs = Since(start);
  o.Check(secs < 30, fmt::format("took {:.1f} s", secs));
  if (o.pass) o.detail = fmt::format("10000 tables in {:.1f} s", secs);
  return o;
}

Outcome ChannelFormula() {
  Outcome o;
  int checked = 0;
  for (int m = 1; m <= 64; ++m) {
    for (int n = 1; n <= m; ++n) {
      auto g = ChannelCount(m, n);
      o.Check(g.ok() && *g == m - n + 1, fmt::format("m={} n={}", m, n));
      ++checked;
    }
  }
  if (o.pass) o.detail = fmt::format("{} (m, n) pairs", checked);
  return o;
}

Outcome FedAvgOracle() {
  Outcome o;
  std::mt19937_64 gen(3);
  std::normal_distribution<double> g(0, 1);
  double worst = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n_clusters = 1 + gen() % 12;
    const int dim = 1 + gen() % 50;
    std::vector<ClusterWeights> clusters(n_clusters);
    for (auto& c : clusters) {
      const double scale = std::pow(10.0, static_cast<double>(gen() % 7) - 3);
      for (int p = 0; p < dim; ++p) c.params.push_back(g(gen) * scale);
      c.sample_count = 1 + gen() % 1000;
    }
    auto avg = FedAvg(clusters);
    if (!avg.ok()) {
      o.Check(false, avg.status().ToString());
      break;
    }
    // Direct weighted mean in extended precision.
    long double total = 0;
    for (const auto& c : clusters) total += c.sample_count;
    for (int p = 0; p < dim; ++p) {
      long double mean = 0, magnitude = 0;
      for (const auto& c : clusters) {
        const long double term = c.params[p] * (c.sample_count / total);
        mean += term;
        magnitude += std::fabs(term);
      }
      const double err = std::fabs(avg->params[p] - static_cast<double>(mean)) /
                         std::max(static_cast<double>(magnitude),
                                  std::numeric_limits<double>::min());
      worst = std::max(worst, err);
    }
    std::shuffle(clusters.begin(), clusters.end(), gen);
    auto permuted = FedAvg(clusters);
    for (int p = 0; p < dim; ++p) {
      const double diff = std::fabs(permuted->params[p] - avg->params[p]);
      o.Check(
          diff <= 1e-12 * std::max(std::fabs(avg->params[p]), 1e-300) ||
              diff == 0,
          fmt::format("trial {}: permutation changed position {}", trial, p));
    }
  }
  o.Check(worst <= 1e-12, fmt::format("relative error {:.3g}", worst));
  if (o.pass)
    o.detail =
        fmt::format("1000 instances, worst relative error {:.2g}", worst);
  return o;
}

Outcome WeightReportRoundTrip() {
  Outcome o;
  std::mt19937_64 gen(4);
  std::normal_distribution<double> g(0, 1);
  std::size_t largest = 0;
  for (int trial = 0; trial < 1000 && o.pass; ++trial) {
    std::size_t dim = 1 + gen() % 10000;
    if (trial == 0) dim = 10000;
    if (trial == 1) dim = 1;
    largest = std::max(largest, dim);
    std::vector<double> params(dim);
    for (double& v : params)
      v = g(gen) * std::pow(2.0, static_cast<int>(gen() % 200) - 100);
    Rng rng(gen());
    const std::int64_t count = 1 + gen() % 5000;
    auto report =
        WeightReport(params, {.cluster_id = trial, .sample_count = count}, rng);
    if (!report.ok()) {
      o.Check(false, report.status().ToString());
      break;
    }
    const AggregatedWeights agg = AggregateWeightReports({&*report, 1}, dim);
    o.Check(agg.accepted.size() == 1 && agg.diagnostics.empty(),
            fmt::format("trial {}: report rejected", trial));
    if (!o.pass) break;
    o.Check(agg.accepted[0].params == params,
            fmt::format("trial {}: values differ", trial));
    o.Check(agg.accepted[0].sample_count == count, "sample count differs");
  }
  if (o.pass)
    o.detail =
        fmt::format("1000 vectors, exact, largest dimension {}", largest);
  return o;
}

Outcome GradientCheck() {
  Outcome o;
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0, 1);
  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    Architecture arch{.input_dim = 1 + static_cast<int>(gen() % 5),
                      .hidden = {},
                      .n_classes = 2 + static_cast<int>(gen() % 4)};
    if (gen() % 2) arch.hidden.push_back(1 + static_cast<int>(gen() % 5));
    auto model = InitModel(arch, gen());
    LabeledDataset data{.dim = static_cast<std::size_t>(arch.input_dim),
                        .n_classes = arch.n_classes};
    const int n = 2 + gen() % 10;
    for (int i = 0; i < n * arch.input_dim; ++i)
      data.features.push_back(u(gen));
    for (int i = 0; i < n; ++i) data.labels.push_back(gen() % arch.n_classes);
    std::vector<std::int64_t> rows(n);
    std::iota(rows.begin(), rows.end(), 0);
    const auto analytic = LossAndGrad(*model, data, rows)->gradient;
    std::vector<double> flat = model->Flatten();
    for (std::size_t p = 0; p < flat.size(); ++p) {
      const double saved = flat[p];
      flat[p] = saved + 1e-5;
      const double up =
          LossAndGrad(*ModelParams::Unflatten(arch, flat), data, rows)->loss;
      flat[p] = saved - 1e-5;
      const double down =
          LossAndGrad(*ModelParams::Unflatten(arch, flat), data, rows)->loss;
      flat[p] = saved;
      const double numeric = (up - down) / 2e-5;
      // Gradients below 1e-6 are compared absolutely at that scale.
      const double scale =
          std::max({std::fabs(numeric), std::fabs(analytic[p]), 1e-6});
      worst = std::max(worst, std::fabs(numeric - analytic[p]) / scale);
    }
  }
  o.Check(worst <= 1e-4, fmt::format("worst relative error {:.3g}", worst));
  if (o.pass)
    o.detail = fmt::format("100 models, worst relative error {:.2g}", worst);
  return o;
}

TrainConfig ParityTraining() {
  TrainConfig t;
  t.learning_rate = 0.05;
  t.max_epochs = 300;
  return t;
}

std::vector<RoundResult>& ParityResults() {
  static auto* results = new std::vector<RoundResult>;
  return *results;
}

Outcome QualityParity() {
  Outcome o;
  const auto start = Clock::now();
  struct Named {
    std::string name;
    absl::StatusOr<LabeledDataset> data;
  };
  std::vector<Named> sets;
  sets.push_back({"synthetic", MakeSynthetic(5000, 4, 10, 11)});
  sets.push_back({"digits8x8", LoadCsv(std::string(FLAPS_TEST_DATA_DIR) +
                                       "/digits8x8.csv")});
  double min_central_margin = 1, min_fl_margin = 1;
  for (const Named& set : sets) {
    if (!set.data.ok()) {
      o.Check(false,
              fmt::format("{}: {}", set.name, set.data.status().ToString()));
      return o;
    }
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      auto fed = MakeFederation(*set.data, 200, 0.2, seed);
      if (!fed.ok()) {
        o.Check(false, fed.status().ToString());
        return o;
      }
      RoundConfig config;
      config.seed = seed;
      config.train = ParityTraining();
      auto central = RunCentralBaseline(*fed, config);
      auto fl = RunFlBaseline(*fed, config);
      if (!central.ok() || !fl.ok()) {
        o.Check(false, "baseline failed");
        return o;
      }
      ParityResults().push_back(*central);
      ParityResults().push_back(Keep(*fl));
      for (int k : {2, 5, 10, 20}) {
        config.k = k;
        auto flaps = RunFlapsRound(*fed, config);
        if (!flaps.ok() || flaps->aborted) {
          o.Check(false, fmt::format("{} seed {} k {}: round failed", set.name,
                                     seed, k));
          return o;
        }
        ParityResults().push_back(Keep(*flaps));
        const double f1 = flaps->metrics.fscore;
        const double to_central =
            0.05 - std::fabs(f1 - central->metrics.fscore);
        const double to_fl = f1 - (fl->metrics.fscore - 0.03);
        min_central_margin = std::min(min_central_margin, to_central);
        min_fl_margin = std::min(min_fl_margin, to_fl);
        o.Check(to_central >= 0,
                fmt::format("{} seed {} k {}: F1 {:.4f} vs central {:.4f}",
                            set.name, seed, k, f1, central->metrics.fscore));
        o.Check(to_fl >= 0,
                fmt::format("{} seed {} k {}: F1 {:.4f} vs FL {:.4f}", set.name,
                            seed, k, f1, fl->metrics.fscore));
      }
    }
  }
  const double secs = Since(start);
  o.Check(secs < 180, fmt::format("took {:.1f} s", secs));
  if (o.pass) {
    o.detail = fmt::format(
        "2 datasets x 3 seeds x k in {{2,5,10,20}}; slack to central {:.4f}, "
        "to FL-0.03 "
        "{:.4f}; {:.1f} s",
        min_central_margin, min_fl_margin, secs);
  }
  return o;
}

std::vector<double> Ranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = (i + j) / 2.0 + 1;
    i = j + 1;
  }
  return ranks;
}

double Spearman(const std::vector<double>& x, const std::vector<double>& y) {
  const auto rx = Ranks(x), ry = Ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

Outcome TrainingTimeTrend() {
  Outcome o;
  auto data = MakeSynthetic(5000, 16, 10, 7);
  auto fed = MakeFederation(*data, 200, 0.2, 7);
  RoundConfig config;
  config.seed = 7;
  config.hidden = {32};
  // Fixed epoch budget: with an infinite tolerance every head stops after
  // `patience` epochs, so per-head work tracks its share of the data.
  config.train.convergence_tol = std::numeric_limits<double>::infinity();
  config.train.patience = 10;
  std::vector<double> ks, t3;
  for (int k = 2; k <= 20; ++k) {
    config.k = k;
    auto r = RunFlapsRound(*fed, config);
    if (!r.ok() || r->aborted) {
      o.Check(false, fmt::format("k {}: round failed", k));
      return o;
    }
    Keep(*r);
    ks.push_back(k);
    t3.push_back(r->timing.t3);
  }
  const double rho = Spearman(ks, t3);
  o.Check(rho <= -0.8, fmt::format("Spearman {:.3f}", rho));
  o.detail = fmt::format(
      "Spearman {:.3f}; mean head t3 {:.4f} s at k=2, {:.4f} s at k=20", rho,
      t3.front(), t3.back());
  return o;
}

Outcome CommunicationScaling() {
  Outcome o;
  auto data = MakeSynthetic(4000, 8, 4, 8);
  auto fed = MakeFederation(*data, 200, 0.2, 8);
  RoundConfig config;
  config.seed = 8;
  config.k = 10;
  config.train.max_epochs = 20;
  auto flaps = RunFlapsRound(*fed, config);
  auto fl = RunFlBaseline(*fed, config);
  if (!flaps.ok() || !fl.ok()) {
    o.Check(false, "round failed");
    return o;
  }
  Keep(*flaps);
  Keep(*fl);
  // Counting oracle straight over the log.
  auto server_node = [](const RoundResult& r) {
    return std::count_if(r.log.begin(), r.log.end(), [](const LogEntry& e) {
      return e.type == MessageType::kModelDownload ||
             e.type == MessageType::kWeightReport;
    });
  };
  const auto a = server_node(*flaps), b = server_node(*fl);
  o.Check(a == 20, fmt::format("FLaPS exchanged {}", a));
  o.Check(b == 400, fmt::format("FL exchanged {}", b));
  o.Check(CountEdge(CountMessages(flaps->log), EdgeClass::kServerNode) == a,
          "edge counter disagrees with the log");
  o.detail = fmt::format("FLaPS {} vs FL {} server-node exchanges", a, b);
  return o;
}

Outcome DropRobustness() {
  Outcome o;
  auto data = MakeSynthetic(3000, 6, 5, 9);
  auto fed = MakeFederation(*data, 200, 0.2, 9);
  std::size_t dropped = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    RoundConfig config;
    config.seed = seed;
    config.k = 8;
    config.train.max_epochs = 30;
    auto clean = RunFlapsRound(*fed, config);
    config.drops.at(DropPhase::kPostDataReport) = 0.3;
    auto churned = RunFlapsRound(*fed, config);
    if (!clean.ok() || !churned.ok()) {
      o.Check(false, "round failed");
      return o;
    }
    Keep(*clean);
    Keep(*churned);
    dropped += churned->dropped_clients.size();
    o.Check(!churned->dropped_clients.empty(), "no client dropped");
    o.Check(
        clean->metrics == churned->metrics &&
            clean->global.params == churned->global.params,
        fmt::format("seed {}: metrics changed after post-report drops", seed));
  }
  RoundConfig config;
  config.k = 8;
  config.train.max_epochs = 30;
  config.drops.at(DropPhase::kReady) = 1.0;
  auto aborted = RunFlapsRound(*fed, config);
  o.Check(aborted.ok() && aborted->aborted, "ready-phase drop did not abort");
  if (!o.pass) return o;
  Keep(*aborted);
  config.drops.at(DropPhase::kReady) = 0.0;
  auto retry = RestartRound(*fed, *aborted, config);
  o.Check(retry.ok() && !retry->aborted && retry->attempt == 2,
          "restart did not succeed");
  if (o.pass) {
    Keep(*retry);
    o.detail = fmt::format(
        "5 paired seeds bit-identical ({} clients dropped after T2); abort "
        "then restart on "
        "attempt 2",
        dropped);
  }
  return o;
}

Outcome Topology() {
  Outcome o;
  std::size_t messages = 0;
  for (const RoundResult& r : AllRounds()) {
    messages += r.log.size();
    const auto bad = TopologyViolations(r.log, r.heads);
    o.Check(bad.empty(),
            fmt::format("{} client-to-client messages in a {} round",
                        bad.size(), ModeName(r.mode)));
  }
  o.Check(!AllRounds().empty(), "no rounds recorded");
  if (o.pass) {
    o.detail = fmt::format("{} rounds, {} messages, 0 violations",
                           AllRounds().size(), messages);
  }
  return o;
}

Outcome AraOracle() {
  Outcome o;
  double worst = 0;
  for (int mask = 0; mask < (1 << 12); ++mask) {
    std::vector<BitReport> reports(3);
    int bits[3][4];
    for (int r = 0; r < 3; ++r) {
      for (int p = 0; p < 4; ++p) {
        bits[r][p] = (mask >> (r * 4 + p)) & 1;
        reports[r].bits.push_back(static_cast<std::uint8_t>(bits[r][p]));
      }
    }
    // Hand oracle: tf = df/R, idf = ln((R+1)/(df+1)) + 1, weights normalized
    // to sum 1 (uniform when no bit is set anywhere).
    double raw[4], total = 0, df[4];
    for (int p = 0; p < 4; ++p) {
      df[p] = bits[0][p] + bits[1][p] + bits[2][p];
      raw[p] = (df[p] / 3.0) * (std::log(4.0 / (df[p] + 1.0)) + 1.0);
      total += raw[p];
    }
    auto constants = ComputeConstants(reports);
    auto agg = constants.ok() ? AggregateBits(reports, *constants)
                              : constants.status();
    if (!agg.ok()) {
      o.Check(false, agg.status().ToString());
      break;
    }
    for (int p = 0; p < 4; ++p) {
      const double w = total > 0 ? raw[p] / total : 0.25;
      worst = std::max(worst, std::fabs(constants->weights[p] - w));
      worst = std::max(worst, std::fabs((*agg)[p] - w * df[p]));
    }
  }
  o.Check(worst <= 1e-12, fmt::format("max error {:.3g}", worst));
  if (o.pass)
    o.detail = fmt::format("4096 report matrices, max error {:.2g}", worst);
  return o;
}

Outcome CsvSchema() {
  Outcome o;
  const auto& results = ParityResults();
  o.Check(!results.empty(), "no results to write");
  if (!o.pass) return o;
  const auto dir =
      std::filesystem::temp_directory_path() / "flaps_acceptance_csv";
  std::filesystem::create_directories(dir);
  o.Check(WriteTimeCsv(results, dir / "time.csv").ok(), "writing time.csv");
  o.Check(WriteMetricsCsv(results, dir / "metrics.csv").ok(),
          "writing metrics.csv");
  auto read = [](const std::filesystem::path& p) {
    std::ifstream f(p);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
  };
  const std::string time = read(dir / "time.csv"),
                    metrics = read(dir / "metrics.csv");
  o.Check(time.substr(0, time.find('\n')) == "mode,k,seed,t1,t2,t3,t4,total",
          "time header");
  o.Check(metrics.substr(0, metrics.find('\n')) ==
              "mode,k,seed,loss,auc,fscore,accuracy",
          "metrics header");
  auto trows = ParseResultCsv(time, kTimeCsvHeader);
  auto mrows = ParseResultCsv(metrics, kMetricsCsvHeader);
  o.Check(trows.ok() && mrows.ok() && trows->size() == results.size() &&
              mrows->size() == results.size(),
          "row count");
  if (!o.pass) return o;
  double worst = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const RoundResult& r = results[i];
    o.Check((*trows)[i].mode == r.mode && (*trows)[i].k == r.k &&
                (*trows)[i].seed == r.seed,
            fmt::format("row {} key", i));
    const double t[] = {r.timing.t1, r.timing.t2, r.timing.t3, r.timing.t4,
                        r.timing.total};
    const double m[] = {r.metrics.loss, r.metrics.auc, r.metrics.fscore,
                        r.metrics.accuracy};
    for (int j = 0; j < 5; ++j)
      worst = std::max(worst, std::fabs((*trows)[i].values[j] - t[j]));
    for (int j = 0; j < 4; ++j)
      worst = std::max(worst, std::fabs((*mrows)[i].values[j] - m[j]));
  }
  o.Check(worst <= 5e-7, fmt::format("parse-back error {:.3g}", worst));
  if (o.pass) {
    o.detail = fmt::format("{} rows per file, max parse-back error {:.2g}",
                           results.size(), worst);
  }
  return o;
}

}  // namespace
}  // namespace flaps

int main() {
  using namespace flaps;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria =
      {
          {"shuffle correctness", ShuffleCorrectness},
          {"channel formula", ChannelFormula},
          {"FedAvg oracle equivalence", FedAvgOracle},
          {"weight-report round trip", WeightReportRoundTrip},
          {"gradient check", GradientCheck},
          {"quality parity", QualityParity},
          {"training-time trend", TrainingTimeTrend},
          {"communication scaling", CommunicationScaling},
          {"drop robustness", DropRobustness},
          {"topology invariant", Topology},
          {"ARA oracle", AraOracle},
          {"CSV schema", CsvSchema},
      };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const Outcome o = criteria[i].second();
    failed += o.pass ? 0 : 1;
    std::printf("criterion %2zu %s: %s (%s)\n", i + 1, o.pass ? "PASS" : "FAIL",
                criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
