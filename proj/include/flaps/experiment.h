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

#ifndef FLAPS_EXPERIMENT_H_
#define FLAPS_EXPERIMENT_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "flaps/dataset.h"
#include "flaps/learn.h"
#include "flaps/orchestrator.h"
#include "flaps/transport.h"

namespace flaps {

struct DatasetSpec {
  enum class Kind { kSynthetic, kIdx, kCsv };
  Kind kind = Kind::kSynthetic;
  // kSynthetic
  int n = 5000;
  int dim = 4;
  int n_classes = 10;
  std::uint64_t seed = 0;
  // kIdx
  std::string images_path;
  std::string labels_path;
  // kCsv
  std::string csv_path;

  bool operator==(const DatasetSpec&) const = default;
};

absl::StatusOr<LabeledDataset> LoadDataset(const DatasetSpec& spec);

inline constexpr std::string_view kOutDirEnv = "FLAPS_OUT_DIR";

struct ExperimentConfig {
  DatasetSpec dataset;
  int n_clients = 200;
  std::vector<Mode> modes = {Mode::kFlaps, Mode::kFl, Mode::kCentral};
  std::vector<int> k_list = {2,  3,  4,  5,  6,  7,  8,  9,  10, 11,
                             12, 13, 14, 15, 16, 17, 18, 19, 20};
  std::vector<std::uint64_t> seeds = {0};
  double test_fraction = 0.2;
  std::vector<int> hidden;
  TrainConfig train = {.learning_rate = 0.05, .max_epochs = 300};
  DropModel drops;
  TransportKind transport = TransportKind::kSim;
  LatencyModel latency;
  int max_attempts = 3;
  double retry_delay_s = 0;
  std::string out_dir;

  absl::Status Validate() const;
  RoundConfig RoundFor(std::optional<int> k, std::uint64_t seed) const;
  bool operator==(const ExperimentConfig&) const = default;
};

// $FLAPS_OUT_DIR when set, otherwise "flaps_out".
std::string DefaultOutDir();

// Fully defaulted config over the default synthetic dataset.
ExperimentConfig DefaultConfig();

// JSON object with a required "dataset" member; every other key is optional.
// Unknown keys are rejected.
absl::StatusOr<ExperimentConfig> ParseConfig(std::string_view json_text);
absl::StatusOr<ExperimentConfig> LoadConfig(const std::string& path);
// Canonical form: every field spelled out, stable key order.
std::string EmitConfig(const ExperimentConfig& config);

struct SweepOutcome {
  // Sorted by (mode, k, seed) with modes in flaps, fl, central order.
  std::vector<RoundResult> results;
  // One line per failed run, prefixed with its mode, k and seed.
  std::vector<std::string> failures;
};

absl::StatusOr<SweepOutcome> RunSweep(const ExperimentConfig& config);

inline constexpr std::string_view kTimeCsvHeader =
    "mode,k,seed,t1,t2,t3,t4,total";
inline constexpr std::string_view kMetricsCsvHeader =
    "mode,k,seed,loss,auc,fscore,accuracy";

std::string TimeCsv(const std::vector<RoundResult>& results);
std::string MetricsCsv(const std::vector<RoundResult>& results);
absl::Status WriteTimeCsv(const std::vector<RoundResult>& results,
                          const std::string& path);
absl::Status WriteMetricsCsv(const std::vector<RoundResult>& results,
                             const std::string& path);

struct CsvRow {
  Mode mode = Mode::kFlaps;
  std::optional<int> k;
  std::uint64_t seed = 0;
  std::vector<double> values;  // columns after seed
};

// Parses a file written by TimeCsv or MetricsCsv; `header` must match.
absl::StatusOr<std::vector<CsvRow>> ParseResultCsv(std::string_view text,
                                                   std::string_view header);

// Per seed and k: FLaPS macro-F1 and its differences to the FL and central
// rows of the same seed.
std::string CompareReport(const std::vector<RoundResult>& results);

}  // namespace flaps

#endif  // FLAPS_EXPERIMENT_H_
