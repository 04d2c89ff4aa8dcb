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

#ifndef FLAPS_ARA_H_
#define FLAPS_ARA_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "flaps/buds.h"
#include "flaps/dataset.h"

namespace flaps {

struct BitReport {
  BitString bits;
  std::uint64_t source_tag = 0;
};

// Per-position aggregation weights; non-negative and summing to 1.
struct AraConstants {
  std::vector<double> weights;
};

// TF-IDF constants over R reports of length L. For each position p:
//   tf_p  = (number of reports with bit p set) / R
//   idf_p = ln((R + 1) / (df_p + 1)) + 1, df_p = reports with bit p set
// and the weights are tf_p * idf_p normalized to sum 1, or uniform 1/L when
// every report is all zeros.
absl::StatusOr<AraConstants> ComputeConstants(
    std::span<const BitReport> reports);

// estimate_p = weights_p * sum_r bit_{r,p}.
absl::StatusOr<std::vector<double>> AggregateBits(
    std::span<const BitReport> reports, const AraConstants& constants);

// Union of every [min_index, max_index] range carried by the reports' tied
// index column, as a sorted index list without duplicates.
absl::StatusOr<std::vector<std::int64_t>> MergeDataReports(
    std::span<const ShuffledReport> reports);

struct ClusterWeights {
  std::vector<double> params;
  std::int64_t sample_count = 0;
};

struct AggregatedWeights {
  std::vector<ClusterWeights> accepted;
  // One line per rejected report, naming the report index and the reason.
  std::vector<std::string> diagnostics;
};

// Rebuilds each report's parameter vector from its (position, value) column.
// A report is dropped, with a diagnostic, unless it carries exactly one value
// for every position in [0, dimension) and a single positive sample count.
AggregatedWeights AggregateWeightReports(
    std::span<const ShuffledReport> reports, std::size_t dimension);

struct FedWeights {
  std::vector<double> params;
  std::int64_t total_examples = 0;
};

// Sample-count weighted mean, sum_k (n_k / N) w_k, reduced pairwise over k.
absl::StatusOr<FedWeights> FedAvg(std::span<const ClusterWeights> clusters);

}  // namespace flaps

#endif  // FLAPS_ARA_H_
