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

#include "flaps/ara.h"

#include <algorithm>
#include <cmath>
#include <optional>

#include "absl/status/status.h"
#include "flaps/status_macros.h"
#include "flaps/str_util.h"

namespace flaps {
namespace {

absl::Status CheckLengths(std::span<const BitReport> reports) {
  if (reports.empty())
    return absl::InvalidArgumentError("no reports to aggregate");
  const std::size_t len = reports[0].bits.size();
  for (std::size_t r = 1; r < reports.size(); ++r) {
    if (reports[r].bits.size() != len) {
      return absl::InvalidArgumentError(StrCat("report ", r, " has ",
                                               reports[r].bits.size(),
                                               " bits, expected ", len));
    }
  }
  return absl::OkStatus();
}

std::optional<std::int64_t> AsInt(const Scalar& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
  return std::nullopt;
}

// Sums by recursive halving so the result does not depend on
// how the caller scheduled the terms.
double PairwiseSum(std::span<const double> terms) {
  if (terms.size() <= 2) {
    double s = 0;
    for (double t : terms) s += t;
    return s;
  }
  const std::size_t half = terms.size() / 2;
  return PairwiseSum(terms.first(half)) + PairwiseSum(terms.subspan(half));
}

}  // namespace

absl::StatusOr<AraConstants> ComputeConstants(
    std::span<const BitReport> reports) {
  FLAPS_RETURN_IF_ERROR(CheckLengths(reports));
  const std::size_t len = reports[0].bits.size();
  const double r_count = static_cast<double>(reports.size());
  std::vector<double> raw(len, 0.0);
  double total = 0;
  for (std::size_t p = 0; p < len; ++p) {
    double df = 0;
    for (const BitReport& r : reports) df += r.bits[p] ? 1 : 0;
    const double tf = df / r_count;
    const double idf = std::log((r_count + 1) / (df + 1)) + 1;
    raw[p] = tf * idf;
    total += raw[p];
  }
  AraConstants c;
  c.weights.resize(len);
  for (std::size_t p = 0; p < len; ++p) {
    c.weights[p] = total > 0 ? raw[p] / total : 1.0 / static_cast<double>(len);
  }
  return c;
}

absl::StatusOr<std::vector<double>> AggregateBits(
    std::span<const BitReport> reports, const AraConstants& constants) {
  FLAPS_RETURN_IF_ERROR(CheckLengths(reports));
  if (constants.weights.size() != reports[0].bits.size()) {
    return absl::InvalidArgumentError(
        StrCat("constants cover ", constants.weights.size(),
               " positions, reports have ", reports[0].bits.size()));
  }
  std::vector<double> estimate(constants.weights.size(), 0.0);
  for (std::size_t p = 0; p < estimate.size(); ++p) {
    double count = 0;
    for (const BitReport& r : reports) count += r.bits[p] ? 1 : 0;
    estimate[p] = constants.weights[p] * count;
  }
  return estimate;
}

absl::StatusOr<std::vector<std::int64_t>> MergeDataReports(
    std::span<const ShuffledReport> reports) {
  std::vector<std::int64_t> indices;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const AttributeTable& t = reports[i].table;
    const auto col = t.FindColumn(kMaxIndexAttr, /*match_components=*/true);
    if (!col.has_value()) {
      return absl::InvalidArgumentError(
          StrCat("report ", i, " carries no index-range column"));
    }
    const auto& group = t.tied_groups[*col];
    const auto max_pos =
        std::find(group.begin(), group.end(), kMaxIndexAttr) - group.begin();
    const auto min_pos =
        std::find(group.begin(), group.end(), kMinIndexAttr) - group.begin();
    if (static_cast<std::size_t>(min_pos) == group.size()) {
      return absl::InvalidArgumentError(
          StrCat("report ", i, ": column '", t.column_names[*col],
                 "' does not tie min_index to max_index"));
    }
    for (std::size_t r = 0; r < t.num_rows(); ++r) {
      const auto hi = AsInt(t.rows[r][*col][max_pos]);
      const auto lo = AsInt(t.rows[r][*col][min_pos]);
      if (!hi.has_value() || !lo.has_value()) {
        return absl::InvalidArgumentError(
            StrCat("report ", i, " row ", r, ": index range is not integral"));
      }
      if (*lo > *hi) {
        return absl::InvalidArgumentError(StrCat(
            "report ", i, " row ", r, ": malformed range ", *lo, ":", *hi));
      }
      for (std::int64_t x = *lo; x <= *hi; ++x) indices.push_back(x);
    }
  }
  std::sort(indices.begin(), indices.end());
  indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
  return indices;
}

AggregatedWeights AggregateWeightReports(
    std::span<const ShuffledReport> reports, std::size_t dimension) {
  AggregatedWeights out;
  const std::string pair_column =
      StrCat(kPositionAttr, std::string(1, kTieSeparator), kValueAttr);
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const AttributeTable& t = reports[i].table;
    auto reject = [&](const std::string& why) {
      out.diagnostics.push_back(
          StrCat("weight report ", i, " rejected: ", why));
    };
    const auto pv = t.FindColumn(pair_column);
    const auto count_col = t.FindColumn(kSampleCountAttr);
    if (!pv.has_value() || !count_col.has_value()) {
      reject("missing position:value or sample_count column");
      continue;
    }
    std::vector<double> params(dimension, 0.0);
    std::vector<bool> seen(dimension, false);
    std::optional<std::int64_t> count;
    std::string problem;
    for (std::size_t r = 0; r < t.num_rows() && problem.empty(); ++r) {
      const Cell& cell = t.rows[r][*pv];
      const auto pos = AsInt(cell[0]);
      const double* value = std::get_if<double>(&cell[1]);
      const auto n = AsInt(t.rows[r][*count_col][0]);
      if (!pos.has_value() || value == nullptr || !n.has_value()) {
        problem = StrCat("row ", r, " has mistyped cells");
      } else if (*pos < 0 || static_cast<std::size_t>(*pos) >= dimension) {
        problem = StrCat("position ", *pos, " outside [0, ", dimension, ")");
      } else if (seen[*pos]) {
        problem = StrCat("duplicate position ", *pos);
      } else if (!std::isfinite(*value)) {
        problem = StrCat("non-finite value at position ", *pos);
      } else if (count.has_value() && *count != *n) {
        problem = "inconsistent sample counts";
      } else {
        seen[*pos] = true;
        params[*pos] = *value;
        count = n;
      }
    }
    if (problem.empty()) {
      const auto missing = std::find(seen.begin(), seen.end(), false);
      if (missing != seen.end()) {
        problem = StrCat("missing position ", missing - seen.begin());
      } else if (!count.has_value() || *count <= 0) {
        problem = "no positive sample count";
      }
    }
    if (!problem.empty()) {
      reject(problem);
      continue;
    }
    out.accepted.push_back({std::move(params), *count});
  }
  return out;
}

absl::StatusOr<FedWeights> FedAvg(std::span<const ClusterWeights> clusters) {
  if (clusters.empty()) return absl::InvalidArgumentError("nothing to average");
  const std::size_t dim = clusters[0].params.size();
  std::vector<double> counts;
  FedWeights out;
  for (std::size_t k = 0; k < clusters.size(); ++k) {
    if (clusters[k].params.size() != dim) {
      return absl::InvalidArgumentError(StrCat("cluster ", k, " has dimension ",
                                               clusters[k].params.size(),
                                               ", expected ", dim));
    }
    if (clusters[k].sample_count <= 0) {
      return absl::InvalidArgumentError(
          StrCat("cluster ", k, " has non-positive sample count"));
    }
    out.total_examples += clusters[k].sample_count;
    counts.push_back(static_cast<double>(clusters[k].sample_count));
  }
  const double total = static_cast<double>(out.total_examples);
  out.params.resize(dim);
  std::vector<double> terms(clusters.size());
  for (std::size_t p = 0; p < dim; ++p) {
    double lo = clusters[0].params[p], hi = lo;
    for (std::size_t k = 0; k < clusters.size(); ++k) {
      terms[k] = counts[k] / total * clusters[k].params[p];
      lo = std::min(lo, clusters[k].params[p]);
      hi = std::max(hi, clusters[k].params[p]);
    }
    // The exact mean is a convex combination; clamp away rounding overshoot.
    out.params[p] = std::clamp(PairwiseSum(terms), lo, hi);
  }
  return out;
}

}  // namespace flaps
