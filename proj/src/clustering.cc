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

#include "flaps/clustering.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>

#include "absl/status/status.h"
#include "flaps/str_util.h"

namespace flaps {
namespace {

double Sse(std::span<const FeatureVector> points,
           const std::vector<int>& labels,
           const std::vector<FeatureVector>& centers) {
  double sse = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    sse += SquaredDistance(points[i], centers[labels[i]]);
  }
  return sse;
}

std::vector<FeatureVector> SeedPlusPlus(std::span<const FeatureVector> points,
                                        int k, Rng& rng) {
  std::vector<FeatureVector> centers;
  std::uniform_int_distribution<std::size_t> first(0, points.size() - 1);
  centers.push_back(points[first(rng)]);
  std::vector<double> nearest(points.size(),
                              std::numeric_limits<double>::infinity());
  while (static_cast<int>(centers.size()) < k) {
    double total = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      nearest[i] =
          std::min(nearest[i], SquaredDistance(points[i], centers.back()));
      total += nearest[i];
    }
    std::size_t pick = 0;
    if (total > 0) {
      std::uniform_real_distribution<double> u(0.0, total);
      double target = u(rng);
      pick = points.size() - 1;
      for (std::size_t i = 0; i < points.size(); ++i) {
        if (nearest[i] <= 0) continue;
        target -= nearest[i];
        if (target <= 0) {
          pick = i;
          break;
        }
      }
      // Guard against rounding landing on an already-chosen point.
      while (nearest[pick] <= 0)
        pick = (pick + points.size() - 1) % points.size();
    }
    centers.push_back(points[pick]);
  }
  return centers;
}

// Moves the point farthest from its own centroid (taken from a cluster with at
// least two members) into each empty cluster.
bool RepairEmpty(std::span<const FeatureVector> points,
                 std::vector<int>& labels,
                 std::vector<FeatureVector>& centers) {
  const int k = static_cast<int>(centers.size());
  bool repaired = false;
  while (true) {
    std::vector<int> sizes(k, 0);
    for (int l : labels) ++sizes[l];
    auto empty = std::find(sizes.begin(), sizes.end(), 0);
    if (empty == sizes.end()) return repaired;
    std::size_t far = 0;
    double best = -1;
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (sizes[labels[i]] < 2) continue;
      const double d = SquaredDistance(points[i], centers[labels[i]]);
      if (d > best) {
        best = d;
        far = i;
      }
    }
    const int target = static_cast<int>(empty - sizes.begin());
    labels[far] = target;
    centers[target] = points[far];
    repaired = true;
  }
}

}  // namespace

double SquaredDistance(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

absl::StatusOr<int> ChooseBudget(Rng& rng, int lo, int hi) {
  if (lo < 2) {
    return absl::InvalidArgumentError(
        StrCat("budget lower bound ", lo, " < 2"));
  }
  if (lo > hi) {
    return absl::InvalidArgumentError(
        StrCat("empty budget range [", lo, ", ", hi, "]"));
  }
  std::uniform_int_distribution<int> dist(lo, hi);
  return dist(rng);
}

absl::StatusOr<ClusterAssignment> KMeans(std::span<const FeatureVector> points,
                                         int k, std::uint64_t seed,
                                         int max_iter) {
  if (k < 2) {
    return absl::InvalidArgumentError(StrCat("k = ", k, " must be at least 2"));
  }
  if (points.empty()) return absl::InvalidArgumentError("no points to cluster");
  const std::size_t dim = points[0].size();
  for (const FeatureVector& p : points) {
    if (p.size() != dim) {
      return absl::InvalidArgumentError("points differ in dimensionality");
    }
    for (double v : p) {
      if (!std::isfinite(v))
        return absl::InvalidArgumentError("non-finite point");
    }
  }
  const std::set<FeatureVector> distinct(points.begin(), points.end());
  if (static_cast<std::size_t>(k) > distinct.size()) {
    return absl::InvalidArgumentError(StrCat(
        "k = ", k, " exceeds the ", distinct.size(), " distinct points"));
  }

  Rng rng = MakeRng(seed, Stream::kKMeans);
  ClusterAssignment out;
  out.k = k;
  out.centers = SeedPlusPlus(points, k, rng);
  out.labels.assign(points.size(), -1);

  for (int iter = 0; iter < max_iter; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < points.size(); ++i) {
      int best = 0;
      double best_d = SquaredDistance(points[i], out.centers[0]);
      for (int c = 1; c < k; ++c) {
        const double d = SquaredDistance(points[i], out.centers[c]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (out.labels[i] != best) {
        out.labels[i] = best;
        changed = true;
      }
    }
    if (RepairEmpty(points, out.labels, out.centers)) changed = true;
    if (!changed) break;

    std::vector<FeatureVector> sums(k, FeatureVector(dim, 0.0));
    std::vector<int> sizes(k, 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
      ++sizes[out.labels[i]];
      for (std::size_t d = 0; d < dim; ++d)
        sums[out.labels[i]][d] += points[i][d];
    }
    for (int c = 0; c < k; ++c) {
      for (std::size_t d = 0; d < dim; ++d)
        out.centers[c][d] = sums[c][d] / sizes[c];
    }
    out.sse_trace.push_back(Sse(points, out.labels, out.centers));
    ++out.iterations;
  }
  out.heads = SelectHeads(out, points);
  return out;
}

std::vector<std::size_t> SelectHeads(const ClusterAssignment& assignment,
                                     std::span<const FeatureVector> points) {
  std::vector<std::size_t> heads(assignment.k, 0);
  std::vector<double> best(assignment.k,
                           std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const int c = assignment.labels[i];
    const double d = SquaredDistance(points[i], assignment.centers[c]);
    if (d < best[c]) {
      best[c] = d;
      heads[c] = i;
    }
  }
  return heads;
}

FeatureVector RawClientFeatures(const ClientShard& shard) {
  return {static_cast<double>(shard.count),
          (static_cast<double>(shard.min_index) + shard.max_index) / 2.0};
}

std::vector<FeatureVector> ClientFeatures(std::span<const ClientShard> shards) {
  std::vector<FeatureVector> out;
  out.reserve(shards.size());
  for (const ClientShard& s : shards) out.push_back(RawClientFeatures(s));
  if (out.empty()) return out;
  const std::size_t dim = out[0].size();
  const double n = static_cast<double>(out.size());
  for (std::size_t d = 0; d < dim; ++d) {
    double mean = 0;
    for (const auto& v : out) mean += v[d];
    mean /= n;
    double var = 0;
    for (const auto& v : out) var += (v[d] - mean) * (v[d] - mean);
    const double sd = std::sqrt(var / n);
    for (auto& v : out) v[d] = sd > 0 ? (v[d] - mean) / sd : 0.0;
  }
  return out;
}

}  // namespace flaps
