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

#ifndef FLAPS_CLUSTERING_H_
#define FLAPS_CLUSTERING_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "flaps/dataset.h"
#include "flaps/random.h"

namespace flaps {

using FeatureVector = std::vector<double>;

struct ClusterAssignment {
  int k = 0;
  std::vector<int> labels;             // per point, in [0, k)
  std::vector<FeatureVector> centers;  // k centroids
  std::vector<std::size_t> heads;      // k point indices, heads[i] in cluster i
  std::vector<double> sse_trace;       // within-cluster SSE per Lloyd step
  int iterations = 0;
};

// Uniform draw of the cluster budget k from [lo, hi].
absl::StatusOr<int> ChooseBudget(Rng& rng, int lo = 2, int hi = 20);

// Lloyd's algorithm from k-means++ seeding. Stops at an assignment fixpoint or
// after `max_iter` steps. A cluster left empty by the assignment step is
// reseeded with the point farthest from its own centroid, so every returned
// cluster is non-empty. Heads are filled in via SelectHeads.
absl::StatusOr<ClusterAssignment> KMeans(std::span<const FeatureVector> points,
                                         int k, std::uint64_t seed,
                                         int max_iter = 100);

// Per cluster, the member nearest its centroid; ties go to the lower index.
std::vector<std::size_t> SelectHeads(const ClusterAssignment& assignment,
                                     std::span<const FeatureVector> points);

// (count, (min_index + max_index) / 2) for one shard.
FeatureVector RawClientFeatures(const ClientShard& shard);

// Raw features for every shard, each coordinate standardized to mean 0 and
// unit (population) variance across the cohort. Constant coordinates map to 0.
std::vector<FeatureVector> ClientFeatures(std::span<const ClientShard> shards);

double SquaredDistance(std::span<const double> a, std::span<const double> b);

}  // namespace flaps

#endif  // FLAPS_CLUSTERING_H_
