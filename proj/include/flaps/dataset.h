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

#ifndef FLAPS_DATASET_H_
#define FLAPS_DATASET_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"

namespace flaps {

// Row-major feature matrix with one integer label per row. Feature values are
// normalized to [0, 1].
struct LabeledDataset {
  std::size_t dim = 0;
  int n_classes = 0;
  std::vector<double> features;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
  std::span<const double> row(std::size_t i) const {
    return {features.data() + i * dim, dim};
  }

  // Checks the shape and label-range invariants.
  absl::Status Validate() const;

  bool operator==(const LabeledDataset&) const = default;
};

struct TrainTestSplit {
  LabeledDataset train;
  LabeledDataset test;
};

// Parses an IDX image tensor (magic 0x00000803) and an IDX label vector
// (magic 0x00000801). Pixel bytes are scaled by 1/255. `n_classes` defaults to
// max(label) + 1.
absl::StatusOr<LabeledDataset> ParseIdx(std::string_view image_bytes,
                                        std::string_view label_bytes,
                                        std::optional<int> n_classes = {});
absl::StatusOr<LabeledDataset> LoadIdx(const std::string& images_path,
                                       const std::string& labels_path,
                                       std::optional<int> n_classes = {});

// Inverse of ParseIdx for datasets whose features are multiples of 1/255.
// Images are written as a rank-3 tensor (n, rows, cols) with rows*cols == dim.
struct IdxBytes {
  std::string images;
  std::string labels;
};
absl::StatusOr<IdxBytes> EncodeIdx(const LabeledDataset& data, int rows,
                                   int cols);

// CSV with a header row; the last column is an integer label. Feature columns
// are min-max scaled to [0, 1] (constant columns map to 0).
absl::StatusOr<LabeledDataset> ParseCsv(std::string_view text);
absl::StatusOr<LabeledDataset> LoadCsv(const std::string& path);

// Gaussian class blobs with distinct means, rescaled to [0, 1]. Row order is
// shuffled so that contiguous index ranges are class-mixed.
absl::StatusOr<LabeledDataset> MakeSynthetic(int n, int dim, int n_classes,
                                             std::uint64_t seed);

// Seeded shuffle of rows followed by a split; `test_fraction` in (0, 1).
absl::StatusOr<TrainTestSplit> SplitTrainTest(const LabeledDataset& data,
                                              double test_fraction,
                                              std::uint64_t seed);

LabeledDataset Subset(const LabeledDataset& data,
                      std::span<const std::int64_t> indices);

// One client's slice of the training set. Index ranges are inclusive.
struct ClientShard {
  std::int64_t user_id = 0;
  std::int64_t count = 0;
  std::int64_t min_index = 0;
  std::int64_t max_index = -1;
  std::optional<std::int64_t> cluster_id;

  bool operator==(const ClientShard&) const = default;
};

// Splits [0, n_examples) into contiguous ranges whose sizes are near-equal:
// floor(N/c) plus the remainder spread one-per-shard, then perturbed by
// zero-sum pairwise jitter of at most min(2, floor(N/c) / 64) and placed in
// a seeded order. User ids start at 1.
absl::StatusOr<std::vector<ClientShard>> PartitionRandom(
    std::int64_t n_examples, int n_clients, std::uint64_t seed);

// Bit strings are stored one bit per byte (0 or 1).
using BitString = std::vector<std::uint8_t>;

// Names of the per-shard attributes a codec can cover.
inline constexpr std::string_view kUserIdAttr = "user_id";
inline constexpr std::string_view kCountAttr = "count";
inline constexpr std::string_view kMaxIndexAttr = "max_index";
inline constexpr std::string_view kMinIndexAttr = "min_index";
inline constexpr std::string_view kClusterIdAttr = "cluster_id";

// Value used in codebooks for an unassigned cluster id.
inline constexpr std::int64_t kUnassigned = -1;

absl::StatusOr<std::int64_t> ShardAttribute(const ClientShard& shard,
                                            std::string_view attribute);

struct Codebook {
  std::string attribute;
  std::vector<std::int64_t> values;  // bit position == index in this list
};

class OneHotCodec {
 public:
  // Fails if a codebook lists a value twice or names an unknown attribute.
  static absl::StatusOr<OneHotCodec> Create(std::vector<Codebook> codebooks);

  // Codebooks holding every distinct value (sorted) seen in `shards` for each
  // of `attributes`.
  static absl::StatusOr<OneHotCodec> FromShards(
      std::span<const ClientShard> shards,
      std::vector<std::string> attributes = {
          std::string(kUserIdAttr), std::string(kCountAttr),
          std::string(kMaxIndexAttr), std::string(kMinIndexAttr),
          std::string(kClusterIdAttr)});

  const std::vector<Codebook>& codebooks() const { return codebooks_; }
  std::size_t total_bits() const { return total_bits_; }

  // One-hot block for a single attribute value.
  absl::StatusOr<BitString> EncodeValue(std::string_view attribute,
                                        std::int64_t value) const;
  absl::StatusOr<std::int64_t> DecodeValue(
      std::string_view attribute, std::span<const std::uint8_t> block) const;

  // Concatenation of the per-attribute blocks in codebook order.
  absl::StatusOr<BitString> Encode(const ClientShard& shard) const;
  // Attributes not covered by the codec keep their default values.
  absl::StatusOr<ClientShard> Decode(std::span<const std::uint8_t> bits) const;

 private:
  explicit OneHotCodec(std::vector<Codebook> codebooks);
  const Codebook* Find(std::string_view attribute) const;

  std::vector<Codebook> codebooks_;
  std::size_t total_bits_ = 0;
};

}  // namespace flaps

#endif  // FLAPS_DATASET_H_
