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

#ifndef FLAPS_BUDS_H_
#define FLAPS_BUDS_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "absl/status/statusor.h"
#include "flaps/dataset.h"
#include "flaps/random.h"

namespace flaps {

// A single attribute value.
using Scalar = std::variant<std::int64_t, double, BitString>;
// One table cell: a tuple with one component per attribute tied into the
// column. Plain (untied) columns hold 1-tuples.
using Cell = std::vector<Scalar>;

// Separator used in composite column names, e.g. "max_index:min_index".
inline constexpr char kTieSeparator = ':';

struct AttributeTable {
  std::vector<std::string> column_names;
  // Per column, the original attribute names tied into it. Together they
  // partition the attribute set.
  std::vector<std::vector<std::string>> tied_groups;
  std::vector<std::vector<Cell>> rows;

  // Untied table over `names`; rows are added by the caller.
  static AttributeTable WithColumns(std::vector<std::string> names);

  std::size_t num_columns() const { return column_names.size(); }
  std::size_t num_rows() const { return rows.size(); }
  // Index of the column named `name`, or of the column whose tied group
  // contains `name` when `match_components` is set.
  std::optional<std::size_t> FindColumn(std::string_view name,
                                        bool match_components = false) const;

  absl::Status Validate() const;

  bool operator==(const AttributeTable&) const = default;
};

// Merges the columns named in `query_columns` into one composite column placed
// where the first of them stood. Components keep table order. Other columns
// are untouched, so k columns become k - |query| + 1.
absl::StatusOr<AttributeTable> ReduceAttributes(
    const AttributeTable& table, const std::set<std::string>& query_columns);

// Shuffler channels for m attributes of which n answer the query: m - n + 1.
absl::StatusOr<int> ChannelCount(int m, int n_query);

// ceil(rows / 64), at least 1.
int DefaultBatchCount(std::size_t rows);

struct ShufflePlan {
  int n_shufflers = 0;
  // Half-open row ranges [first, second). Sizes differ by at most one.
  std::vector<std::pair<std::size_t, std::size_t>> batch_bounds;
  // assignment[batch][column] = shuffler id; distinct within a batch.
  std::vector<std::vector<int>> assignment;

  // FNV-1a over the plan's shape and shuffler ids.
  std::uint64_t Digest() const;
};

struct ShuffledReport {
  AttributeTable table;
  std::uint64_t plan_digest = 0;

  bool operator==(const ShuffledReport&) const = default;
};

// Splits `rows` into `n_batches` near-equal batches and, per batch, draws a
// shuffler for each of `n_groups` column groups without replacement.
absl::StatusOr<ShufflePlan> PlanShuffle(std::size_t rows, std::size_t n_groups,
                                        int n_shufflers, int n_batches,
                                        Rng& rng);

// Iterative shuffling. Consumes `rng` in this order: the plan (PlanShuffle),
// then one seed per shuffler. Within each batch every column is permuted
// independently by a Fisher-Yates draw from its assigned shuffler's stream.
absl::StatusOr<ShuffledReport> IterativeShuffle(const AttributeTable& table,
                                                int n_shufflers, int n_batches,
                                                Rng& rng);

// Fisher-Yates permutation of [0, n).
std::vector<std::size_t> RandomPermutation(std::size_t n, Rng& rng);

// Column names of a privatized weight table.
inline constexpr std::string_view kPositionAttr = "position";
inline constexpr std::string_view kValueAttr = "value";
inline constexpr std::string_view kSampleCountAttr = "sample_count";
inline constexpr std::string_view kNonceAttr = "nonce";

struct WeightMeta {
  std::int64_t cluster_id = 0;
  std::int64_t sample_count = 0;
};

// One row per parameter: tied (position, value) plus cluster id, sample count
// and a random per-row nonce, privatized by ReduceAttributes followed by
// IterativeShuffle with ChannelCount(5, 2) shufflers.
absl::StatusOr<ShuffledReport> WeightReport(std::span<const double> params,
                                            const WeightMeta& meta, Rng& rng);

// Big-endian wire form: u64 plan digest; u32 column count, then per column a
// u32-length-prefixed name; u64 row count; then row-major cell components,
// each a one-byte tag followed by 'i': int64, 'd': IEEE-754 double bits, or
// 'b': u32 bit length and lowercase hex of the MSB-first packed bits.
std::string SerializeReport(const ShuffledReport& report);
absl::StatusOr<ShuffledReport> DeserializeReport(std::string_view bytes);

}  // namespace flaps

#endif  // FLAPS_BUDS_H_
