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

#include "flaps/buds.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "absl/status/status.h"
#include "flaps/status_macros.h"
#include "flaps/str_util.h"
#include "flaps/wire.h"

namespace flaps {
namespace {

constexpr std::uint8_t kIntTag = 'i';
constexpr std::uint8_t kDoubleTag = 'd';
constexpr std::uint8_t kBitsTag = 'b';
constexpr char kHexDigits[] = "0123456789abcdef";

std::string JoinTied(const std::vector<std::string>& parts) {
  std::string out;
  for (const std::string& p : parts) {
    if (!out.empty()) out.push_back(kTieSeparator);
    out += p;
  }
  return out;
}

std::string HexEncodeBits(const BitString& bits) {
  std::string hex;
  for (std::size_t byte = 0; byte * 8 < bits.size(); ++byte) {
    std::uint8_t packed = 0;
    for (std::size_t b = 0; b < 8; ++b) {
      const std::size_t i = byte * 8 + b;
      if (i < bits.size() && bits[i])
        packed |= static_cast<std::uint8_t>(0x80u >> b);
    }
    hex.push_back(kHexDigits[packed >> 4]);
    hex.push_back(kHexDigits[packed & 0xf]);
  }
  return hex;
}

absl::StatusOr<BitString> HexDecodeBits(std::string_view hex,
                                        std::size_t n_bits) {
  if (hex.size() != 2 * ((n_bits + 7) / 8)) {
    return absl::DataLossError(
        StrCat("hex cell has ", hex.size(), " chars for ", n_bits, " bits"));
  }
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    return -1;
  };
  BitString bits(n_bits, 0);
  for (std::size_t byte = 0; byte * 2 < hex.size(); ++byte) {
    const int hi = nibble(hex[2 * byte]), lo = nibble(hex[2 * byte + 1]);
    if (hi < 0 || lo < 0) return absl::DataLossError("invalid hex digit");
    const int packed = (hi << 4) | lo;
    for (std::size_t b = 0; b < 8; ++b) {
      const std::size_t i = byte * 8 + b;
      const bool set = (packed >> (7 - b)) & 1;
      if (i < n_bits) {
        bits[i] = set ? 1 : 0;
      } else if (set) {
        return absl::DataLossError("padding bits set in hex cell");
      }
    }
  }
  return bits;
}

}  // namespace

AttributeTable AttributeTable::WithColumns(std::vector<std::string> names) {
  AttributeTable t;
  for (const std::string& n : names) t.tied_groups.push_back({n});
  t.column_names = std::move(names);
  return t;
}

std::optional<std::size_t> AttributeTable::FindColumn(
    std::string_view name, bool match_components) const {
  for (std::size_t c = 0; c < column_names.size(); ++c) {
    if (column_names[c] == name) return c;
  }
  if (match_components) {
    for (std::size_t c = 0; c < tied_groups.size(); ++c) {
      for (const std::string& part : tied_groups[c]) {
        if (part == name) return c;
      }
    }
  }
  return std::nullopt;
}

absl::Status AttributeTable::Validate() const {
  if (tied_groups.size() != column_names.size()) {
    return absl::InvalidArgumentError("one tied group per column required");
  }
  std::set<std::string> seen;
  for (std::size_t c = 0; c < column_names.size(); ++c) {
    if (tied_groups[c].empty() || column_names[c] != JoinTied(tied_groups[c])) {
      return absl::InvalidArgumentError(
          StrCat("column '", column_names[c], "' does not match its group"));
    }
    for (const std::string& part : tied_groups[c]) {
      if (part.find(kTieSeparator) != std::string::npos || part.empty() ||
          !seen.insert(part).second) {
        return absl::InvalidArgumentError(
            StrCat("bad or repeated attribute name '", part, "'"));
      }
    }
  }
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != column_names.size()) {
      return absl::InvalidArgumentError(
          StrCat("row ", r, " has ", rows[r].size(), " cells, expected ",
                 column_names.size()));
    }
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      if (rows[r][c].size() != tied_groups[c].size()) {
        return absl::InvalidArgumentError(
            StrCat("row ", r, " column '", column_names[c], "' has arity ",
                   rows[r][c].size()));
      }
    }
  }
  return absl::OkStatus();
}

absl::StatusOr<AttributeTable> ReduceAttributes(
    const AttributeTable& table, const std::set<std::string>& query_columns) {
  if (query_columns.empty()) {
    return absl::InvalidArgumentError("query selects no attributes");
  }
  std::vector<std::size_t> picked;
  for (const std::string& name : query_columns) {
    auto c = table.FindColumn(name);
    if (!c.has_value()) {
      return absl::InvalidArgumentError(
          StrCat("query attribute '", name, "' is not a column"));
    }
    picked.push_back(*c);
  }
  std::sort(picked.begin(), picked.end());
  const std::size_t anchor = picked.front();
  auto is_picked = [&](std::size_t c) {
    return std::binary_search(picked.begin(), picked.end(), c);
  };

  AttributeTable out;
  std::vector<std::string> merged_group;
  for (std::size_t c : picked) {
    merged_group.insert(merged_group.end(), table.tied_groups[c].begin(),
                        table.tied_groups[c].end());
  }
  for (std::size_t c = 0; c < table.num_columns(); ++c) {
    if (c == anchor) {
      out.column_names.push_back(JoinTied(merged_group));
      out.tied_groups.push_back(merged_group);
    } else if (!is_picked(c)) {
      out.column_names.push_back(table.column_names[c]);
      out.tied_groups.push_back(table.tied_groups[c]);
    }
  }
  for (const auto& row : table.rows) {
    std::vector<Cell> reduced;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c == anchor) {
        Cell merged;
        for (std::size_t p : picked) {
          merged.insert(merged.end(), row[p].begin(), row[p].end());
        }
        reduced.push_back(std::move(merged));
      } else if (!is_picked(c)) {
        reduced.push_back(row[c]);
      }
    }
    out.rows.push_back(std::move(reduced));
  }
  return out;
}

absl::StatusOr<int> ChannelCount(int m, int n_query) {
  if (n_query < 1 || n_query > m) {
    return absl::InvalidArgumentError(
        StrCat("need 1 <= n <= m, got m = ", m, ", n = ", n_query));
  }
  return m - n_query + 1;
}

int DefaultBatchCount(std::size_t rows) {
  return std::max<int>(1, static_cast<int>((rows + 63) / 64));
}

std::uint64_t ShufflePlan::Digest() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xff;
      h *= 0x100000001b3ULL;
    }
  };
  mix(static_cast<std::uint64_t>(n_shufflers));
  mix(batch_bounds.size());
  for (const auto& [first, last] : batch_bounds) {
    mix(first);
    mix(last);
  }
  for (const auto& batch : assignment) {
    for (int id : batch) mix(static_cast<std::uint64_t>(id));
  }
  return h;
}

std::vector<std::size_t> RandomPermutation(std::size_t n, Rng& rng) {
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  for (std::size_t i = n; i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(perm[i - 1], perm[pick(rng)]);
  }
  return perm;
}

absl::StatusOr<ShufflePlan> PlanShuffle(std::size_t rows, std::size_t n_groups,
                                        int n_shufflers, int n_batches,
                                        Rng& rng) {
  if (n_batches < 1)
    return absl::InvalidArgumentError("need at least one batch");
  if (rows == 0)
    return absl::InvalidArgumentError("cannot shuffle an empty table");
  if (n_shufflers < 0 || static_cast<std::size_t>(n_shufflers) < n_groups) {
    return absl::InvalidArgumentError(
        StrCat(n_shufflers, " shufflers cannot serve ", n_groups,
               " column groups without replacement"));
  }
  const std::size_t t = std::min<std::size_t>(n_batches, rows);
  ShufflePlan plan;
  plan.n_shufflers = n_shufflers;
  std::size_t next = 0;
  for (std::size_t b = 0; b < t; ++b) {
    const std::size_t size = rows / t + (b < rows % t ? 1 : 0);
    plan.batch_bounds.emplace_back(next, next + size);
    next += size;
  }
  for (std::size_t b = 0; b < t; ++b) {
    // Partial Fisher-Yates: the first n_groups entries are a sample without
    // replacement from [0, n_shufflers).
    std::vector<int> ids(n_shufflers);
    for (int i = 0; i < n_shufflers; ++i) ids[i] = i;
    for (std::size_t i = 0; i < n_groups; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, ids.size() - 1);
      std::swap(ids[i], ids[pick(rng)]);
    }
    ids.resize(n_groups);
    plan.assignment.push_back(std::move(ids));
  }
  return plan;
}

absl::StatusOr<ShuffledReport> IterativeShuffle(const AttributeTable& table,
                                                int n_shufflers, int n_batches,
                                                Rng& rng) {
  FLAPS_RETURN_IF_ERROR(table.Validate());
  FLAPS_ASSIGN_OR_RETURN(ShufflePlan plan,
                         PlanShuffle(table.num_rows(), table.num_columns(),
                                     n_shufflers, n_batches, rng));
  std::vector<Rng> shufflers;
  shufflers.reserve(n_shufflers);
  for (int s = 0; s < n_shufflers; ++s) shufflers.emplace_back(rng());

  ShuffledReport report;
  report.table = table;
  for (std::size_t b = 0; b < plan.batch_bounds.size(); ++b) {
    const auto [first, last] = plan.batch_bounds[b];
    for (std::size_t c = 0; c < table.num_columns(); ++c) {
      const std::vector<std::size_t> perm =
          RandomPermutation(last - first, shufflers[plan.assignment[b][c]]);
      for (std::size_t i = 0; i < perm.size(); ++i) {
        report.table.rows[first + i][c] = table.rows[first + perm[i]][c];
      }
    }
  }
  report.plan_digest = plan.Digest();
  return report;
}

absl::StatusOr<ShuffledReport> WeightReport(std::span<const double> params,
                                            const WeightMeta& meta, Rng& rng) {
  for (double v : params) {
    if (!std::isfinite(v)) {
      return absl::InvalidArgumentError("weight vector has non-finite entries");
    }
  }
  if (params.empty()) return absl::InvalidArgumentError("empty weight vector");
  AttributeTable table = AttributeTable::WithColumns(
      {std::string(kPositionAttr), std::string(kValueAttr),
       std::string(kClusterIdAttr), std::string(kSampleCountAttr),
       std::string(kNonceAttr)});
  table.rows.reserve(params.size());
  for (std::size_t p = 0; p < params.size(); ++p) {
    table.rows.push_back({{static_cast<std::int64_t>(p)},
                          {params[p]},
                          {meta.cluster_id},
                          {meta.sample_count},
                          {static_cast<std::int64_t>(rng() >> 1)}});
  }
  FLAPS_ASSIGN_OR_RETURN(AttributeTable reduced,
                         ReduceAttributes(table, {std::string(kPositionAttr),
                                                  std::string(kValueAttr)}));
  FLAPS_ASSIGN_OR_RETURN(int channels, ChannelCount(5, 2));
  return IterativeShuffle(reduced, channels,
                          DefaultBatchCount(reduced.num_rows()), rng);
}

std::string SerializeReport(const ShuffledReport& report) {
  ByteWriter w;
  w.U64(report.plan_digest);
  w.U32(static_cast<std::uint32_t>(report.table.num_columns()));
  for (const std::string& name : report.table.column_names)
    w.LengthPrefixed(name);
  w.U64(report.table.num_rows());
  for (const auto& row : report.table.rows) {
    for (const Cell& cell : row) {
      for (const Scalar& v : cell) {
        if (const auto* i = std::get_if<std::int64_t>(&v)) {
          w.U8(kIntTag);
          w.I64(*i);
        } else if (const auto* d = std::get_if<double>(&v)) {
          w.U8(kDoubleTag);
          w.F64(*d);
        } else {
          const BitString& bits = std::get<BitString>(v);
          w.U8(kBitsTag);
          w.U32(static_cast<std::uint32_t>(bits.size()));
          w.Bytes(HexEncodeBits(bits));
        }
      }
    }
  }
  return w.Release();
}

absl::StatusOr<ShuffledReport> DeserializeReport(std::string_view bytes) {
  ByteReader r(bytes);
  ShuffledReport report;
  FLAPS_ASSIGN_OR_RETURN(report.plan_digest, r.U64());
  FLAPS_ASSIGN_OR_RETURN(std::uint32_t n_cols, r.U32());
  for (std::uint32_t c = 0; c < n_cols; ++c) {
    FLAPS_ASSIGN_OR_RETURN(std::string_view name, r.LengthPrefixed());
    report.table.column_names.emplace_back(name);
    std::vector<std::string> group;
    for (std::string_view part : Split(name, kTieSeparator))
      group.emplace_back(part);
    report.table.tied_groups.push_back(std::move(group));
  }
  FLAPS_ASSIGN_OR_RETURN(std::uint64_t n_rows, r.U64());
  // Every component costs at least 9 bytes, which bounds a hostile row count.
  if (n_cols > 0 && n_rows > r.remaining() / 9) {
    return absl::DataLossError(StrCat(
        "row count ", n_rows, " exceeds payload at byte offset ", r.offset()));
  }
  report.table.rows.reserve(n_rows);
  for (std::uint64_t row = 0; row < n_rows; ++row) {
    std::vector<Cell> cells;
    for (std::uint32_t c = 0; c < n_cols; ++c) {
      Cell cell;
      for (std::size_t k = 0; k < report.table.tied_groups[c].size(); ++k) {
        const std::size_t at = r.offset();
        FLAPS_ASSIGN_OR_RETURN(std::uint8_t tag, r.U8());
        if (tag == kIntTag) {
          FLAPS_ASSIGN_OR_RETURN(std::int64_t v, r.I64());
          cell.emplace_back(v);
        } else if (tag == kDoubleTag) {
          FLAPS_ASSIGN_OR_RETURN(double v, r.F64());
          cell.emplace_back(v);
        } else if (tag == kBitsTag) {
          FLAPS_ASSIGN_OR_RETURN(std::uint32_t n_bits, r.U32());
          FLAPS_ASSIGN_OR_RETURN(std::string_view hex,
                                 r.Bytes(2 * ((std::size_t{n_bits} + 7) / 8)));
          FLAPS_ASSIGN_OR_RETURN(BitString bits, HexDecodeBits(hex, n_bits));
          cell.emplace_back(std::move(bits));
        } else {
          return absl::DataLossError(
              StrCat("unknown cell tag ", int{tag}, " at byte offset ", at));
        }
      }
      cells.push_back(std::move(cell));
    }
    report.table.rows.push_back(std::move(cells));
  }
  if (!r.done()) {
    return absl::DataLossError(
        StrCat("trailing bytes after report at byte offset ", r.offset()));
  }
  FLAPS_RETURN_IF_ERROR(report.table.Validate());
  return report;
}

}  // namespace flaps
