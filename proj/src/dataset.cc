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

#include "flaps/dataset.h"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "absl/status/status.h"
#include "flaps/random.h"
#include "flaps/status_macros.h"
#include "flaps/str_util.h"

namespace flaps {
namespace {

constexpr std::uint32_t kIdxImageMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

absl::StatusOr<std::string> ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(StrCat("cannot open ", path));
  return std::string(std::istreambuf_iterator<char>(in), {});
}

absl::StatusOr<std::uint32_t> ReadBigEndian32(std::string_view bytes,
                                              std::size_t offset,
                                              std::string_view what) {
  if (bytes.size() < offset + 4) {
    return absl::DataLossError(
        StrCat(what, ": truncated header at byte offset ", offset,
               " (file has ", bytes.size(), " bytes)"));
  }
  std::uint32_t v = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    v = (v << 8) | static_cast<std::uint8_t>(bytes[offset + i]);
  }
  return v;
}

void AppendBigEndian32(std::string& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) {
    out.push_back(static_cast<char>((v >> shift) & 0xff));
  }
}

struct IdxTensor {
  std::vector<std::uint32_t> dims;
  std::string_view payload;
};

absl::StatusOr<IdxTensor> ParseIdxTensor(std::string_view bytes,
                                         std::uint32_t expected_magic,
                                         std::string_view what) {
  FLAPS_ASSIGN_OR_RETURN(std::uint32_t magic, ReadBigEndian32(bytes, 0, what));
  if (magic != expected_magic) {
    return absl::DataLossError(
        StrCat(what, fmt::format(": bad magic number 0x{:08x} at byte offset 0 "
                                 "(expected 0x{:08x})",
                                 magic, expected_magic)));
  }
  IdxTensor tensor;
  const std::size_t rank = magic & 0xff;
  std::size_t expected = 1;
  for (std::size_t i = 0; i < rank; ++i) {
    FLAPS_ASSIGN_OR_RETURN(std::uint32_t d,
                           ReadBigEndian32(bytes, 4 + 4 * i, what));
    tensor.dims.push_back(d);
    expected *= d;
  }
  const std::size_t header = 4 + 4 * rank;
  if (bytes.size() < header + expected) {
    return absl::DataLossError(
        StrCat(what, ": truncated payload at byte offset ", bytes.size(),
               " (header declares ", expected, " bytes starting at offset ",
               header, ")"));
  }
  tensor.payload = bytes.substr(header, expected);
  return tensor;
}

}  // namespace

absl::Status LabeledDataset::Validate() const {
  if (n_classes <= 0) {
    return absl::InvalidArgumentError("n_classes must be positive");
  }
  if (features.size() != labels.size() * dim) {
    return absl::InvalidArgumentError(
        StrCat("feature buffer holds ", features.size(), " values, expected ",
               labels.size(), " x ", dim));
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= n_classes) {
      return absl::InvalidArgumentError(StrCat(
          "label ", labels[i], " at row ", i, " outside [0, ", n_classes, ")"));
    }
  }
  return absl::OkStatus();
}

absl::StatusOr<LabeledDataset> ParseIdx(std::string_view image_bytes,
                                        std::string_view label_bytes,
                                        std::optional<int> n_classes) {
  FLAPS_ASSIGN_OR_RETURN(IdxTensor images,
                         ParseIdxTensor(image_bytes, kIdxImageMagic, "images"));
  FLAPS_ASSIGN_OR_RETURN(IdxTensor labels,
                         ParseIdxTensor(label_bytes, kIdxLabelMagic, "labels"));
  if (images.dims[0] != labels.dims[0]) {
    return absl::InvalidArgumentError(StrCat("image count ", images.dims[0],
                                             " does not match label count ",
                                             labels.dims[0]));
  }
  LabeledDataset data;
  data.dim = static_cast<std::size_t>(images.dims[1]) * images.dims[2];
  data.features.reserve(images.payload.size());
  for (char c : images.payload) {
    data.features.push_back(static_cast<std::uint8_t>(c) / 255.0);
  }
  int max_label = 0;
  for (char c : labels.payload) {
    const int label = static_cast<std::uint8_t>(c);
    data.labels.push_back(label);
    max_label = std::max(max_label, label);
  }
  data.n_classes = n_classes.value_or(max_label + 1);
  FLAPS_RETURN_IF_ERROR(data.Validate());
  return data;
}

absl::StatusOr<LabeledDataset> LoadIdx(const std::string& images_path,
                                       const std::string& labels_path,
                                       std::optional<int> n_classes) {
  FLAPS_ASSIGN_OR_RETURN(std::string images, ReadFile(images_path));
  FLAPS_ASSIGN_OR_RETURN(std::string labels, ReadFile(labels_path));
  return ParseIdx(images, labels, n_classes);
}

absl::StatusOr<IdxBytes> EncodeIdx(const LabeledDataset& data, int rows,
                                   int cols) {
  if (rows <= 0 || cols <= 0 ||
      static_cast<std::size_t>(rows) * cols != data.dim) {
    return absl::InvalidArgumentError(StrCat("image shape ", rows, "x", cols,
                                             " does not match dim ", data.dim));
  }
  IdxBytes out;
  AppendBigEndian32(out.images, kIdxImageMagic);
  AppendBigEndian32(out.images, static_cast<std::uint32_t>(data.size()));
  AppendBigEndian32(out.images, static_cast<std::uint32_t>(rows));
  AppendBigEndian32(out.images, static_cast<std::uint32_t>(cols));
  for (double v : data.features) {
    const double scaled = std::round(v * 255.0);
    if (scaled < 0 || scaled > 255) {
      return absl::InvalidArgumentError("feature outside [0, 1]");
    }
    out.images.push_back(static_cast<char>(static_cast<std::uint8_t>(scaled)));
  }
  AppendBigEndian32(out.labels, kIdxLabelMagic);
  AppendBigEndian32(out.labels, static_cast<std::uint32_t>(data.size()));
  for (int label : data.labels) {
    if (label < 0 || label > 255) {
      return absl::InvalidArgumentError("label does not fit in a byte");
    }
    out.labels.push_back(static_cast<char>(label));
  }
  return out;
}

absl::StatusOr<LabeledDataset> ParseCsv(std::string_view text) {
  std::vector<std::string_view> lines;
  for (std::string_view line : Split(text, '\n')) {
    if (!Trim(line).empty()) lines.push_back(line);
  }
  if (lines.size() < 2) {
    return absl::InvalidArgumentError("csv needs a header and one data row");
  }
  const std::size_t n_cols = Split(lines[0], ',').size();
  if (n_cols < 2) {
    return absl::InvalidArgumentError("csv needs a feature and a label column");
  }
  LabeledDataset data;
  data.dim = n_cols - 1;
  int max_label = 0;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const std::vector<std::string_view> cells = Split(Trim(lines[r]), ',');
    if (cells.size() != n_cols) {
      return absl::InvalidArgumentError(StrCat("csv line ", r + 1, " has ",
                                               cells.size(),
                                               " fields, expected ", n_cols));
    }
    for (std::size_t c = 0; c + 1 < n_cols; ++c) {
      const std::optional<double> v = ParseNumber<double>(cells[c]);
      if (!v.has_value() || !std::isfinite(*v)) {
        return absl::InvalidArgumentError(
            StrCat("csv line ", r + 1, " column ", c + 1, ": not a number"));
      }
      data.features.push_back(*v);
    }
    const std::optional<int> label = ParseNumber<int>(cells.back());
    if (!label.has_value() || *label < 0) {
      return absl::InvalidArgumentError(
          StrCat("csv line ", r + 1, ": bad label '", cells.back(), "'"));
    }
    data.labels.push_back(*label);
    max_label = std::max(max_label, *label);
  }
  for (std::size_t c = 0; c < data.dim; ++c) {
    double lo = data.features[c], hi = data.features[c];
    for (std::size_t i = 0; i < data.size(); ++i) {
      lo = std::min(lo, data.features[i * data.dim + c]);
      hi = std::max(hi, data.features[i * data.dim + c]);
    }
    for (std::size_t i = 0; i < data.size(); ++i) {
      double& v = data.features[i * data.dim + c];
      v = hi > lo ? (v - lo) / (hi - lo) : 0.0;
    }
  }
  data.n_classes = max_label + 1;
  return data;
}

absl::StatusOr<LabeledDataset> LoadCsv(const std::string& path) {
  FLAPS_ASSIGN_OR_RETURN(std::string text, ReadFile(path));
  return ParseCsv(text);
}

absl::StatusOr<LabeledDataset> MakeSynthetic(int n, int dim, int n_classes,
                                             std::uint64_t seed) {
  if (n <= 0 || dim <= 0 || n_classes <= 0) {
    return absl::InvalidArgumentError(
        StrCat("synthetic dataset needs positive n, dim, n_classes; got ", n,
               ", ", dim, ", ", n_classes));
  }
  Rng rng = MakeRng(seed, Stream::kSynthetic);
  std::normal_distribution<double> center_dist(0.0, 2.0);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> centers(static_cast<std::size_t>(n_classes) * dim);
  for (double& c : centers) c = center_dist(rng);

  LabeledDataset data;
  data.dim = dim;
  data.n_classes = n_classes;
  data.features.resize(static_cast<std::size_t>(n) * dim);
  data.labels.resize(n);
  for (int i = 0; i < n; ++i) data.labels[i] = i % n_classes;
  std::shuffle(data.labels.begin(), data.labels.end(), rng);
  for (int i = 0; i < n; ++i) {
    const double* mean =
        &centers[static_cast<std::size_t>(data.labels[i]) * dim];
    for (int d = 0; d < dim; ++d) {
      data.features[static_cast<std::size_t>(i) * dim + d] =
          mean[d] + noise(rng);
    }
  }
  // Single global affine map so class geometry is preserved.
  const auto [lo, hi] =
      std::minmax_element(data.features.begin(), data.features.end());
  const double min_v = *lo, span = *hi - *lo;
  for (double& v : data.features) v = span > 0 ? (v - min_v) / span : 0.0;
  return data;
}

LabeledDataset Subset(const LabeledDataset& data,
                      std::span<const std::int64_t> indices) {
  LabeledDataset out;
  out.dim = data.dim;
  out.n_classes = data.n_classes;
  out.features.reserve(indices.size() * data.dim);
  out.labels.reserve(indices.size());
  for (std::int64_t i : indices) {
    const auto row = data.row(static_cast<std::size_t>(i));
    out.features.insert(out.features.end(), row.begin(), row.end());
    out.labels.push_back(data.labels[static_cast<std::size_t>(i)]);
  }
  return out;
}

absl::StatusOr<TrainTestSplit> SplitTrainTest(const LabeledDataset& data,
                                              double test_fraction,
                                              std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    return absl::InvalidArgumentError("test_fraction must lie in (0, 1)");
  }
  const auto n = static_cast<std::int64_t>(data.size());
  const auto n_test =
      static_cast<std::int64_t>(std::llround(n * test_fraction));
  if (n_test < 1 || n_test >= n) {
    return absl::InvalidArgumentError(
        StrCat("cannot split ", n, " rows with test_fraction ", test_fraction));
  }
  std::vector<std::int64_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng = MakeRng(seed, Stream::kSplit);
  std::shuffle(order.begin(), order.end(), rng);
  std::span<const std::int64_t> all(order);
  return TrainTestSplit{Subset(data, all.subspan(n_test)),
                        Subset(data, all.first(n_test))};
}

absl::StatusOr<std::vector<ClientShard>> PartitionRandom(
    std::int64_t n_examples, int n_clients, std::uint64_t seed) {
  if (n_clients < 1) {
    return absl::InvalidArgumentError("need at least one client");
  }
  if (n_examples < n_clients) {
    return absl::InvalidArgumentError(
        StrCat(n_clients, " clients cannot share ", n_examples, " examples"));
  }
  const std::int64_t base = n_examples / n_clients;
  const std::int64_t remainder = n_examples % n_clients;
  const std::int64_t jitter = std::min<std::int64_t>(2, base / 64);
  Rng rng = MakeRng(seed, Stream::kPartition);

  std::vector<std::int64_t> sizes(n_clients);
  for (int i = 0; i < n_clients; ++i) sizes[i] = base + (i < remainder ? 1 : 0);
  if (jitter > 0) {
    std::uniform_int_distribution<std::int64_t> delta(-jitter, jitter);
    for (int i = 0; i + 1 < n_clients; i += 2) {
      const std::int64_t d = delta(rng);
      sizes[i] += d;
      sizes[i + 1] -= d;
    }
  }
  std::shuffle(sizes.begin(), sizes.end(), rng);

  std::vector<ClientShard> shards;
  shards.reserve(n_clients);
  std::int64_t next = 0;
  for (int i = 0; i < n_clients; ++i) {
    ClientShard s;
    s.user_id = i + 1;
    s.count = sizes[i];
    s.min_index = next;
    s.max_index = next + sizes[i] - 1;
    next += sizes[i];
    shards.push_back(s);
  }
  return shards;
}

absl::StatusOr<std::int64_t> ShardAttribute(const ClientShard& shard,
                                            std::string_view attribute) {
  if (attribute == kUserIdAttr) return shard.user_id;
  if (attribute == kCountAttr) return shard.count;
  if (attribute == kMaxIndexAttr) return shard.max_index;
  if (attribute == kMinIndexAttr) return shard.min_index;
  if (attribute == kClusterIdAttr)
    return shard.cluster_id.value_or(kUnassigned);
  return absl::InvalidArgumentError(
      StrCat("unknown shard attribute '", attribute, "'"));
}

namespace {

void SetShardAttribute(ClientShard& shard, std::string_view attribute,
                       std::int64_t value) {
  if (attribute == kUserIdAttr) shard.user_id = value;
  if (attribute == kCountAttr) shard.count = value;
  if (attribute == kMaxIndexAttr) shard.max_index = value;
  if (attribute == kMinIndexAttr) shard.min_index = value;
  if (attribute == kClusterIdAttr) {
    shard.cluster_id = value == kUnassigned
                           ? std::nullopt
                           : std::optional<std::int64_t>(value);
  }
}

}  // namespace

OneHotCodec::OneHotCodec(std::vector<Codebook> codebooks)
    : codebooks_(std::move(codebooks)) {
  for (const Codebook& book : codebooks_) total_bits_ += book.values.size();
}

absl::StatusOr<OneHotCodec> OneHotCodec::Create(
    std::vector<Codebook> codebooks) {
  std::set<std::string> seen_attributes;
  for (const Codebook& book : codebooks) {
    FLAPS_RETURN_IF_ERROR(
        ShardAttribute(ClientShard{}, book.attribute).status());
    if (!seen_attributes.insert(book.attribute).second) {
      return absl::InvalidArgumentError(
          StrCat("attribute '", book.attribute, "' listed twice"));
    }
    std::set<std::int64_t> seen(book.values.begin(), book.values.end());
    if (seen.size() != book.values.size()) {
      return absl::InvalidArgumentError(
          StrCat("codebook for '", book.attribute, "' has duplicate values"));
    }
  }
  return OneHotCodec(std::move(codebooks));
}

absl::StatusOr<OneHotCodec> OneHotCodec::FromShards(
    std::span<const ClientShard> shards, std::vector<std::string> attributes) {
  std::vector<Codebook> books;
  for (std::string& attribute : attributes) {
    std::set<std::int64_t> values;
    for (const ClientShard& shard : shards) {
      FLAPS_ASSIGN_OR_RETURN(std::int64_t v, ShardAttribute(shard, attribute));
      values.insert(v);
    }
    books.push_back(
        Codebook{std::move(attribute), {values.begin(), values.end()}});
  }
  return Create(std::move(books));
}

const Codebook* OneHotCodec::Find(std::string_view attribute) const {
  for (const Codebook& book : codebooks_) {
    if (book.attribute == attribute) return &book;
  }
  return nullptr;
}

absl::StatusOr<BitString> OneHotCodec::EncodeValue(std::string_view attribute,
                                                   std::int64_t value) const {
  const Codebook* book = Find(attribute);
  if (book == nullptr) {
    return absl::NotFoundError(
        StrCat("codec has no codebook for '", attribute, "'"));
  }
  auto it = std::find(book->values.begin(), book->values.end(), value);
  if (it == book->values.end()) {
    return absl::InvalidArgumentError(StrCat("value ", value, " of attribute '",
                                             attribute, "' not in codebook"));
  }
  BitString block(book->values.size(), 0);
  block[it - book->values.begin()] = 1;
  return block;
}

absl::StatusOr<std::int64_t> OneHotCodec::DecodeValue(
    std::string_view attribute, std::span<const std::uint8_t> block) const {
  const Codebook* book = Find(attribute);
  if (book == nullptr) {
    return absl::NotFoundError(
        StrCat("codec has no codebook for '", attribute, "'"));
  }
  if (block.size() != book->values.size()) {
    return absl::InvalidArgumentError(
        StrCat("block for '", attribute, "' has ", block.size(),
               " bits, codebook has ", book->values.size()));
  }
  std::optional<std::size_t> hot;
  for (std::size_t i = 0; i < block.size(); ++i) {
    if (block[i] == 0) continue;
    if (block[i] != 1 || hot.has_value()) {
      return absl::InvalidArgumentError(
          StrCat("block for '", attribute, "' is not one-hot"));
    }
    hot = i;
  }
  if (!hot.has_value()) {
    return absl::InvalidArgumentError(
        StrCat("block for '", attribute, "' has no set bit"));
  }
  return book->values[*hot];
}

absl::StatusOr<BitString> OneHotCodec::Encode(const ClientShard& shard) const {
  BitString bits;
  bits.reserve(total_bits_);
  for (const Codebook& book : codebooks_) {
    FLAPS_ASSIGN_OR_RETURN(std::int64_t v,
                           ShardAttribute(shard, book.attribute));
    FLAPS_ASSIGN_OR_RETURN(BitString block, EncodeValue(book.attribute, v));
    bits.insert(bits.end(), block.begin(), block.end());
  }
  return bits;
}

absl::StatusOr<ClientShard> OneHotCodec::Decode(
    std::span<const std::uint8_t> bits) const {
  if (bits.size() != total_bits_) {
    return absl::InvalidArgumentError(StrCat(
        "bit string has ", bits.size(), " bits, codec expects ", total_bits_));
  }
  ClientShard shard;
  std::size_t offset = 0;
  for (const Codebook& book : codebooks_) {
    FLAPS_ASSIGN_OR_RETURN(
        std::int64_t v,
        DecodeValue(book.attribute, bits.subspan(offset, book.values.size())));
    SetShardAttribute(shard, book.attribute, v);
    offset += book.values.size();
  }
  return shard;
}

}  // namespace flaps
