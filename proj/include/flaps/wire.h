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

#ifndef FLAPS_WIRE_H_
#define FLAPS_WIRE_H_

#include <bit>
#include <cstdint>
#include <string>
#include <string_view>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "flaps/str_util.h"

namespace flaps {

// Appends big-endian integers and raw bytes to a string.
class ByteWriter {
 public:
  void U8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void U32(std::uint32_t v) { BigEndian(v, 4); }
  void U64(std::uint64_t v) { BigEndian(v, 8); }
  void I64(std::int64_t v) { U64(static_cast<std::uint64_t>(v)); }
  void F64(double v) { U64(std::bit_cast<std::uint64_t>(v)); }
  void Bytes(std::string_view b) { out_.append(b); }
  void LengthPrefixed(std::string_view b) {
    U32(static_cast<std::uint32_t>(b.size()));
    Bytes(b);
  }

  const std::string& data() const { return out_; }
  std::string Release() { return std::move(out_); }

 private:
  void BigEndian(std::uint64_t v, int width) {
    for (int shift = 8 * (width - 1); shift >= 0; shift -= 8) {
      out_.push_back(static_cast<char>((v >> shift) & 0xff));
    }
  }

  std::string out_;
};

// Bounds-checked big-endian reader. Errors carry the failing byte offset.
class ByteReader {
 public:
  explicit ByteReader(std::string_view in) : in_(in) {}

  absl::StatusOr<std::uint8_t> U8() {
    auto v = BigEndian(1);
    if (!v.ok()) return v.status();
    return static_cast<std::uint8_t>(*v);
  }
  absl::StatusOr<std::uint32_t> U32() {
    auto v = BigEndian(4);
    if (!v.ok()) return v.status();
    return static_cast<std::uint32_t>(*v);
  }
  absl::StatusOr<std::uint64_t> U64() { return BigEndian(8); }
  absl::StatusOr<std::int64_t> I64() {
    auto v = BigEndian(8);
    if (!v.ok()) return v.status();
    return static_cast<std::int64_t>(*v);
  }
  absl::StatusOr<double> F64() {
    auto v = BigEndian(8);
    if (!v.ok()) return v.status();
    return std::bit_cast<double>(*v);
  }
  absl::StatusOr<std::string_view> Bytes(std::size_t n) {
    if (remaining() < n) return Truncated(n);
    std::string_view out = in_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  absl::StatusOr<std::string_view> LengthPrefixed() {
    auto n = U32();
    if (!n.ok()) return n.status();
    return Bytes(*n);
  }

  std::size_t offset() const { return pos_; }
  std::size_t remaining() const { return in_.size() - pos_; }
  bool done() const { return pos_ == in_.size(); }

 private:
  absl::Status Truncated(std::size_t want) const {
    return absl::DataLossError(StrCat("truncated input at byte offset ", pos_,
                                      ": need ", want, " bytes, have ",
                                      remaining()));
  }
  absl::StatusOr<std::uint64_t> BigEndian(std::size_t width) {
    if (remaining() < width) return Truncated(width);
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < width; ++i) {
      v = (v << 8) | static_cast<std::uint8_t>(in_[pos_ + i]);
    }
    pos_ += width;
    return v;
  }

  std::string_view in_;
  std::size_t pos_ = 0;
};

}  // namespace flaps

#endif  // FLAPS_WIRE_H_
