// Weaver: greybox fuzzing at the JS-Wasm boundary.
// Copyright 2026 The Weaver Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace weaver {

using Bytes = std::vector<uint8_t>;

// Deterministic random source. All randomness in a worker flows through one
// of these; the bounded draws are implemented by hand so the sequence does
// not depend on the standard library's distribution internals.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next() { return engine_(); }

  // Uniform in [0, bound). bound == 0 returns 0.
  uint64_t below(uint64_t bound) {
    if (bound == 0) return 0;
    // Rejection sampling to avoid modulo bias.
    const uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    uint64_t v = engine_();
    while (v >= limit) v = engine_();
    return v % bound;
  }

  // Uniform integer in [lo, hi] inclusive.
  int64_t range(int64_t lo, int64_t hi) {
    return lo + static_cast<int64_t>(below(static_cast<uint64_t>(hi - lo) + 1));
  }

  // Uniform in [0, 1).
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool chance(double p) { return unit() < p; }

  template <typename T>
  const T& pick(const std::vector<T>& items) {
    return items[below(items.size())];
  }

  uint64_t fork_seed() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

// 64-bit FNV-1a, used for content-addressed filenames and feature hashing.
inline uint64_t fnv1a(std::span<const uint8_t> data, uint64_t seed = 0xcbf29ce484222325ull) {
  uint64_t h = seed;
  for (uint8_t b : data) {
    h ^= b;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline uint64_t fnv1a(const std::string& s) {
  return fnv1a(std::span<const uint8_t>(reinterpret_cast<const uint8_t*>(s.data()), s.size()));
}

inline std::string hex64(uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[i] = digits[v & 0xf];
    v >>= 4;
  }
  return s;
}

// --- byte stream helpers (LEB128 and friends) ---

class ByteWriter {
 public:
  Bytes take() { return std::move(buf_); }
  const Bytes& bytes() const { return buf_; }
  size_t size() const { return buf_.size(); }

  void u8(uint8_t v) { buf_.push_back(v); }
  void raw(std::span<const uint8_t> data) { buf_.insert(buf_.end(), data.begin(), data.end()); }
  void raw(const Bytes& data) { buf_.insert(buf_.end(), data.begin(), data.end()); }

  void u32_fixed(uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }
  void u64_fixed(uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }

  void uleb(uint64_t v) {
    do {
      uint8_t b = v & 0x7f;
      v >>= 7;
      if (v != 0) b |= 0x80;
      buf_.push_back(b);
    } while (v != 0);
  }

  void sleb(int64_t v) {
    bool more = true;
    while (more) {
      uint8_t b = v & 0x7f;
      v >>= 7;
      if ((v == 0 && !(b & 0x40)) || (v == -1 && (b & 0x40))) more = false;
      else b |= 0x80;
      buf_.push_back(b);
    }
  }

  void name(const std::string& s) {
    uleb(s.size());
    raw(std::span<const uint8_t>(reinterpret_cast<const uint8_t*>(s.data()), s.size()));
  }

 private:
  Bytes buf_;
};

// Thrown with the byte offset where decoding went wrong.
class DecodeError : public std::runtime_error {
 public:
  DecodeError(const std::string& what, size_t offset)
      : std::runtime_error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
  size_t offset() const { return offset_; }

 private:
  size_t offset_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const uint8_t> data) : data_(data) {}

  size_t pos() const { return pos_; }
  size_t remaining() const { return data_.size() - pos_; }
  bool done() const { return pos_ >= data_.size(); }

  uint8_t u8() {
    if (pos_ >= data_.size()) fail("unexpected end of input");
    return data_[pos_++];
  }

  uint8_t peek() const {
    if (pos_ >= data_.size()) throw DecodeError("unexpected end of input", pos_);
    return data_[pos_];
  }

  uint32_t u32_fixed() {
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(u8()) << (8 * i);
    return v;
  }
  uint64_t u64_fixed() {
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(u8()) << (8 * i);
    return v;
  }

  uint64_t uleb(int max_bits = 64) {
    uint64_t result = 0;
    int shift = 0;
    while (true) {
      if (shift >= max_bits + 6) fail("uleb too long");
      uint8_t b = u8();
      result |= static_cast<uint64_t>(b & 0x7f) << shift;
      if (!(b & 0x80)) break;
      shift += 7;
    }
    return result;
  }

  int64_t sleb(int max_bits = 64) {
    int64_t result = 0;
    int shift = 0;
    uint8_t b;
    do {
      if (shift >= max_bits + 6) fail("sleb too long");
      b = u8();
      result |= static_cast<int64_t>(b & 0x7f) << shift;
      shift += 7;
    } while (b & 0x80);
    if (shift < 64 && (b & 0x40)) result |= -(int64_t(1) << shift);
    return result;
  }

  uint32_t uleb32() {
    uint64_t v = uleb(32);
    if (v > UINT32_MAX) fail("u32 out of range");
    return static_cast<uint32_t>(v);
  }

  Bytes raw(size_t n) {
    if (remaining() < n) fail("unexpected end of input");
    Bytes out(data_.begin() + pos_, data_.begin() + pos_ + n);
    pos_ += n;
    return out;
  }

  void skip(size_t n) {
    if (remaining() < n) fail("unexpected end of input");
    pos_ += n;
  }

  std::string name() {
    uint32_t len = uleb32();
    if (remaining() < len) fail("name exceeds input");
    std::string s(reinterpret_cast<const char*>(data_.data() + pos_), len);
    pos_ += len;
    return s;
  }

  [[noreturn]] void fail(const std::string& msg) const { throw DecodeError(msg, pos_); }

 private:
  std::span<const uint8_t> data_;
  size_t pos_ = 0;
};

}  // namespace weaver
