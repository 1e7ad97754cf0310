#pragma once

#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>

#include "crdt/causality.hpp"

namespace crdt {

struct CodecError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Big-endian, length-prefixed byte encoding. Field order is fixed by the
/// caller, so equal values always encode to identical bytes.
class ByteWriter {
 public:
  void put_u8(uint8_t v) { buf_.push_back(static_cast<char>(v)); }

  void put_u64(uint64_t v) {
    for (int shift = 56; shift >= 0; shift -= 8) {
      buf_.push_back(static_cast<char>((v >> shift) & 0xff));
    }
  }

  void put_i64(int64_t v) { put_u64(static_cast<uint64_t>(v)); }

  void put_bool(bool v) { put_u8(v ? 1 : 0); }

  void put_str(std::string_view s) {
    put_u64(s.size());
    buf_.append(s.data(), s.size());
  }

  void put_raw(std::string_view s) { buf_.append(s.data(), s.size()); }

  const std::string& bytes() const { return buf_; }
  std::string take() { return std::move(buf_); }

 private:
  std::string buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::string_view data) : data_(data) {}

  uint8_t get_u8() {
    need(1);
    return static_cast<uint8_t>(data_[pos_++]);
  }

  uint64_t get_u64() {
    need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v = (v << 8) | static_cast<uint8_t>(data_[pos_++]);
    }
    return v;
  }

  int64_t get_i64() { return static_cast<int64_t>(get_u64()); }

  bool get_bool() { return get_u8() != 0; }

  std::string get_str() {
    uint64_t n = get_u64();
    need(n);
    std::string s(data_.substr(pos_, n));
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == data_.size(); }

  void expect_done() const {
    if (!done()) throw CodecError("trailing bytes in encoded value");
  }

 private:
  void need(uint64_t n) const {
    if (pos_ + n > data_.size()) throw CodecError("truncated encoded value");
  }

  std::string_view data_;
  size_t pos_ = 0;
};

inline void write(ByteWriter& w, const Dot& d) {
  w.put_str(d.replica);
  w.put_u64(d.counter);
}

inline Dot read_dot(ByteReader& r) {
  Dot d;
  d.replica = r.get_str();
  d.counter = r.get_u64();
  return d;
}

inline void write(ByteWriter& w, const VersionVector& vv) {
  w.put_u64(vv.entries().size());
  for (const auto& [replica, n] : vv.entries()) {
    w.put_str(replica);
    w.put_u64(n);
  }
}

inline VersionVector read_vv(ByteReader& r) {
  VersionVector vv;
  uint64_t n = r.get_u64();
  for (uint64_t i = 0; i < n; ++i) {
    ReplicaId replica = r.get_str();
    vv.set(replica, r.get_u64());
  }
  return vv;
}

inline void write(ByteWriter& w, const HybridTimestamp& ts) {
  w.put_u64(ts.physical);
  w.put_u64(ts.logical);
  w.put_str(ts.replica);
}

inline HybridTimestamp read_ts(ByteReader& r) {
  HybridTimestamp ts;
  ts.physical = r.get_u64();
  ts.logical = r.get_u64();
  ts.replica = r.get_str();
  return ts;
}

inline void write(ByteWriter& w, const std::set<Dot>& dots) {
  w.put_u64(dots.size());
  for (const Dot& d : dots) write(w, d);
}

inline std::set<Dot> read_dot_set(ByteReader& r) {
  std::set<Dot> dots;
  uint64_t n = r.get_u64();
  for (uint64_t i = 0; i < n; ++i) dots.insert(read_dot(r));
  return dots;
}

}  // namespace crdt
