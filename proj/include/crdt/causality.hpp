#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <string>

namespace crdt {

/// Identifies a replica. Lexicographic order on the identifier is total and
/// is used wherever a deterministic tie-break is needed.
using ReplicaId = std::string;

/// Unique event identifier: the counter-th event generated at a replica.
struct Dot {
  ReplicaId replica;
  uint64_t counter = 0;

  auto operator<=>(const Dot&) const = default;
};

std::string to_string(const Dot& d);

/// Per-replica summary of contiguously observed event counters.
/// An absent replica is equivalent to an entry of 0; zero entries are never
/// stored, so equal vectors compare equal structurally.
class VersionVector {
 public:
  uint64_t get(const ReplicaId& r) const;
  void set(const ReplicaId& r, uint64_t n);
  void observe(const Dot& d);  // entry := max(entry, d.counter)
  bool contains(const Dot& d) const;
  void join_with(const VersionVector& other);
  bool empty() const { return entries_.empty(); }

  const std::map<ReplicaId, uint64_t>& entries() const { return entries_; }
  bool operator==(const VersionVector&) const = default;

 private:
  std::map<ReplicaId, uint64_t> entries_;
};

Dot next_dot(const VersionVector& vv, const ReplicaId& r);
VersionVector vv_join(const VersionVector& a, const VersionVector& b);
bool vv_leq(const VersionVector& a, const VersionVector& b);
bool dot_seen(const VersionVector& vv, const Dot& d);
std::string to_string(const VersionVector& vv);

/// Totally ordered timestamp consistent with happens-before. Ordering is
/// lexicographic on (physical, logical, replica).
struct HybridTimestamp {
  uint64_t physical = 0;
  uint64_t logical = 0;
  ReplicaId replica;

  auto operator<=>(const HybridTimestamp&) const = default;
};

std::string to_string(const HybridTimestamp& ts);

/// Advances a replica's clock for a local event. The result is strictly
/// greater than `clock`; physical time never regresses.
HybridTimestamp hlc_local(const HybridTimestamp& clock, uint64_t now);

/// Advances a replica's clock on receipt of a remote timestamp. The result is
/// strictly greater than both `clock` and `msg`.
HybridTimestamp hlc_receive(const HybridTimestamp& clock,
                            const HybridTimestamp& msg, uint64_t now);

/// -1 / 0 / +1 comparison on (physical, logical, replica).
int ts_compare(const HybridTimestamp& a, const HybridTimestamp& b);

}  // namespace crdt
