#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>

#include "crdt/causality.hpp"
#include "crdt/codec.hpp"
#include "crdt/state_crdts.hpp"

namespace crdt {

/// Delta-state replication. An update produces a small delta that, merged
/// into the pre-state, yields the post-state; anti-entropy ships joins of
/// buffered deltas instead of full states.
///
/// Counter deltas are ordinary (sub-)states. The causal types carry an exact
/// dot-set context instead of a version vector: a delta only answers for the
/// dots it explicitly lists, which is what makes joining and re-delivering
/// deltas safe. Applying a delta to a full state advances the state's
/// contiguous context, so delta streams must be gap-free per origin; the
/// anti-entropy layer guarantees that and `apply_delta` enforces it.

struct MiddlewareViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Counter deltas: the delta of an inc is the single updated entry.

GCounter delta_inc(GCounter& s, const ReplicaId& r, uint64_t n = 1);
void apply_delta(GCounter& s, const GCounter& d);
inline GCounter join(const GCounter& a, const GCounter& b) { return merge(a, b); }

PNCounter delta_pn_inc(PNCounter& s, const ReplicaId& r, uint64_t n = 1);
PNCounter delta_pn_dec(PNCounter& s, const ReplicaId& r, uint64_t n = 1);
void apply_delta(PNCounter& s, const PNCounter& d);
inline PNCounter join(const PNCounter& a, const PNCounter& b) {
  return merge(a, b);
}

// ---------------------------------------------------------------------------
// Add-wins set deltas

struct AWSetDelta {
  std::map<Element, std::set<Dot>> entries;
  std::set<Dot> ctx;  // exactly the dots whose fate this delta decides

  bool operator==(const AWSetDelta&) const = default;
};

AWSetDelta delta_add(AWSet& s, const ReplicaId& r, const Element& e);
AWSetDelta delta_rmv(AWSet& s, const Element& e);
AWSetDelta join(const AWSetDelta& a, const AWSetDelta& b);
void apply_delta(AWSet& s, const AWSetDelta& d);
void write(ByteWriter& w, const AWSetDelta& d);
AWSetDelta read_awset_delta(ByteReader& r);

// ---------------------------------------------------------------------------
// Multi-value register deltas

struct MVRegDelta {
  std::map<Dot, Value> entries;
  std::set<Dot> ctx;

  bool operator==(const MVRegDelta&) const = default;
};

MVRegDelta delta_write(MVRegister& s, const ReplicaId& r, const Value& v);
MVRegDelta join(const MVRegDelta& a, const MVRegDelta& b);
void apply_delta(MVRegister& s, const MVRegDelta& d);
void write(ByteWriter& w, const MVRegDelta& d);
MVRegDelta read_mvreg_delta(ByteReader& r);

// ---------------------------------------------------------------------------
// Anti-entropy buffer

/// One buffered update: its identity (origin + per-origin index), the encoded
/// delta, and the updates whose effects the producing replica had applied
/// when it ran. The knowledge vector is what makes forwarded intervals
/// causally safe: a peer only receives an update together with (or after)
/// everything that update could see.
struct DeltaLogEntry {
  Dot update_dot;
  std::string delta;
  VersionVector knowledge;

  bool operator==(const DeltaLogEntry&) const = default;
};

/// Per-replica buffer of deltas, ordered per origin, with per-peer
/// acknowledgements. Locally produced deltas are appended; deltas received
/// in intervals are stored too so they can be forwarded. A peer is served
/// the join of every buffered delta above its acknowledged position; when
/// the needed entries were discarded (or were never buffered because the
/// state arrived whole), the full state is sent instead.
class DeltaBuffer {
 public:
  void record_local(DeltaLogEntry e);
  /// Stores shipped entries that extend the per-origin sequence; gaps are
  /// skipped (their effects were applied, they just cannot be forwarded).
  void record_remote(const std::vector<DeltaLogEntry>& entries);

  struct Outgoing {
    enum class Kind { None, Full, Interval };
    Kind kind = Kind::None;
    std::vector<DeltaLogEntry> entries;  // Interval only
  };

  /// Decides what to send to `peer`, given everything this replica has
  /// applied (`my_seen`). Never mutates the buffer.
  Outgoing assemble(const ReplicaId& peer, const VersionVector& my_seen) const;

  /// Peer acknowledged everything it has applied; prunes entries every
  /// known peer has acknowledged.
  void on_ack(const ReplicaId& peer, const VersionVector& acked);

  /// Drops buffered entries of `origin` with index <= idx regardless of
  /// acknowledgements (storage pressure; forces a full-state resend).
  void discard_through(const ReplicaId& origin, uint64_t idx);

  uint64_t held_from(const ReplicaId& origin) const;  // first index held
  uint64_t held_to(const ReplicaId& origin) const;    // last index held
  const std::map<ReplicaId, VersionVector>& peer_acks() const {
    return peer_acks_;
  }

 private:
  void gc();

  // Entries per origin, contiguous; front() has index start_[origin].
  std::map<ReplicaId, std::vector<DeltaLogEntry>> logs_;
  std::map<ReplicaId, uint64_t> start_;
  std::map<ReplicaId, VersionVector> peer_acks_;
};

}  // namespace crdt
