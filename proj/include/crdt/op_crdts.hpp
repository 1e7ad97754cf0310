#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>

#include "crdt/causality.hpp"
#include "crdt/codec.hpp"
#include "crdt/state_crdts.hpp"

namespace crdt {

/// Operation-based designs follow the generator/effector split: a pure
/// generator reads the origin replica's state and produces an effector, which
/// the delivery layer applies exactly once at every replica in causal order.
/// Under those delivery guarantees, concurrent effectors here commute, which
/// is what makes replicas converge.

struct CounterAddEff {
  int64_t amount = 0;

  bool operator==(const CounterAddEff&) const = default;
};

struct AWSetAddEff {
  Element elem;
  Dot dot;

  bool operator==(const AWSetAddEff&) const = default;
};

struct AWSetRmvEff {
  Element elem;
  std::set<Dot> observed;  // the add-dots visible at the origin

  bool operator==(const AWSetRmvEff&) const = default;
};

struct WWCounterWrEff {
  int64_t value = 0;  // arbitration timestamp lives in Effector::ts

  bool operator==(const WWCounterWrEff&) const = default;
};

struct WWCounterDeltaEff {
  int64_t amount = 0;
  /// Timestamp of the write this inc/dec causally follows; empty when the
  /// origin had seen no write. The effect is discarded at replicas whose
  /// current winning write is newer.
  std::optional<HybridTimestamp> base_ts;

  bool operator==(const WWCounterDeltaEff&) const = default;
};

using EffectorPayload = std::variant<CounterAddEff, AWSetAddEff, AWSetRmvEff,
                                     WWCounterWrEff, WWCounterDeltaEff>;

struct Effector {
  ReplicaId origin;
  uint64_t seq = 0;    // contiguous per origin
  VersionVector deps;  // effectors applied at the origin when generated
  HybridTimestamp ts;
  EffectorPayload payload;

  Dot dot() const { return Dot{origin, seq}; }

  bool operator==(const Effector&) const = default;
};

void write(ByteWriter& w, const Effector& e);
Effector read_effector(ByteReader& r);

/// True when neither effector's dependencies cover the other.
bool effectors_concurrent(const Effector& a, const Effector& b);

// ---------------------------------------------------------------------------
// Counter

struct OpCounter {
  int64_t value = 0;

  bool operator==(const OpCounter&) const = default;
};

Effector gen_counter_add(const OpCounter& s, const ReplicaId& origin,
                         uint64_t seq, const VersionVector& deps,
                         const HybridTimestamp& ts, int64_t amount);
void effect(OpCounter& s, const Effector& e);

// ---------------------------------------------------------------------------
// Add-wins set

struct OpAWSet {
  std::map<Element, std::set<Dot>> entries;

  std::set<Element> elements() const;

  bool operator==(const OpAWSet&) const = default;
};

Effector gen_awset_add(const OpAWSet& s, const ReplicaId& origin, uint64_t seq,
                       const VersionVector& deps, const HybridTimestamp& ts,
                       const Element& elem);
Effector gen_awset_rmv(const OpAWSet& s, const ReplicaId& origin, uint64_t seq,
                       const VersionVector& deps, const HybridTimestamp& ts,
                       const Element& elem);
void effect(OpAWSet& s, const Effector& e);

// ---------------------------------------------------------------------------
// Write-wins counter

struct OpWWCounter {
  std::optional<HybridTimestamp> base_ts;
  int64_t base = 0;   // value of the winning write
  int64_t delta = 0;  // net inc/dec that followed the winning write

  int64_t value() const { return base + delta; }

  bool operator==(const OpWWCounter&) const = default;
};

Effector gen_ww_write(const OpWWCounter& s, const ReplicaId& origin,
                      uint64_t seq, const VersionVector& deps,
                      const HybridTimestamp& ts, int64_t value);
Effector gen_ww_add(const OpWWCounter& s, const ReplicaId& origin, uint64_t seq,
                    const VersionVector& deps, const HybridTimestamp& ts,
                    int64_t amount);
void effect(OpWWCounter& s, const Effector& e);

/// Test utility: applies the two effectors in both orders to a copy of
/// `state` and reports whether the results agree.
template <typename S>
bool commutes(const Effector& a, const Effector& b, S state) {
  S ab = state;
  effect(ab, a);
  effect(ab, b);
  effect(state, b);
  effect(state, a);
  return ab == state;
}

}  // namespace crdt
