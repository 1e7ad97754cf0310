#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>

#include "crdt/causality.hpp"
#include "crdt/codec.hpp"

namespace crdt {

/// State-based designs. Every type here forms a join semilattice: merge is
/// the least upper bound under leq, and every update is an inflation. The
/// causal-context types (MVRegister, AWSet, RWSet) share the dotted-entry
/// merge rule: an entry present on one side only survives exactly when the
/// other side's context has not seen its dot.

using Element = std::string;
using Value = std::string;

// ---------------------------------------------------------------------------
// Counters

struct GCounter {
  std::map<ReplicaId, uint64_t> counts;

  /// Returns the new count for `r` (the single-entry delta payload).
  uint64_t inc(const ReplicaId& r, uint64_t n = 1);
  int64_t value() const;

  bool operator==(const GCounter&) const = default;
};

GCounter merge(const GCounter& a, const GCounter& b);
bool leq(const GCounter& a, const GCounter& b);
void write(ByteWriter& w, const GCounter& s);
GCounter read_gcounter(ByteReader& r);

struct PNCounter {
  GCounter incs;
  GCounter decs;

  uint64_t inc(const ReplicaId& r, uint64_t n = 1) { return incs.inc(r, n); }
  uint64_t dec(const ReplicaId& r, uint64_t n = 1) { return decs.inc(r, n); }
  int64_t value() const { return incs.value() - decs.value(); }

  bool operator==(const PNCounter&) const = default;
};

PNCounter merge(const PNCounter& a, const PNCounter& b);
bool leq(const PNCounter& a, const PNCounter& b);
void write(ByteWriter& w, const PNCounter& s);
PNCounter read_pncounter(ByteReader& r);

// ---------------------------------------------------------------------------
// Registers

struct LWWRegister {
  std::optional<HybridTimestamp> ts;
  std::optional<Value> value;

  /// Applies the write iff `t` is greater than the current timestamp.
  bool write_value(const Value& v, const HybridTimestamp& t);
  std::optional<Value> read() const { return value; }

  bool operator==(const LWWRegister&) const = default;
};

LWWRegister merge(const LWWRegister& a, const LWWRegister& b);
bool leq(const LWWRegister& a, const LWWRegister& b);
void write(ByteWriter& w, const LWWRegister& s);
LWWRegister read_lwwregister(ByteReader& r);

struct MVRegister {
  std::map<Dot, Value> entries;
  VersionVector ctx;

  struct WriteInfo {
    Dot dot;
    std::set<Dot> cleared;  // dots of the entries this write replaced
  };

  /// Replaces all locally visible entries with (fresh dot, v).
  WriteInfo write_value(const ReplicaId& r, const Value& v);
  std::multiset<Value> read() const;

  bool operator==(const MVRegister&) const = default;
};

MVRegister merge(const MVRegister& a, const MVRegister& b);
bool leq(const MVRegister& a, const MVRegister& b);
void write(ByteWriter& w, const MVRegister& s);
MVRegister read_mvregister(ByteReader& r);

// ---------------------------------------------------------------------------
// Sets

struct AWSet {
  std::map<Element, std::set<Dot>> entries;  // one entry per surviving add
  VersionVector ctx;

  /// Inserts a fresh-dotted entry; returns the minted dot.
  Dot add(const ReplicaId& r, const Element& e);
  /// Deletes all locally visible entries for `e` (their dots stay covered by
  /// the context, which is what makes the remove effective elsewhere).
  /// Removing an element with no visible entries is a no-op.
  std::set<Dot> rmv(const Element& e);

  bool contains(const Element& e) const { return entries.count(e) > 0; }
  std::set<Element> elements() const;

  bool operator==(const AWSet&) const = default;
};

AWSet merge(const AWSet& a, const AWSet& b);
bool leq(const AWSet& a, const AWSet& b);
void write(ByteWriter& w, const AWSet& s);
AWSet read_awset(ByteReader& r);

struct RWSet {
  struct Tags {
    std::set<Dot> adds;
    std::set<Dot> rmvs;

    bool operator==(const Tags&) const = default;
  };

  std::map<Element, Tags> tags;
  VersionVector ctx;

  struct UpdateInfo {
    Dot dot;
    std::set<Dot> discarded;  // opposing tags cancelled by this update
  };

  /// add records a fresh add-tag and discards every locally seen rmv-tag for
  /// the element; rmv does the opposite. An element is present iff it has at
  /// least one add-tag and no rmv-tag, so a remove concurrent with an add
  /// survives the merge and wins.
  UpdateInfo add(const ReplicaId& r, const Element& e);
  UpdateInfo rmv(const ReplicaId& r, const Element& e);

  std::set<Element> elements() const;

  bool operator==(const RWSet&) const = default;
};

RWSet merge(const RWSet& a, const RWSet& b);
bool leq(const RWSet& a, const RWSet& b);
void write(ByteWriter& w, const RWSet& s);
RWSet read_rwset(ByteReader& r);

struct LWWSet {
  struct Rec {
    HybridTimestamp ts;
    bool present = false;

    bool operator==(const Rec&) const = default;
  };

  /// Greatest-timestamp record per element. Removes of never-seen elements
  /// are recorded too: arbitration is by timestamp, not causality.
  std::map<Element, Rec> recs;

  bool add(const Element& e, const HybridTimestamp& ts);
  bool rmv(const Element& e, const HybridTimestamp& ts);
  std::set<Element> elements() const;

  bool operator==(const LWWSet&) const = default;
};

LWWSet merge(const LWWSet& a, const LWWSet& b);
bool leq(const LWWSet& a, const LWWSet& b);
void write(ByteWriter& w, const LWWSet& s);
LWWSet read_lwwset(ByteReader& r);

}  // namespace crdt
