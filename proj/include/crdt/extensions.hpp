#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "crdt/causality.hpp"
#include "crdt/codec.hpp"
#include "crdt/state_crdts.hpp"

namespace crdt {

/// Escrow counter that never goes negative. The decrement budget is split
/// across replicas; each replica consumes or transfers only its own share,
/// so every cell of the bookkeeping is single-writer and entrywise max is a
/// proper join.
class BoundedCounter {
 public:
  BoundedCounter() = default;

  /// Throws std::invalid_argument unless the allocation sums to `initial`
  /// and covers exactly the given replicas.
  static BoundedCounter make(int64_t initial,
                             const std::vector<ReplicaId>& replicas,
                             const std::map<ReplicaId, int64_t>& allocation);

  int64_t value() const;
  int64_t local_rights(const ReplicaId& r) const;

  void inc(const ReplicaId& r, uint64_t n);
  /// False when r lacks rights; the state is unchanged and the caller may
  /// transfer rights or give up.
  bool dec(const ReplicaId& r, uint64_t n);
  /// Executed at `from`; false when `from` lacks rights.
  bool transfer(const ReplicaId& from, const ReplicaId& to, uint64_t n);

  const std::vector<ReplicaId>& replicas() const { return replicas_; }

  /// True iff every replica's view of its own rights is non-negative.
  bool rights_nonnegative() const;

  bool operator==(const BoundedCounter&) const = default;

  friend BoundedCounter merge(const BoundedCounter& a, const BoundedCounter& b);
  friend bool leq(const BoundedCounter& a, const BoundedCounter& b);
  friend void write(ByteWriter& w, const BoundedCounter& s);
  friend BoundedCounter read_bcounter(ByteReader& r);

 private:
  std::vector<ReplicaId> replicas_;
  // rights_[i][i]: initial allocation plus increments performed by i;
  // rights_[i][j]: rights transferred from i to j. Row i is written only
  // by replica i. used_[i]: decrements performed by i.
  std::map<ReplicaId, std::map<ReplicaId, uint64_t>> rights_;
  std::map<ReplicaId, uint64_t> used_;
};

BoundedCounter merge(const BoundedCounter& a, const BoundedCounter& b);
bool leq(const BoundedCounter& a, const BoundedCounter& b);
void write(ByteWriter& w, const BoundedCounter& s);
BoundedCounter read_bcounter(ByteReader& r);

// ---------------------------------------------------------------------------

struct TopKEntry {
  Element elem;
  int64_t score = 0;
  Dot dot;  // the add's event identity

  bool operator==(const TopKEntry&) const = default;
};

/// True when a outranks b: higher score first, then element, then dot.
bool topk_outranks(const TopKEntry& a, const TopKEntry& b);

/// Non-uniformly replicated top-K set. Replicas store the known top-K plus
/// the adds they generated locally; adds that never reach any top are never
/// shipped. A remove tombstones every add the removing replica had learned
/// of, recorded as a per-element kill context, so an entry evicted from the
/// top elsewhere still dies when its add was known to the remover.
class TopKSet {
 public:
  TopKSet() = default;
  explicit TopKSet(uint64_t k) : k_(k) {}

  struct Removal {
    VersionVector kill_ctx;     // add-dots this element's removes cover
    std::set<Dot> rmv_events;   // identities of the removes themselves

    bool operator==(const Removal&) const = default;
  };

  /// Entries that newly entered the local top as a consequence of a call.
  using Entered = std::vector<TopKEntry>;

  Entered add(const Element& e, int64_t score, const Dot& event_dot);
  Entered rmv(const Element& e, const Dot& rmv_event,
              const VersionVector& known);
  /// Merges a sync payload (another replica's top + removals).
  Entered merge_in(const TopKSet& payload);

  /// Live top-K in rank order.
  const std::vector<TopKEntry>& read() const { return tops_; }
  uint64_t k() const { return k_; }
  const std::vector<TopKEntry>& local_adds() const { return local_adds_; }
  const std::map<Element, Removal>& removals() const { return removals_; }

  bool dead(const TopKEntry& e) const;

  /// Sync payload: top entries and removals only; local non-top adds stay
  /// home. Decode yields a TopKSet with empty local_adds.
  std::string encode_sync() const;
  static TopKSet decode_sync(const std::string& bytes);
  /// Full encoding including local adds (snapshots, fixpoint detection).
  std::string encode_full() const;

  bool operator==(const TopKSet&) const = default;

 private:
  Entered recompute(const std::vector<TopKEntry>& incoming);

  uint64_t k_ = 1;
  std::vector<TopKEntry> tops_;        // rank order, per-element best, <= k
  std::vector<TopKEntry> local_adds_;  // live adds generated here
  std::map<Element, Removal> removals_;
};

}  // namespace crdt
