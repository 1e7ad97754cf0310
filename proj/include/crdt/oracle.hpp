#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "crdt/causality.hpp"

namespace crdt::oracle {

/// The oracle evaluates concurrency semantics directly over an explicit
/// operation history: a set of update events plus a happens-before partial
/// order. It is the brute-force reference every replicated type is checked
/// against.

enum class OpKind { Add, Rmv, Wr, Inc, Dec };

std::string to_string(OpKind k);

struct OpEvent {
  Dot id;
  OpKind kind = OpKind::Add;
  std::string elem;    // add/rmv: the element
  std::string value;   // wr on registers: the written value
  int64_t amount = 1;  // inc/dec amounts; wr on counters: the written value
  HybridTimestamp ts;
};

enum class ViolationCode {
  Ok,
  DuplicateId,
  CycleDetected,
  PerReplicaOrderBroken,
  TimestampOrderBroken,
};

struct ValidationReport {
  ViolationCode code = ViolationCode::Ok;
  std::string detail;
  std::optional<std::pair<Dot, Dot>> witness;

  bool ok() const { return code == ViolationCode::Ok; }
};

struct InvalidHistory : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class History {
 public:
  /// Throws std::invalid_argument on a duplicate event id.
  void add_event(OpEvent e);

  /// Records a happens-before edge a -> b. Queries use the transitive
  /// closure, so edges already implied are harmless.
  /// Throws std::invalid_argument if either id is unknown.
  void add_hb(const Dot& a, const Dot& b);

  bool happens_before(const Dot& a, const Dot& b) const;
  /// Throws std::invalid_argument for unknown ids or a == b.
  bool concurrent(const Dot& a, const Dot& b) const;

  ValidationReport validate() const;

  const std::vector<OpEvent>& events() const { return events_; }
  const OpEvent& event(const Dot& id) const;
  bool has_event(const Dot& id) const { return index_.count(id) > 0; }
  size_t size() const { return events_.size(); }

 private:
  size_t index_of(const Dot& id) const;
  const std::vector<std::vector<uint64_t>>& closure() const;
  bool reaches(size_t a, size_t b) const;

  std::vector<OpEvent> events_;
  std::map<Dot, size_t> index_;
  std::set<std::pair<size_t, size_t>> edges_;

  mutable std::vector<std::vector<uint64_t>> closure_;
  mutable bool closure_valid_ = false;
};

/// Add-wins: an element is present iff some add of it has no remove of the
/// same element after it.
std::set<std::string> eval_aw_set(const History& h);

/// Remove-wins: an element is present iff it was added at least once and
/// every remove of it happens-before some add of it. A remove concurrent
/// with every add therefore wins.
std::set<std::string> eval_rw_set(const History& h);

/// Last-writer-wins: an element is present iff the timestamp-maximal
/// operation on it is an add.
std::set<std::string> eval_lww_set(const History& h);

/// Values of all happens-before-maximal writes, duplicates kept.
std::multiset<std::string> eval_mv_register(const History& h);

/// Value of the timestamp-maximal write, if any write exists.
std::optional<std::string> eval_lww_register(const History& h);

/// Sum of increment amounts minus sum of decrement amounts.
int64_t eval_counter(const History& h);

/// Write-wins counter: value of the timestamp-maximal write plus the net of
/// increments/decrements that happened after that write. Falls back to
/// eval_counter when no write exists.
int64_t eval_ww_counter(const History& h);

}  // namespace crdt::oracle
