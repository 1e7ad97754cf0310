#include "crdt/delta.hpp"

#include <algorithm>
#include <vector>

namespace crdt {

namespace {

/// Advances the contiguous context of a full state over the exact dots a
/// delta covers. Dots already seen are fine (re-delivery); a gap means the
/// anti-entropy layer shipped a non-contiguous stream, which is a bug.
void advance_ctx(VersionVector& ctx, const std::set<Dot>& dots) {
  // std::set<Dot> iterates grouped by replica, counters ascending.
  for (const Dot& d : dots) {
    uint64_t have = ctx.get(d.replica);
    if (d.counter <= have) continue;
    if (d.counter == have + 1) {
      ctx.observe(d);
    } else {
      throw MiddlewareViolation("delta context gap at " + to_string(d) +
                                " (have " + std::to_string(have) + ")");
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Counters

GCounter delta_inc(GCounter& s, const ReplicaId& r, uint64_t n) {
  GCounter d;
  d.counts[r] = s.inc(r, n);
  return d;
}

void apply_delta(GCounter& s, const GCounter& d) { s = merge(s, d); }

PNCounter delta_pn_inc(PNCounter& s, const ReplicaId& r, uint64_t n) {
  PNCounter d;
  d.incs.counts[r] = s.inc(r, n);
  return d;
}

PNCounter delta_pn_dec(PNCounter& s, const ReplicaId& r, uint64_t n) {
  PNCounter d;
  d.decs.counts[r] = s.dec(r, n);
  return d;
}

void apply_delta(PNCounter& s, const PNCounter& d) { s = merge(s, d); }

// ---------------------------------------------------------------------------
// Add-wins set

AWSetDelta delta_add(AWSet& s, const ReplicaId& r, const Element& e) {
  Dot d = s.add(r, e);
  AWSetDelta out;
  out.entries[e].insert(d);
  out.ctx.insert(d);
  return out;
}

AWSetDelta delta_rmv(AWSet& s, const Element& e) {
  AWSetDelta out;
  out.ctx = s.rmv(e);  // covered but absent: the remove itself
  return out;
}

AWSetDelta join(const AWSetDelta& a, const AWSetDelta& b) {
  AWSetDelta out;
  auto in = [](const AWSetDelta& d, const Element& e, const Dot& dot) {
    auto it = d.entries.find(e);
    return it != d.entries.end() && it->second.count(dot) > 0;
  };
  for (const auto& [e, dots] : a.entries) {
    for (const Dot& dot : dots) {
      if (in(b, e, dot) || !b.ctx.count(dot)) out.entries[e].insert(dot);
    }
  }
  for (const auto& [e, dots] : b.entries) {
    for (const Dot& dot : dots) {
      if (!in(a, e, dot) && !a.ctx.count(dot)) out.entries[e].insert(dot);
    }
  }
  out.ctx = a.ctx;
  out.ctx.insert(b.ctx.begin(), b.ctx.end());
  return out;
}

void apply_delta(AWSet& s, const AWSetDelta& d) {
  // Deletions: state entries the delta covers but no longer lists.
  for (auto it = s.entries.begin(); it != s.entries.end();) {
    auto& [e, dots] = *it;
    for (auto dit = dots.begin(); dit != dots.end();) {
      bool listed = false;
      auto del = d.entries.find(e);
      if (del != d.entries.end() && del->second.count(*dit)) listed = true;
      if (!listed && d.ctx.count(*dit)) {
        dit = dots.erase(dit);
      } else {
        ++dit;
      }
    }
    it = dots.empty() ? s.entries.erase(it) : std::next(it);
  }
  // Additions: delta entries the state has not seen.
  for (const auto& [e, dots] : d.entries) {
    for (const Dot& dot : dots) {
      if (!s.ctx.contains(dot)) s.entries[e].insert(dot);
    }
  }
  advance_ctx(s.ctx, d.ctx);
}

void write(ByteWriter& w, const AWSetDelta& d) {
  w.put_u64(d.entries.size());
  for (const auto& [e, dots] : d.entries) {
    w.put_str(e);
    write(w, dots);
  }
  write(w, d.ctx);
}

AWSetDelta read_awset_delta(ByteReader& r) {
  AWSetDelta d;
  uint64_t n = r.get_u64();
  for (uint64_t i = 0; i < n; ++i) {
    Element e = r.get_str();
    d.entries[e] = read_dot_set(r);
  }
  d.ctx = read_dot_set(r);
  return d;
}

// ---------------------------------------------------------------------------
// Multi-value register

MVRegDelta delta_write(MVRegister& s, const ReplicaId& r, const Value& v) {
  MVRegister::WriteInfo info = s.write_value(r, v);
  MVRegDelta out;
  out.entries[info.dot] = v;
  out.ctx = std::move(info.cleared);
  out.ctx.insert(info.dot);
  return out;
}

MVRegDelta join(const MVRegDelta& a, const MVRegDelta& b) {
  MVRegDelta out;
  for (const auto& [dot, v] : a.entries) {
    if (b.entries.count(dot) || !b.ctx.count(dot)) out.entries[dot] = v;
  }
  for (const auto& [dot, v] : b.entries) {
    if (!a.entries.count(dot) && !a.ctx.count(dot)) out.entries[dot] = v;
  }
  out.ctx = a.ctx;
  out.ctx.insert(b.ctx.begin(), b.ctx.end());
  return out;
}

void apply_delta(MVRegister& s, const MVRegDelta& d) {
  for (auto it = s.entries.begin(); it != s.entries.end();) {
    if (!d.entries.count(it->first) && d.ctx.count(it->first)) {
      it = s.entries.erase(it);
    } else {
      ++it;
    }
  }
  for (const auto& [dot, v] : d.entries) {
    if (!s.ctx.contains(dot)) s.entries[dot] = v;
  }
  advance_ctx(s.ctx, d.ctx);
}

void write(ByteWriter& w, const MVRegDelta& d) {
  w.put_u64(d.entries.size());
  for (const auto& [dot, v] : d.entries) {
    write(w, dot);
    w.put_str(v);
  }
  write(w, d.ctx);
}

MVRegDelta read_mvreg_delta(ByteReader& r) {
  MVRegDelta d;
  uint64_t n = r.get_u64();
  for (uint64_t i = 0; i < n; ++i) {
    Dot dot = read_dot(r);
    d.entries[dot] = r.get_str();
  }
  d.ctx = read_dot_set(r);
  return d;
}

// ---------------------------------------------------------------------------
// DeltaBuffer

void DeltaBuffer::record_local(DeltaLogEntry e) {
  const ReplicaId& origin = e.update_dot.replica;
  auto& log = logs_[origin];
  uint64_t& start = start_.emplace(origin, 1).first->second;
  uint64_t next = start + log.size();
  if (e.update_dot.counter != next) {
    throw MiddlewareViolation("local delta index " +
                              std::to_string(e.update_dot.counter) +
                              " does not extend buffer at " +
                              std::to_string(next));
  }
  log.push_back(std::move(e));
}

void DeltaBuffer::record_remote(const std::vector<DeltaLogEntry>& entries) {
  for (const DeltaLogEntry& e : entries) {
    const ReplicaId& origin = e.update_dot.replica;
    auto& log = logs_[origin];
    uint64_t& start = start_.emplace(origin, 1).first->second;
    uint64_t next = start + log.size();
    if (e.update_dot.counter == next) {
      log.push_back(e);
    }
    // Lower: duplicate. Higher: a gap (effects arrived via a full state
    // before); skipped, which only costs a full-state resend downstream.
  }
}

uint64_t DeltaBuffer::held_from(const ReplicaId& origin) const {
  auto it = start_.find(origin);
  return it == start_.end() ? 1 : it->second;
}

uint64_t DeltaBuffer::held_to(const ReplicaId& origin) const {
  auto it = logs_.find(origin);
  if (it == logs_.end()) return 0;
  return held_from(origin) + it->second.size() - 1;
}

DeltaBuffer::Outgoing DeltaBuffer::assemble(const ReplicaId& peer,
                                            const VersionVector& my_seen) const {
  auto ack_it = peer_acks_.find(peer);
  if (ack_it == peer_acks_.end()) return {Outgoing::Kind::Full, {}};
  const VersionVector& ack = ack_it->second;

  Outgoing out;
  out.kind = Outgoing::Kind::None;
  for (const auto& [origin, seen_to] : my_seen.entries()) {
    uint64_t from = ack.get(origin) + 1;
    if (from > seen_to) continue;  // peer already has everything of origin
    // The whole gap (from .. seen_to) must be served from the buffer.
    if (held_from(origin) > from || held_to(origin) < seen_to) {
      return {Outgoing::Kind::Full, {}};
    }
    const auto& log = logs_.at(origin);
    uint64_t start = held_from(origin);
    for (uint64_t idx = from; idx <= seen_to; ++idx) {
      out.entries.push_back(log[idx - start]);
    }
    out.kind = Outgoing::Kind::Interval;
  }
  if (out.kind == Outgoing::Kind::Interval) {
    // Causal safety: everything the shipped updates knew must be covered by
    // what the peer acknowledged plus the shipment itself.
    VersionVector covered = ack;
    VersionVector needed;
    for (const DeltaLogEntry& e : out.entries) {
      covered.observe(e.update_dot);
      needed.join_with(e.knowledge);
    }
    if (!vv_leq(needed, covered)) return {Outgoing::Kind::Full, {}};
  }
  return out;
}

void DeltaBuffer::on_ack(const ReplicaId& peer, const VersionVector& acked) {
  peer_acks_[peer].join_with(acked);
  gc();
}

void DeltaBuffer::discard_through(const ReplicaId& origin, uint64_t idx) {
  auto it = logs_.find(origin);
  if (it == logs_.end()) return;
  uint64_t start = held_from(origin);
  if (idx < start) return;
  uint64_t drop = std::min<uint64_t>(idx - start + 1, it->second.size());
  it->second.erase(it->second.begin(), it->second.begin() + drop);
  start_[origin] = start + drop;
}

void DeltaBuffer::gc() {
  if (peer_acks_.empty()) return;
  for (auto& [origin, log] : logs_) {
    uint64_t min_ack = UINT64_MAX;
    for (const auto& [_, ack] : peer_acks_) {
      min_ack = std::min(min_ack, ack.get(origin));
    }
    if (min_ack == 0 || log.empty()) continue;
    uint64_t start = held_from(origin);
    if (min_ack < start) continue;
    uint64_t drop = std::min<uint64_t>(min_ack - start + 1, log.size());
    log.erase(log.begin(), log.begin() + drop);
    start_[origin] = start + drop;
  }
}

}  // namespace crdt
