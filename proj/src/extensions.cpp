#include "crdt/extensions.hpp"

#include <algorithm>
#include <stdexcept>

namespace crdt {

// ---------------------------------------------------------------------------
// BoundedCounter

BoundedCounter BoundedCounter::make(
    int64_t initial, const std::vector<ReplicaId>& replicas,
    const std::map<ReplicaId, int64_t>& allocation) {
  if (initial < 0) throw std::invalid_argument("initial value is negative");
  int64_t total = 0;
  for (const auto& [r, n] : allocation) {
    if (n < 0) throw std::invalid_argument("negative allocation for " + r);
    if (std::find(replicas.begin(), replicas.end(), r) == replicas.end()) {
      throw std::invalid_argument("allocation names unknown replica " + r);
    }
    total += n;
  }
  if (total != initial) {
    throw std::invalid_argument("allocation sums to " + std::to_string(total) +
                                ", expected " + std::to_string(initial));
  }
  BoundedCounter s;
  s.replicas_ = replicas;
  std::sort(s.replicas_.begin(), s.replicas_.end());
  for (const auto& [r, n] : allocation) {
    if (n > 0) s.rights_[r][r] = static_cast<uint64_t>(n);
  }
  return s;
}

int64_t BoundedCounter::value() const {
  int64_t total = 0;
  for (const auto& [owner, row] : rights_) {
    auto it = row.find(owner);
    if (it != row.end()) total += static_cast<int64_t>(it->second);
  }
  for (const auto& [_, n] : used_) total -= static_cast<int64_t>(n);
  return total;
}

int64_t BoundedCounter::local_rights(const ReplicaId& r) const {
  int64_t rights = 0;
  auto row = rights_.find(r);
  if (row != rights_.end()) {
    for (const auto& [dst, n] : row->second) {
      if (dst == r) {
        rights += static_cast<int64_t>(n);  // own allocation + own incs
      } else {
        rights -= static_cast<int64_t>(n);  // transferred away
      }
    }
  }
  for (const auto& [owner, orow] : rights_) {
    if (owner == r) continue;
    auto it = orow.find(r);
    if (it != orow.end()) rights += static_cast<int64_t>(it->second);
  }
  auto used = used_.find(r);
  if (used != used_.end()) rights -= static_cast<int64_t>(used->second);
  return rights;
}

void BoundedCounter::inc(const ReplicaId& r, uint64_t n) {
  rights_[r][r] += n;
}

bool BoundedCounter::dec(const ReplicaId& r, uint64_t n) {
  if (local_rights(r) < static_cast<int64_t>(n)) return false;
  used_[r] += n;
  return true;
}

bool BoundedCounter::transfer(const ReplicaId& from, const ReplicaId& to,
                              uint64_t n) {
  if (n == 0 || from == to) return true;
  if (local_rights(from) < static_cast<int64_t>(n)) return false;
  rights_[from][to] += n;
  return true;
}

bool BoundedCounter::rights_nonnegative() const {
  for (const ReplicaId& r : replicas_) {
    if (local_rights(r) < 0) return false;
  }
  return true;
}

BoundedCounter merge(const BoundedCounter& a, const BoundedCounter& b) {
  if (a.replicas_ != b.replicas_ && !a.replicas_.empty() &&
      !b.replicas_.empty()) {
    throw std::invalid_argument("merging counters over different replicas");
  }
  BoundedCounter out = a;
  if (out.replicas_.empty()) out.replicas_ = b.replicas_;
  for (const auto& [owner, row] : b.rights_) {
    for (const auto& [dst, n] : row) {
      auto& mine = out.rights_[owner][dst];
      mine = std::max(mine, n);
    }
  }
  for (const auto& [r, n] : b.used_) {
    auto& mine = out.used_[r];
    mine = std::max(mine, n);
  }
  return out;
}

bool leq(const BoundedCounter& a, const BoundedCounter& b) {
  for (const auto& [owner, row] : a.rights_) {
    for (const auto& [dst, n] : row) {
      auto orow = b.rights_.find(owner);
      if (orow == b.rights_.end()) return false;
      auto it = orow->second.find(dst);
      if (it == orow->second.end() || n > it->second) return false;
    }
  }
  for (const auto& [r, n] : a.used_) {
    auto it = b.used_.find(r);
    if (it == b.used_.end() || n > it->second) return false;
  }
  return true;
}

void write(ByteWriter& w, const BoundedCounter& s) {
  w.put_u64(s.replicas_.size());
  for (const ReplicaId& r : s.replicas_) w.put_str(r);
  w.put_u64(s.rights_.size());
  for (const auto& [owner, row] : s.rights_) {
    w.put_str(owner);
    w.put_u64(row.size());
    for (const auto& [dst, n] : row) {
      w.put_str(dst);
      w.put_u64(n);
    }
  }
  w.put_u64(s.used_.size());
  for (const auto& [r, n] : s.used_) {
    w.put_str(r);
    w.put_u64(n);
  }
}

BoundedCounter read_bcounter(ByteReader& r) {
  BoundedCounter s;
  uint64_t nr = r.get_u64();
  for (uint64_t i = 0; i < nr; ++i) s.replicas_.push_back(r.get_str());
  uint64_t rows = r.get_u64();
  for (uint64_t i = 0; i < rows; ++i) {
    ReplicaId owner = r.get_str();
    uint64_t cols = r.get_u64();
    for (uint64_t j = 0; j < cols; ++j) {
      ReplicaId dst = r.get_str();
      s.rights_[owner][dst] = r.get_u64();
    }
  }
  uint64_t nu = r.get_u64();
  for (uint64_t i = 0; i < nu; ++i) {
    ReplicaId rep = r.get_str();
    s.used_[rep] = r.get_u64();
  }
  return s;
}

// ---------------------------------------------------------------------------
// TopKSet

bool topk_outranks(const TopKEntry& a, const TopKEntry& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.elem != b.elem) return a.elem < b.elem;
  return a.dot < b.dot;
}

bool TopKSet::dead(const TopKEntry& e) const {
  auto it = removals_.find(e.elem);
  return it != removals_.end() && it->second.kill_ctx.contains(e.dot);
}

TopKSet::Entered TopKSet::recompute(const std::vector<TopKEntry>& incoming) {
  std::set<Dot> before;
  for (const TopKEntry& e : tops_) before.insert(e.dot);

  // Candidate pool: current tops, live local adds, incoming entries.
  // Per element only the best entry competes.
  std::map<Element, TopKEntry> best;
  auto offer = [&](const TopKEntry& e) {
    if (dead(e)) return;
    auto [it, inserted] = best.insert({e.elem, e});
    if (!inserted && (e.score > it->second.score ||
                      (e.score == it->second.score && it->second.dot < e.dot))) {
      it->second = e;
    }
  };
  for (const TopKEntry& e : tops_) offer(e);
  for (const TopKEntry& e : local_adds_) offer(e);
  for (const TopKEntry& e : incoming) offer(e);

  std::vector<TopKEntry> ranked;
  ranked.reserve(best.size());
  for (const auto& [_, e] : best) ranked.push_back(e);
  std::sort(ranked.begin(), ranked.end(), topk_outranks);
  if (ranked.size() > k_) ranked.resize(k_);
  tops_ = std::move(ranked);

  Entered entered;
  for (const TopKEntry& e : tops_) {
    if (!before.count(e.dot)) entered.push_back(e);
  }
  return entered;
}

TopKSet::Entered TopKSet::add(const Element& e, int64_t score,
                              const Dot& event_dot) {
  TopKEntry entry{e, score, event_dot};
  local_adds_.push_back(entry);
  return recompute({});
}

TopKSet::Entered TopKSet::rmv(const Element& e, const Dot& rmv_event,
                              const VersionVector& known) {
  Removal& rem = removals_[e];
  rem.kill_ctx.join_with(known);
  rem.rmv_events.insert(rmv_event);
  std::erase_if(local_adds_, [&](const TopKEntry& a) { return dead(a); });
  // A top slot may have opened: promote from what is still known here.
  return recompute({});
}

TopKSet::Entered TopKSet::merge_in(const TopKSet& payload) {
  for (const auto& [e, rem] : payload.removals_) {
    Removal& mine = removals_[e];
    mine.kill_ctx.join_with(rem.kill_ctx);
    mine.rmv_events.insert(rem.rmv_events.begin(), rem.rmv_events.end());
  }
  std::erase_if(local_adds_, [&](const TopKEntry& a) { return dead(a); });
  return recompute(payload.tops_);
}

namespace {

void write_entries(ByteWriter& w, const std::vector<TopKEntry>& entries) {
  w.put_u64(entries.size());
  for (const TopKEntry& e : entries) {
    w.put_str(e.elem);
    w.put_i64(e.score);
    write(w, e.dot);
  }
}

std::vector<TopKEntry> read_entries(ByteReader& r) {
  std::vector<TopKEntry> out;
  uint64_t n = r.get_u64();
  for (uint64_t i = 0; i < n; ++i) {
    TopKEntry e;
    e.elem = r.get_str();
    e.score = r.get_i64();
    e.dot = read_dot(r);
    out.push_back(std::move(e));
  }
  return out;
}

void write_removals(ByteWriter& w,
                    const std::map<Element, TopKSet::Removal>& removals) {
  w.put_u64(removals.size());
  for (const auto& [e, rem] : removals) {
    w.put_str(e);
    write(w, rem.kill_ctx);
    write(w, rem.rmv_events);
  }
}

std::map<Element, TopKSet::Removal> read_removals(ByteReader& r) {
  std::map<Element, TopKSet::Removal> out;
  uint64_t n = r.get_u64();
  for (uint64_t i = 0; i < n; ++i) {
    Element e = r.get_str();
    TopKSet::Removal rem;
    rem.kill_ctx = read_vv(r);
    rem.rmv_events = read_dot_set(r);
    out[e] = std::move(rem);
  }
  return out;
}

}  // namespace

std::string TopKSet::encode_sync() const {
  ByteWriter w;
  w.put_u64(k_);
  write_entries(w, tops_);
  write_removals(w, removals_);
  return w.take();
}

TopKSet TopKSet::decode_sync(const std::string& bytes) {
  ByteReader r(bytes);
  TopKSet s;
  s.k_ = r.get_u64();
  s.tops_ = read_entries(r);
  s.removals_ = read_removals(r);
  r.expect_done();
  return s;
}

std::string TopKSet::encode_full() const {
  ByteWriter w;
  w.put_raw(encode_sync());
  write_entries(w, local_adds_);
  return w.take();
}

}  // namespace crdt
