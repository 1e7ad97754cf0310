#include "crdt/oracle.hpp"

#include <algorithm>

namespace crdt::oracle {

std::string to_string(OpKind k) {
  switch (k) {
    case OpKind::Add: return "add";
    case OpKind::Rmv: return "rmv";
    case OpKind::Wr: return "wr";
    case OpKind::Inc: return "inc";
    case OpKind::Dec: return "dec";
  }
  return "?";
}

void History::add_event(OpEvent e) {
  if (index_.count(e.id)) {
    throw std::invalid_argument("duplicate event id " + to_string(e.id));
  }
  index_[e.id] = events_.size();
  events_.push_back(std::move(e));
  closure_valid_ = false;
}

void History::add_hb(const Dot& a, const Dot& b) {
  size_t ia = index_of(a);
  size_t ib = index_of(b);
  edges_.insert({ia, ib});
  closure_valid_ = false;
}

size_t History::index_of(const Dot& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) {
    throw std::invalid_argument("unknown event " + to_string(id));
  }
  return it->second;
}

const OpEvent& History::event(const Dot& id) const {
  return events_[index_of(id)];
}

const std::vector<std::vector<uint64_t>>& History::closure() const {
  if (!closure_valid_) {
    size_t n = events_.size();
    size_t words = (n + 63) / 64;
    closure_.assign(n, std::vector<uint64_t>(words, 0));
    for (const auto& [a, b] : edges_) {
      closure_[a][b / 64] |= uint64_t{1} << (b % 64);
    }
    // Floyd-Warshall over bit rows.
    for (size_t k = 0; k < n; ++k) {
      for (size_t i = 0; i < n; ++i) {
        if (closure_[i][k / 64] & (uint64_t{1} << (k % 64))) {
          for (size_t w = 0; w < words; ++w) closure_[i][w] |= closure_[k][w];
        }
      }
    }
    closure_valid_ = true;
  }
  return closure_;
}

bool History::reaches(size_t a, size_t b) const {
  const auto& c = closure();
  return (c[a][b / 64] >> (b % 64)) & 1;
}

bool History::happens_before(const Dot& a, const Dot& b) const {
  return reaches(index_of(a), index_of(b));
}

bool History::concurrent(const Dot& a, const Dot& b) const {
  if (a == b) throw std::invalid_argument("concurrent() needs distinct events");
  size_t ia = index_of(a);
  size_t ib = index_of(b);
  return !reaches(ia, ib) && !reaches(ib, ia);
}

ValidationReport History::validate() const {
  size_t n = events_.size();
  // Irreflexivity of the closure (no cycles).
  for (size_t i = 0; i < n; ++i) {
    if (reaches(i, i)) {
      return {ViolationCode::CycleDetected,
              "event participates in a happens-before cycle",
              std::make_pair(events_[i].id, events_[i].id)};
    }
  }
  // Same-replica events must be totally ordered in counter order.
  std::map<ReplicaId, std::vector<size_t>> per_replica;
  for (size_t i = 0; i < n; ++i) per_replica[events_[i].id.replica].push_back(i);
  for (auto& [r, idx] : per_replica) {
    std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) {
      return events_[a].id.counter < events_[b].id.counter;
    });
    for (size_t i = 0; i + 1 < idx.size(); ++i) {
      if (!reaches(idx[i], idx[i + 1])) {
        return {ViolationCode::PerReplicaOrderBroken,
                "events at replica " + r + " are not ordered",
                std::make_pair(events_[idx[i]].id, events_[idx[i + 1]].id)};
      }
    }
  }
  // Timestamps: pairwise distinct and consistent with happens-before.
  std::map<HybridTimestamp, size_t> by_ts;
  for (size_t i = 0; i < n; ++i) {
    auto [it, inserted] = by_ts.insert({events_[i].ts, i});
    if (!inserted) {
      return {ViolationCode::TimestampOrderBroken,
              "two events share timestamp " + to_string(events_[i].ts),
              std::make_pair(events_[it->second].id, events_[i].id)};
    }
  }
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      if (i != j && reaches(i, j) && !(events_[i].ts < events_[j].ts)) {
        return {ViolationCode::TimestampOrderBroken,
                "timestamp order contradicts happens-before",
                std::make_pair(events_[i].id, events_[j].id)};
      }
    }
  }
  return {};
}

namespace {

void require_valid(const History& h, std::initializer_list<OpKind> allowed,
                   const char* evaluator) {
  ValidationReport rep = h.validate();
  if (!rep.ok()) {
    throw InvalidHistory(std::string(evaluator) + ": invalid history: " +
                         rep.detail);
  }
  for (const OpEvent& e : h.events()) {
    if (std::find(allowed.begin(), allowed.end(), e.kind) == allowed.end()) {
      throw InvalidHistory(std::string(evaluator) +
                           ": unexpected operation kind " + to_string(e.kind) +
                           " at " + to_string(e.id));
    }
  }
}

}  // namespace

std::set<std::string> eval_aw_set(const History& h) {
  require_valid(h, {OpKind::Add, OpKind::Rmv}, "eval_aw_set");
  std::set<std::string> out;
  for (const OpEvent& a : h.events()) {
    if (a.kind != OpKind::Add || out.count(a.elem)) continue;
    bool removed_after = false;
    for (const OpEvent& r : h.events()) {
      if (r.kind == OpKind::Rmv && r.elem == a.elem &&
          h.happens_before(a.id, r.id)) {
        removed_after = true;
        break;
      }
    }
    if (!removed_after) out.insert(a.elem);
  }
  return out;
}

std::set<std::string> eval_rw_set(const History& h) {
  require_valid(h, {OpKind::Add, OpKind::Rmv}, "eval_rw_set");
  std::set<std::string> candidates;
  for (const OpEvent& e : h.events()) {
    if (e.kind == OpKind::Add) candidates.insert(e.elem);
  }
  std::set<std::string> out;
  for (const std::string& elem : candidates) {
    bool alive = true;
    for (const OpEvent& r : h.events()) {
      if (r.kind != OpKind::Rmv || r.elem != elem) continue;
      bool dominated = false;
      for (const OpEvent& a : h.events()) {
        if (a.kind == OpKind::Add && a.elem == elem &&
            h.happens_before(r.id, a.id)) {
          dominated = true;
          break;
        }
      }
      if (!dominated) {
        alive = false;
        break;
      }
    }
    if (alive) out.insert(elem);
  }
  return out;
}

std::set<std::string> eval_lww_set(const History& h) {
  require_valid(h, {OpKind::Add, OpKind::Rmv}, "eval_lww_set");
  std::map<std::string, const OpEvent*> latest;
  for (const OpEvent& e : h.events()) {
    auto& slot = latest[e.elem];
    if (slot == nullptr || slot->ts < e.ts) slot = &e;
  }
  std::set<std::string> out;
  for (const auto& [elem, e] : latest) {
    if (e->kind == OpKind::Add) out.insert(elem);
  }
  return out;
}

std::multiset<std::string> eval_mv_register(const History& h) {
  require_valid(h, {OpKind::Wr}, "eval_mv_register");
  std::multiset<std::string> out;
  for (const OpEvent& w : h.events()) {
    bool overwritten = false;
    for (const OpEvent& u : h.events()) {
      if (u.kind == OpKind::Wr && h.happens_before(w.id, u.id)) {
        overwritten = true;
        break;
      }
    }
    if (!overwritten) out.insert(w.value);
  }
  return out;
}

std::optional<std::string> eval_lww_register(const History& h) {
  require_valid(h, {OpKind::Wr}, "eval_lww_register");
  const OpEvent* latest = nullptr;
  for (const OpEvent& w : h.events()) {
    if (latest == nullptr || latest->ts < w.ts) latest = &w;
  }
  if (latest == nullptr) return std::nullopt;
  return latest->value;
}

int64_t eval_counter(const History& h) {
  require_valid(h, {OpKind::Inc, OpKind::Dec}, "eval_counter");
  int64_t total = 0;
  for (const OpEvent& e : h.events()) {
    total += e.kind == OpKind::Inc ? e.amount : -e.amount;
  }
  return total;
}

int64_t eval_ww_counter(const History& h) {
  require_valid(h, {OpKind::Inc, OpKind::Dec, OpKind::Wr}, "eval_ww_counter");
  const OpEvent* last_write = nullptr;
  for (const OpEvent& e : h.events()) {
    if (e.kind == OpKind::Wr && (last_write == nullptr || last_write->ts < e.ts)) {
      last_write = &e;
    }
  }
  if (last_write == nullptr) {
    int64_t total = 0;
    for (const OpEvent& e : h.events()) {
      total += e.kind == OpKind::Inc ? e.amount : -e.amount;
    }
    return total;
  }
  int64_t total = last_write->amount;
  for (const OpEvent& e : h.events()) {
    if (e.kind == OpKind::Wr) continue;
    if (h.happens_before(last_write->id, e.id)) {
      total += e.kind == OpKind::Inc ? e.amount : -e.amount;
    }
  }
  return total;
}

}  // namespace crdt::oracle
