#include "crdt/state_crdts.hpp"

#include <algorithm>

namespace crdt {

// ---------------------------------------------------------------------------
// GCounter / PNCounter

uint64_t GCounter::inc(const ReplicaId& r, uint64_t n) {
  return counts[r] += n;
}

int64_t GCounter::value() const {
  int64_t total = 0;
  for (const auto& [r, n] : counts) total += static_cast<int64_t>(n);
  return total;
}

GCounter merge(const GCounter& a, const GCounter& b) {
  GCounter out = a;
  for (const auto& [r, n] : b.counts) {
    auto& mine = out.counts[r];
    mine = std::max(mine, n);
  }
  return out;
}

bool leq(const GCounter& a, const GCounter& b) {
  for (const auto& [r, n] : a.counts) {
    auto it = b.counts.find(r);
    if (it == b.counts.end() || n > it->second) return false;
  }
  return true;
}

void write(ByteWriter& w, const GCounter& s) {
  w.put_u64(s.counts.size());
  for (const auto& [r, n] : s.counts) {
    w.put_str(r);
    w.put_u64(n);
  }
}

GCounter read_gcounter(ByteReader& r) {
  GCounter s;
  uint64_t n = r.get_u64();
  for (uint64_t i = 0; i < n; ++i) {
    ReplicaId replica = r.get_str();
    s.counts[replica] = r.get_u64();
  }
  return s;
}

PNCounter merge(const PNCounter& a, const PNCounter& b) {
  return PNCounter{merge(a.incs, b.incs), merge(a.decs, b.decs)};
}

bool leq(const PNCounter& a, const PNCounter& b) {
  return leq(a.incs, b.incs) && leq(a.decs, b.decs);
}

void write(ByteWriter& w, const PNCounter& s) {
  write(w, s.incs);
  write(w, s.decs);
}

PNCounter read_pncounter(ByteReader& r) {
  PNCounter s;
  s.incs = read_gcounter(r);
  s.decs = read_gcounter(r);
  return s;
}

// ---------------------------------------------------------------------------
// LWWRegister

bool LWWRegister::write_value(const Value& v, const HybridTimestamp& t) {
  if (!ts.has_value() || *ts < t) {
    ts = t;
    value = v;
    return true;
  }
  return false;
}

LWWRegister merge(const LWWRegister& a, const LWWRegister& b) {
  if (!b.ts.has_value()) return a;
  if (!a.ts.has_value() || *a.ts < *b.ts) return b;
  return a;
}

bool leq(const LWWRegister& a, const LWWRegister& b) {
  if (!a.ts.has_value()) return true;
  return b.ts.has_value() && *a.ts <= *b.ts;
}

void write(ByteWriter& w, const LWWRegister& s) {
  w.put_bool(s.ts.has_value());
  if (s.ts.has_value()) {
    write(w, *s.ts);
    w.put_str(*s.value);
  }
}

LWWRegister read_lwwregister(ByteReader& r) {
  LWWRegister s;
  if (r.get_bool()) {
    s.ts = read_ts(r);
    s.value = r.get_str();
  }
  return s;
}

// ---------------------------------------------------------------------------
// MVRegister

MVRegister::WriteInfo MVRegister::write_value(const ReplicaId& r,
                                              const Value& v) {
  WriteInfo info;
  info.dot = next_dot(ctx, r);
  for (const auto& [d, _] : entries) info.cleared.insert(d);
  entries.clear();
  entries[info.dot] = v;
  ctx.observe(info.dot);
  return info;
}

std::multiset<Value> MVRegister::read() const {
  std::multiset<Value> out;
  for (const auto& [_, v] : entries) out.insert(v);
  return out;
}

MVRegister merge(const MVRegister& a, const MVRegister& b) {
  MVRegister out;
  for (const auto& [d, v] : a.entries) {
    if (b.entries.count(d) || !b.ctx.contains(d)) out.entries[d] = v;
  }
  for (const auto& [d, v] : b.entries) {
    if (!a.entries.count(d) && !a.ctx.contains(d)) out.entries[d] = v;
  }
  out.ctx = vv_join(a.ctx, b.ctx);
  return out;
}

bool leq(const MVRegister& a, const MVRegister& b) {
  if (!vv_leq(a.ctx, b.ctx)) return false;
  // b may not resurrect a dot that a has already seen and dropped.
  for (const auto& [d, _] : b.entries) {
    if (a.ctx.contains(d) && !a.entries.count(d)) return false;
  }
  return true;
}

void write(ByteWriter& w, const MVRegister& s) {
  w.put_u64(s.entries.size());
  for (const auto& [d, v] : s.entries) {
    write(w, d);
    w.put_str(v);
  }
  write(w, s.ctx);
}

MVRegister read_mvregister(ByteReader& r) {
  MVRegister s;
  uint64_t n = r.get_u64();
  for (uint64_t i = 0; i < n; ++i) {
    Dot d = read_dot(r);
    s.entries[d] = r.get_str();
  }
  s.ctx = read_vv(r);
  return s;
}

// ---------------------------------------------------------------------------
// AWSet

Dot AWSet::add(const ReplicaId& r, const Element& e) {
  Dot d = next_dot(ctx, r);
  entries[e].insert(d);
  ctx.observe(d);
  return d;
}

std::set<Dot> AWSet::rmv(const Element& e) {
  auto it = entries.find(e);
  if (it == entries.end()) return {};
  std::set<Dot> removed = std::move(it->second);
  entries.erase(it);
  return removed;
}

std::set<Element> AWSet::elements() const {
  std::set<Element> out;
  for (const auto& [e, _] : entries) out.insert(e);
  return out;
}

AWSet merge(const AWSet& a, const AWSet& b) {
  AWSet out;
  auto keep = [&out](const Element& e, const Dot& d) {
    out.entries[e].insert(d);
  };
  for (const auto& [e, dots] : a.entries) {
    auto itb = b.entries.find(e);
    for (const Dot& d : dots) {
      bool in_b = itb != b.entries.end() && itb->second.count(d);
      if (in_b || !b.ctx.contains(d)) keep(e, d);
    }
  }
  for (const auto& [e, dots] : b.entries) {
    auto ita = a.entries.find(e);
    for (const Dot& d : dots) {
      bool in_a = ita != a.entries.end() && ita->second.count(d);
      if (!in_a && !a.ctx.contains(d)) keep(e, d);
    }
  }
  out.ctx = vv_join(a.ctx, b.ctx);
  return out;
}

bool leq(const AWSet& a, const AWSet& b) {
  if (!vv_leq(a.ctx, b.ctx)) return false;
  for (const auto& [e, dots] : b.entries) {
    auto ita = a.entries.find(e);
    for (const Dot& d : dots) {
      bool in_a = ita != a.entries.end() && ita->second.count(d);
      if (a.ctx.contains(d) && !in_a) return false;
    }
  }
  return true;
}

void write(ByteWriter& w, const AWSet& s) {
  w.put_u64(s.entries.size());
  for (const auto& [e, dots] : s.entries) {
    w.put_str(e);
    write(w, dots);
  }
  write(w, s.ctx);
}

AWSet read_awset(ByteReader& r) {
  AWSet s;
  uint64_t n = r.get_u64();
  for (uint64_t i = 0; i < n; ++i) {
    Element e = r.get_str();
    s.entries[e] = read_dot_set(r);
  }
  s.ctx = read_vv(r);
  return s;
}

// ---------------------------------------------------------------------------
// RWSet

RWSet::UpdateInfo RWSet::add(const ReplicaId& r, const Element& e) {
  UpdateInfo info;
  info.dot = next_dot(ctx, r);
  Tags& t = tags[e];
  info.discarded = std::move(t.rmvs);
  t.rmvs.clear();
  t.adds.insert(info.dot);
  ctx.observe(info.dot);
  return info;
}

RWSet::UpdateInfo RWSet::rmv(const ReplicaId& r, const Element& e) {
  UpdateInfo info;
  info.dot = next_dot(ctx, r);
  Tags& t = tags[e];
  info.discarded = std::move(t.adds);
  t.adds.clear();
  t.rmvs.insert(info.dot);
  ctx.observe(info.dot);
  return info;
}

std::set<Element> RWSet::elements() const {
  std::set<Element> out;
  for (const auto& [e, t] : tags) {
    if (!t.adds.empty() && t.rmvs.empty()) out.insert(e);
  }
  return out;
}

RWSet merge(const RWSet& a, const RWSet& b) {
  RWSet out;
  auto merge_tags = [](const std::set<Dot>& ta, const VersionVector& actx,
                       const std::set<Dot>& tb, const VersionVector& bctx) {
    std::set<Dot> out_tags;
    for (const Dot& d : ta) {
      if (tb.count(d) || !bctx.contains(d)) out_tags.insert(d);
    }
    for (const Dot& d : tb) {
      if (!ta.count(d) && !actx.contains(d)) out_tags.insert(d);
    }
    return out_tags;
  };
  std::set<Element> elems;
  for (const auto& [e, _] : a.tags) elems.insert(e);
  for (const auto& [e, _] : b.tags) elems.insert(e);
  static const Tags kEmpty;
  for (const Element& e : elems) {
    auto ita = a.tags.find(e);
    auto itb = b.tags.find(e);
    const Tags& ta = ita == a.tags.end() ? kEmpty : ita->second;
    const Tags& tb = itb == b.tags.end() ? kEmpty : itb->second;
    Tags t;
    t.adds = merge_tags(ta.adds, a.ctx, tb.adds, b.ctx);
    t.rmvs = merge_tags(ta.rmvs, a.ctx, tb.rmvs, b.ctx);
    if (!t.adds.empty() || !t.rmvs.empty()) out.tags[e] = std::move(t);
  }
  out.ctx = vv_join(a.ctx, b.ctx);
  return out;
}

bool leq(const RWSet& a, const RWSet& b) {
  if (!vv_leq(a.ctx, b.ctx)) return false;
  static const RWSet::Tags kEmpty;
  for (const auto& [e, tb] : b.tags) {
    auto ita = a.tags.find(e);
    const RWSet::Tags& ta = ita == a.tags.end() ? kEmpty : ita->second;
    for (const Dot& d : tb.adds) {
      if (a.ctx.contains(d) && !ta.adds.count(d)) return false;
    }
    for (const Dot& d : tb.rmvs) {
      if (a.ctx.contains(d) && !ta.rmvs.count(d)) return false;
    }
  }
  return true;
}

void write(ByteWriter& w, const RWSet& s) {
  w.put_u64(s.tags.size());
  for (const auto& [e, t] : s.tags) {
    w.put_str(e);
    write(w, t.adds);
    write(w, t.rmvs);
  }
  write(w, s.ctx);
}

RWSet read_rwset(ByteReader& r) {
  RWSet s;
  uint64_t n = r.get_u64();
  for (uint64_t i = 0; i < n; ++i) {
    Element e = r.get_str();
    RWSet::Tags t;
    t.adds = read_dot_set(r);
    t.rmvs = read_dot_set(r);
    s.tags[e] = std::move(t);
  }
  s.ctx = read_vv(r);
  return s;
}

// ---------------------------------------------------------------------------
// LWWSet

bool LWWSet::add(const Element& e, const HybridTimestamp& ts) {
  auto it = recs.find(e);
  if (it == recs.end() || it->second.ts < ts) {
    recs[e] = Rec{ts, true};
    return true;
  }
  return false;
}

bool LWWSet::rmv(const Element& e, const HybridTimestamp& ts) {
  auto it = recs.find(e);
  if (it == recs.end() || it->second.ts < ts) {
    recs[e] = Rec{ts, false};
    return true;
  }
  return false;
}

std::set<Element> LWWSet::elements() const {
  std::set<Element> out;
  for (const auto& [e, rec] : recs) {
    if (rec.present) out.insert(e);
  }
  return out;
}

LWWSet merge(const LWWSet& a, const LWWSet& b) {
  LWWSet out = a;
  for (const auto& [e, rec] : b.recs) {
    auto it = out.recs.find(e);
    if (it == out.recs.end() || it->second.ts < rec.ts) out.recs[e] = rec;
  }
  return out;
}

bool leq(const LWWSet& a, const LWWSet& b) {
  for (const auto& [e, rec] : a.recs) {
    auto it = b.recs.find(e);
    if (it == b.recs.end() || rec.ts > it->second.ts) return false;
  }
  return true;
}

void write(ByteWriter& w, const LWWSet& s) {
  w.put_u64(s.recs.size());
  for (const auto& [e, rec] : s.recs) {
    w.put_str(e);
    write(w, rec.ts);
    w.put_bool(rec.present);
  }
}

LWWSet read_lwwset(ByteReader& r) {
  LWWSet s;
  uint64_t n = r.get_u64();
  for (uint64_t i = 0; i < n; ++i) {
    Element e = r.get_str();
    LWWSet::Rec rec;
    rec.ts = read_ts(r);
    rec.present = r.get_bool();
    s.recs[e] = rec;
  }
  return s;
}

}  // namespace crdt
