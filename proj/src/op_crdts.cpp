#include "crdt/op_crdts.hpp"

#include <stdexcept>

namespace crdt {

namespace {

constexpr uint8_t kCounterAdd = 1;
constexpr uint8_t kAWSetAdd = 2;
constexpr uint8_t kAWSetRmv = 3;
constexpr uint8_t kWWWrite = 4;
constexpr uint8_t kWWDelta = 5;

Effector make_effector(const ReplicaId& origin, uint64_t seq,
                       const VersionVector& deps, const HybridTimestamp& ts,
                       EffectorPayload payload) {
  Effector e;
  e.origin = origin;
  e.seq = seq;
  e.deps = deps;
  e.ts = ts;
  e.payload = std::move(payload);
  return e;
}

[[noreturn]] void wrong_payload(const char* type) {
  throw std::logic_error(std::string("effector payload does not match ") +
                         type);
}

}  // namespace

void write(ByteWriter& w, const Effector& e) {
  w.put_str(e.origin);
  w.put_u64(e.seq);
  write(w, e.deps);
  write(w, e.ts);
  if (const auto* p = std::get_if<CounterAddEff>(&e.payload)) {
    w.put_u8(kCounterAdd);
    w.put_i64(p->amount);
  } else if (const auto* p = std::get_if<AWSetAddEff>(&e.payload)) {
    w.put_u8(kAWSetAdd);
    w.put_str(p->elem);
    write(w, p->dot);
  } else if (const auto* p = std::get_if<AWSetRmvEff>(&e.payload)) {
    w.put_u8(kAWSetRmv);
    w.put_str(p->elem);
    write(w, p->observed);
  } else if (const auto* p = std::get_if<WWCounterWrEff>(&e.payload)) {
    w.put_u8(kWWWrite);
    w.put_i64(p->value);
  } else if (const auto* p = std::get_if<WWCounterDeltaEff>(&e.payload)) {
    w.put_u8(kWWDelta);
    w.put_i64(p->amount);
    w.put_bool(p->base_ts.has_value());
    if (p->base_ts.has_value()) write(w, *p->base_ts);
  }
}

Effector read_effector(ByteReader& r) {
  Effector e;
  e.origin = r.get_str();
  e.seq = r.get_u64();
  e.deps = read_vv(r);
  e.ts = read_ts(r);
  uint8_t tag = r.get_u8();
  switch (tag) {
    case kCounterAdd: {
      CounterAddEff p;
      p.amount = r.get_i64();
      e.payload = p;
      break;
    }
    case kAWSetAdd: {
      AWSetAddEff p;
      p.elem = r.get_str();
      p.dot = read_dot(r);
      e.payload = p;
      break;
    }
    case kAWSetRmv: {
      AWSetRmvEff p;
      p.elem = r.get_str();
      p.observed = read_dot_set(r);
      e.payload = p;
      break;
    }
    case kWWWrite: {
      WWCounterWrEff p;
      p.value = r.get_i64();
      e.payload = p;
      break;
    }
    case kWWDelta: {
      WWCounterDeltaEff p;
      p.amount = r.get_i64();
      if (r.get_bool()) p.base_ts = read_ts(r);
      e.payload = p;
      break;
    }
    default:
      throw CodecError("unknown effector payload tag");
  }
  return e;
}

bool effectors_concurrent(const Effector& a, const Effector& b) {
  return !dot_seen(a.deps, b.dot()) && !dot_seen(b.deps, a.dot());
}

// ---------------------------------------------------------------------------
// Counter

Effector gen_counter_add(const OpCounter&, const ReplicaId& origin,
                         uint64_t seq, const VersionVector& deps,
                         const HybridTimestamp& ts, int64_t amount) {
  return make_effector(origin, seq, deps, ts, CounterAddEff{amount});
}

void effect(OpCounter& s, const Effector& e) {
  const auto* p = std::get_if<CounterAddEff>(&e.payload);
  if (p == nullptr) wrong_payload("OpCounter");
  s.value += p->amount;
}

// ---------------------------------------------------------------------------
// Add-wins set

std::set<Element> OpAWSet::elements() const {
  std::set<Element> out;
  for (const auto& [e, _] : entries) out.insert(e);
  return out;
}

Effector gen_awset_add(const OpAWSet&, const ReplicaId& origin, uint64_t seq,
                       const VersionVector& deps, const HybridTimestamp& ts,
                       const Element& elem) {
  // The fresh dot reuses the effector identity: seq is the origin's next
  // update index, which is exactly the dot counter.
  return make_effector(origin, seq, deps, ts,
                       AWSetAddEff{elem, Dot{origin, seq}});
}

Effector gen_awset_rmv(const OpAWSet& s, const ReplicaId& origin, uint64_t seq,
                       const VersionVector& deps, const HybridTimestamp& ts,
                       const Element& elem) {
  AWSetRmvEff p;
  p.elem = elem;
  auto it = s.entries.find(elem);
  if (it != s.entries.end()) p.observed = it->second;
  return make_effector(origin, seq, deps, ts, std::move(p));
}

void effect(OpAWSet& s, const Effector& e) {
  if (const auto* p = std::get_if<AWSetAddEff>(&e.payload)) {
    s.entries[p->elem].insert(p->dot);
    return;
  }
  if (const auto* p = std::get_if<AWSetRmvEff>(&e.payload)) {
    auto it = s.entries.find(p->elem);
    if (it == s.entries.end()) return;
    for (const Dot& d : p->observed) it->second.erase(d);
    if (it->second.empty()) s.entries.erase(it);
    return;
  }
  wrong_payload("OpAWSet");
}

// ---------------------------------------------------------------------------
// Write-wins counter

Effector gen_ww_write(const OpWWCounter&, const ReplicaId& origin, uint64_t seq,
                      const VersionVector& deps, const HybridTimestamp& ts,
                      int64_t value) {
  return make_effector(origin, seq, deps, ts, WWCounterWrEff{value});
}

Effector gen_ww_add(const OpWWCounter& s, const ReplicaId& origin, uint64_t seq,
                    const VersionVector& deps, const HybridTimestamp& ts,
                    int64_t amount) {
  return make_effector(origin, seq, deps, ts,
                       WWCounterDeltaEff{amount, s.base_ts});
}

void effect(OpWWCounter& s, const Effector& e) {
  if (const auto* p = std::get_if<WWCounterWrEff>(&e.payload)) {
    if (!s.base_ts.has_value() || *s.base_ts < e.ts) {
      s.base_ts = e.ts;
      s.base = p->value;
      // Causal delivery means no inc/dec following this write can have been
      // applied yet, so the accumulated delta belongs to older writes.
      s.delta = 0;
    }
    return;
  }
  if (const auto* p = std::get_if<WWCounterDeltaEff>(&e.payload)) {
    if (p->base_ts == s.base_ts) s.delta += p->amount;
    return;
  }
  wrong_payload("OpWWCounter");
}

}  // namespace crdt
