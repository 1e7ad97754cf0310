#include "crdt/causality.hpp"

#include <algorithm>

namespace crdt {

std::string to_string(const Dot& d) {
  return d.replica + ":" + std::to_string(d.counter);
}

uint64_t VersionVector::get(const ReplicaId& r) const {
  auto it = entries_.find(r);
  return it == entries_.end() ? 0 : it->second;
}

void VersionVector::set(const ReplicaId& r, uint64_t n) {
  if (n == 0) {
    entries_.erase(r);
  } else {
    entries_[r] = n;
  }
}

void VersionVector::observe(const Dot& d) {
  if (d.counter > get(d.replica)) {
    entries_[d.replica] = d.counter;
  }
}

bool VersionVector::contains(const Dot& d) const {
  return d.counter >= 1 && d.counter <= get(d.replica);
}

void VersionVector::join_with(const VersionVector& other) {
  for (const auto& [r, n] : other.entries_) {
    auto& mine = entries_[r];
    mine = std::max(mine, n);
  }
}

Dot next_dot(const VersionVector& vv, const ReplicaId& r) {
  return Dot{r, vv.get(r) + 1};
}

VersionVector vv_join(const VersionVector& a, const VersionVector& b) {
  VersionVector out = a;
  out.join_with(b);
  return out;
}

bool vv_leq(const VersionVector& a, const VersionVector& b) {
  for (const auto& [r, n] : a.entries()) {
    if (n > b.get(r)) return false;
  }
  return true;
}

bool dot_seen(const VersionVector& vv, const Dot& d) { return vv.contains(d); }

std::string to_string(const VersionVector& vv) {
  std::string out = "{";
  bool first = true;
  for (const auto& [r, n] : vv.entries()) {
    if (!first) out += ",";
    first = false;
    out += r + ":" + std::to_string(n);
  }
  out += "}";
  return out;
}

std::string to_string(const HybridTimestamp& ts) {
  return std::to_string(ts.physical) + ":" + std::to_string(ts.logical) + ":" +
         ts.replica;
}

HybridTimestamp hlc_local(const HybridTimestamp& clock, uint64_t now) {
  if (now > clock.physical) {
    return HybridTimestamp{now, 0, clock.replica};
  }
  return HybridTimestamp{clock.physical, clock.logical + 1, clock.replica};
}

HybridTimestamp hlc_receive(const HybridTimestamp& clock,
                            const HybridTimestamp& msg, uint64_t now) {
  uint64_t physical = std::max({clock.physical, msg.physical, now});
  uint64_t logical = 0;
  if (physical == clock.physical && physical == msg.physical) {
    logical = std::max(clock.logical, msg.logical) + 1;
  } else if (physical == clock.physical) {
    logical = clock.logical + 1;
  } else if (physical == msg.physical) {
    logical = msg.logical + 1;
  }
  return HybridTimestamp{physical, logical, clock.replica};
}

int ts_compare(const HybridTimestamp& a, const HybridTimestamp& b) {
  auto c = a <=> b;
  if (c < 0) return -1;
  if (c > 0) return 1;
  return 0;
}

}  // namespace crdt
