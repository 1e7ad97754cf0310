#include "crdt/simulator.hpp"

#include <algorithm>
#include <functional>
#include <memory>
#include <tuple>

#include "crdt/codec.hpp"
#include "crdt/delta.hpp"
#include "crdt/extensions.hpp"
#include "crdt/op_crdts.hpp"
#include "crdt/rng.hpp"
#include "crdt/state_crdts.hpp"

namespace crdt::sim {

namespace {

constexpr const char* kInit = "~init";

constexpr uint8_t kMsgState = 1;
constexpr uint8_t kMsgDeltaInterval = 2;
constexpr uint8_t kMsgDeltaAck = 3;
constexpr uint8_t kMsgEffector = 4;
constexpr uint8_t kMsgOpAck = 5;

// ---------------------------------------------------------------------------
// Canonical rendering shared by replica queries and the oracle verdict.

std::string render_set(const std::set<std::string>& s) {
  std::string out = "{";
  bool first = true;
  for (const std::string& e : s) {
    if (!first) out += ",";
    first = false;
    out += e;
  }
  return out + "}";
}

std::string render_multiset(const std::multiset<std::string>& s) {
  std::string out = "{";
  bool first = true;
  for (const std::string& e : s) {
    if (!first) out += ",";
    first = false;
    out += e;
  }
  return out + "}";
}

std::string render_opt(const std::optional<std::string>& v) {
  return v.has_value() ? "{" + *v + "}" : "{}";
}

std::string render_topk(const std::vector<TopKEntry>& entries) {
  std::string out = "[";
  bool first = true;
  for (const TopKEntry& e : entries) {
    if (!first) out += ",";
    first = false;
    out += e.elem + ":" + std::to_string(e.score);
  }
  return out + "]";
}

std::string render_op(const UpdateOp& op) {
  std::string out = op.op;
  if (!op.elem.empty()) out += " " + op.elem;
  if (op.op == "wr") out += " " + op.value;
  if (op.op == "inc" || op.op == "dec" || op.op == "transfer") {
    out += " " + std::to_string(op.amount);
  }
  if (op.op == "add" && op.score != 0) out += " #" + std::to_string(op.score);
  if (!op.to.empty()) out += " ->" + op.to;
  return out;
}

struct UpdateCtx {
  ReplicaId replica;  // acting replica (the synthetic one for initial state)
  HybridTimestamp ts;
  Dot event_dot;
  const VersionVector* seen = nullptr;
};

// ---------------------------------------------------------------------------
// State-model replicas

class IStateType {
 public:
  virtual ~IStateType() = default;
  virtual bool update(const UpdateOp& op, const UpdateCtx& ctx) = 0;
  virtual void merge_payload(const std::string& bytes) = 0;
  virtual std::string encode_state() const = 0;
  virtual std::string encode_sync() const { return encode_state(); }
  virtual std::string query() const = 0;
};

class GCounterReplica : public IStateType {
 public:
  bool update(const UpdateOp& op, const UpdateCtx& ctx) override {
    s_.inc(ctx.replica, static_cast<uint64_t>(op.amount));
    return true;
  }
  void merge_payload(const std::string& bytes) override {
    ByteReader r(bytes);
    s_ = merge(s_, read_gcounter(r));
    r.expect_done();
  }
  std::string encode_state() const override {
    ByteWriter w;
    write(w, s_);
    return w.take();
  }
  std::string query() const override { return std::to_string(s_.value()); }

 protected:
  GCounter s_;
};

/// Negative-control double: merges with pointwise min, which silently loses
/// updates. Exists so tests can show the convergence checker catches it.
class BrokenGCounterReplica : public GCounterReplica {
 public:
  void merge_payload(const std::string& bytes) override {
    ByteReader r(bytes);
    GCounter other = read_gcounter(r);
    r.expect_done();
    GCounter out;
    for (const auto& [rep, n] : s_.counts) {
      auto it = other.counts.find(rep);
      if (it != other.counts.end()) {
        out.counts[rep] = std::min(n, it->second);
      }
    }
    s_ = std::move(out);
  }
};

class PNCounterReplica : public IStateType {
 public:
  bool update(const UpdateOp& op, const UpdateCtx& ctx) override {
    if (op.op == "inc") {
      s_.inc(ctx.replica, static_cast<uint64_t>(op.amount));
    } else {
      s_.dec(ctx.replica, static_cast<uint64_t>(op.amount));
    }
    return true;
  }
  void merge_payload(const std::string& bytes) override {
    ByteReader r(bytes);
    s_ = merge(s_, read_pncounter(r));
    r.expect_done();
  }
  std::string encode_state() const override {
    ByteWriter w;
    write(w, s_);
    return w.take();
  }
  std::string query() const override { return std::to_string(s_.value()); }

 private:
  PNCounter s_;
};

class LWWRegReplica : public IStateType {
 public:
  bool update(const UpdateOp& op, const UpdateCtx& ctx) override {
    s_.write_value(op.value, ctx.ts);
    return true;
  }
  void merge_payload(const std::string& bytes) override {
    ByteReader r(bytes);
    s_ = merge(s_, read_lwwregister(r));
    r.expect_done();
  }
  std::string encode_state() const override {
    ByteWriter w;
    write(w, s_);
    return w.take();
  }
  std::string query() const override { return render_opt(s_.read()); }

 private:
  LWWRegister s_;
};

class MVRegReplica : public IStateType {
 public:
  bool update(const UpdateOp& op, const UpdateCtx& ctx) override {
    s_.write_value(ctx.replica, op.value);
    return true;
  }
  void merge_payload(const std::string& bytes) override {
    ByteReader r(bytes);
    s_ = merge(s_, read_mvregister(r));
    r.expect_done();
  }
  std::string encode_state() const override {
    ByteWriter w;
    write(w, s_);
    return w.take();
  }
  std::string query() const override {
    std::multiset<std::string> vals;
    for (const auto& [_, v] : s_.entries) vals.insert(v);
    return render_multiset(vals);
  }

 private:
  MVRegister s_;
};

class AWSetReplica : public IStateType {
 public:
  bool update(const UpdateOp& op, const UpdateCtx& ctx) override {
    if (op.op == "add") {
      s_.add(ctx.replica, op.elem);
    } else {
      s_.rmv(op.elem);
    }
    return true;
  }
  void merge_payload(const std::string& bytes) override {
    ByteReader r(bytes);
    s_ = merge(s_, read_awset(r));
    r.expect_done();
  }
  std::string encode_state() const override {
    ByteWriter w;
    write(w, s_);
    return w.take();
  }
  std::string query() const override { return render_set(s_.elements()); }

 private:
  AWSet s_;
};

class RWSetReplica : public IStateType {
 public:
  bool update(const UpdateOp& op, const UpdateCtx& ctx) override {
    if (op.op == "add") {
      s_.add(ctx.replica, op.elem);
    } else {
      s_.rmv(ctx.replica, op.elem);
    }
    return true;
  }
  void merge_payload(const std::string& bytes) override {
    ByteReader r(bytes);
    s_ = merge(s_, read_rwset(r));
    r.expect_done();
  }
  std::string encode_state() const override {
    ByteWriter w;
    write(w, s_);
    return w.take();
  }
  std::string query() const override { return render_set(s_.elements()); }

 private:
  RWSet s_;
};

class LWWSetReplica : public IStateType {
 public:
  bool update(const UpdateOp& op, const UpdateCtx& ctx) override {
    if (op.op == "add") {
      s_.add(op.elem, ctx.ts);
    } else {
      s_.rmv(op.elem, ctx.ts);
    }
    return true;
  }
  void merge_payload(const std::string& bytes) override {
    ByteReader r(bytes);
    s_ = merge(s_, read_lwwset(r));
    r.expect_done();
  }
  std::string encode_state() const override {
    ByteWriter w;
    write(w, s_);
    return w.take();
  }
  std::string query() const override { return render_set(s_.elements()); }

 private:
  LWWSet s_;
};

class BoundedCounterReplica : public IStateType {
 public:
  explicit BoundedCounterReplica(BoundedCounter initial)
      : s_(std::move(initial)) {}

  bool update(const UpdateOp& op, const UpdateCtx& ctx) override {
    bool ok = true;
    if (op.op == "inc") {
      s_.inc(ctx.replica, static_cast<uint64_t>(op.amount));
    } else if (op.op == "dec") {
      ok = s_.dec(ctx.replica, static_cast<uint64_t>(op.amount));
    } else {
      ok = s_.transfer(ctx.replica, op.to, static_cast<uint64_t>(op.amount));
    }
    verify();
    return ok;
  }
  void merge_payload(const std::string& bytes) override {
    ByteReader r(bytes);
    s_ = merge(s_, read_bcounter(r));
    r.expect_done();
    verify();
  }
  std::string encode_state() const override {
    ByteWriter w;
    write(w, s_);
    return w.take();
  }
  std::string query() const override { return std::to_string(s_.value()); }

 private:
  void verify() const {
    if (!s_.rights_nonnegative()) {
      throw SimError("bounded counter: negative local rights");
    }
    if (s_.value() < 0) {
      throw SimError("bounded counter: value went negative");
    }
  }

  BoundedCounter s_;
};

class TopKReplica : public IStateType {
 public:
  using EnterHook = std::function<void(const std::vector<TopKEntry>&)>;

  TopKReplica(uint64_t k, EnterHook hook) : s_(k), hook_(std::move(hook)) {}

  bool update(const UpdateOp& op, const UpdateCtx& ctx) override {
    if (op.op == "add") {
      hook_(s_.add(op.elem, op.score, ctx.event_dot));
    } else {
      hook_(s_.rmv(op.elem, ctx.event_dot, *ctx.seen));
    }
    return true;
  }
  void merge_payload(const std::string& bytes) override {
    hook_(s_.merge_in(TopKSet::decode_sync(bytes)));
  }
  std::string encode_state() const override { return s_.encode_full(); }
  std::string encode_sync() const override { return s_.encode_sync(); }
  std::string query() const override { return render_topk(s_.read()); }

  std::vector<Dot> top_dots() const {
    std::vector<Dot> out;
    for (const TopKEntry& e : s_.read()) out.push_back(e.dot);
    return out;
  }

 private:
  TopKSet s_;
  EnterHook hook_;
};

// ---------------------------------------------------------------------------
// Op-model replicas

class IOpType {
 public:
  virtual ~IOpType() = default;
  virtual Effector generate(const UpdateOp& op, const UpdateCtx& ctx,
                            uint64_t seq, const VersionVector& deps) const = 0;
  virtual void apply(const Effector& e) = 0;
  virtual std::string encode_state() const = 0;
  virtual std::string query() const = 0;
  virtual std::unique_ptr<IOpType> clone() const = 0;
};

class OpCounterReplica : public IOpType {
 public:
  Effector generate(const UpdateOp& op, const UpdateCtx& ctx, uint64_t seq,
                    const VersionVector& deps) const override {
    int64_t amount = op.op == "inc" ? op.amount : -op.amount;
    return gen_counter_add(s_, ctx.replica, seq, deps, ctx.ts, amount);
  }
  void apply(const Effector& e) override { effect(s_, e); }
  std::string encode_state() const override {
    ByteWriter w;
    w.put_i64(s_.value);
    return w.take();
  }
  std::string query() const override { return std::to_string(s_.value); }
  std::unique_ptr<IOpType> clone() const override {
    return std::make_unique<OpCounterReplica>(*this);
  }

 private:
  OpCounter s_;
};

class OpAWSetReplica : public IOpType {
 public:
  Effector generate(const UpdateOp& op, const UpdateCtx& ctx, uint64_t seq,
                    const VersionVector& deps) const override {
    if (op.op == "add") {
      return gen_awset_add(s_, ctx.replica, seq, deps, ctx.ts, op.elem);
    }
    return gen_awset_rmv(s_, ctx.replica, seq, deps, ctx.ts, op.elem);
  }
  void apply(const Effector& e) override { effect(s_, e); }
  std::string encode_state() const override {
    ByteWriter w;
    w.put_u64(s_.entries.size());
    for (const auto& [elem, dots] : s_.entries) {
      w.put_str(elem);
      write(w, dots);
    }
    return w.take();
  }
  std::string query() const override { return render_set(s_.elements()); }
  std::unique_ptr<IOpType> clone() const override {
    return std::make_unique<OpAWSetReplica>(*this);
  }

 private:
  OpAWSet s_;
};

class OpWWCounterReplica : public IOpType {
 public:
  Effector generate(const UpdateOp& op, const UpdateCtx& ctx, uint64_t seq,
                    const VersionVector& deps) const override {
    if (op.op == "wr") {
      return gen_ww_write(s_, ctx.replica, seq, deps, ctx.ts, op.amount);
    }
    int64_t amount = op.op == "inc" ? op.amount : -op.amount;
    return gen_ww_add(s_, ctx.replica, seq, deps, ctx.ts, amount);
  }
  void apply(const Effector& e) override { effect(s_, e); }
  std::string encode_state() const override {
    ByteWriter w;
    w.put_bool(s_.base_ts.has_value());
    if (s_.base_ts.has_value()) write(w, *s_.base_ts);
    w.put_i64(s_.base);
    w.put_i64(s_.delta);
    return w.take();
  }
  std::string query() const override { return std::to_string(s_.value()); }
  std::unique_ptr<IOpType> clone() const override {
    return std::make_unique<OpWWCounterReplica>(*this);
  }

 private:
  OpWWCounter s_;
};

// ---------------------------------------------------------------------------
// Delta-model replicas

class IDeltaType {
 public:
  virtual ~IDeltaType() = default;
  /// Applies the update locally and returns the encoded delta.
  virtual std::string update(const UpdateOp& op, const UpdateCtx& ctx) = 0;
  /// Joins the shipped deltas and applies them atomically.
  virtual void apply_interval(const std::vector<DeltaLogEntry>& entries) = 0;
  virtual void merge_full(const std::string& bytes) = 0;
  virtual std::string encode_state() const = 0;
  virtual std::string query() const = 0;
};

struct GCounterDeltaTraits {
  using State = GCounter;
  using Delta = GCounter;
  static Delta update(State& s, const UpdateOp& op, const UpdateCtx& ctx) {
    (void)op;
    return delta_inc(s, ctx.replica, static_cast<uint64_t>(op.amount));
  }
  static void encode_delta(ByteWriter& w, const Delta& d) { write(w, d); }
  static Delta decode_delta(ByteReader& r) { return read_gcounter(r); }
  static void encode(ByteWriter& w, const State& s) { write(w, s); }
  static State decode(ByteReader& r) { return read_gcounter(r); }
  static std::string query(const State& s) { return std::to_string(s.value()); }
};

struct PNCounterDeltaTraits {
  using State = PNCounter;
  using Delta = PNCounter;
  static Delta update(State& s, const UpdateOp& op, const UpdateCtx& ctx) {
    if (op.op == "inc") {
      return delta_pn_inc(s, ctx.replica, static_cast<uint64_t>(op.amount));
    }
    return delta_pn_dec(s, ctx.replica, static_cast<uint64_t>(op.amount));
  }
  static void encode_delta(ByteWriter& w, const Delta& d) { write(w, d); }
  static Delta decode_delta(ByteReader& r) { return read_pncounter(r); }
  static void encode(ByteWriter& w, const State& s) { write(w, s); }
  static State decode(ByteReader& r) { return read_pncounter(r); }
  static std::string query(const State& s) { return std::to_string(s.value()); }
};

struct AWSetDeltaTraits {
  using State = AWSet;
  using Delta = AWSetDelta;
  static Delta update(State& s, const UpdateOp& op, const UpdateCtx& ctx) {
    if (op.op == "add") return delta_add(s, ctx.replica, op.elem);
    return delta_rmv(s, op.elem);
  }
  static void encode_delta(ByteWriter& w, const Delta& d) { write(w, d); }
  static Delta decode_delta(ByteReader& r) { return read_awset_delta(r); }
  static void encode(ByteWriter& w, const State& s) { write(w, s); }
  static State decode(ByteReader& r) { return read_awset(r); }
  static std::string query(const State& s) { return render_set(s.elements()); }
};

struct MVRegDeltaTraits {
  using State = MVRegister;
  using Delta = MVRegDelta;
  static Delta update(State& s, const UpdateOp& op, const UpdateCtx& ctx) {
    return delta_write(s, ctx.replica, op.value);
  }
  static void encode_delta(ByteWriter& w, const Delta& d) { write(w, d); }
  static Delta decode_delta(ByteReader& r) { return read_mvreg_delta(r); }
  static void encode(ByteWriter& w, const State& s) { write(w, s); }
  static State decode(ByteReader& r) { return read_mvregister(r); }
  static std::string query(const State& s) {
    std::multiset<std::string> vals;
    for (const auto& [_, v] : s.entries) vals.insert(v);
    return render_multiset(vals);
  }
};

template <typename Traits>
class DeltaReplica : public IDeltaType {
 public:
  std::string update(const UpdateOp& op, const UpdateCtx& ctx) override {
    typename Traits::Delta d = Traits::update(s_, op, ctx);
    ByteWriter w;
    Traits::encode_delta(w, d);
    return w.take();
  }
  void apply_interval(const std::vector<DeltaLogEntry>& entries) override {
    if (entries.empty()) return;
    ByteReader first(entries[0].delta);
    typename Traits::Delta joined = Traits::decode_delta(first);
    first.expect_done();
    for (size_t i = 1; i < entries.size(); ++i) {
      ByteReader r(entries[i].delta);
      joined = join(joined, Traits::decode_delta(r));
      r.expect_done();
    }
    apply_delta(s_, joined);
  }
  void merge_full(const std::string& bytes) override {
    ByteReader r(bytes);
    s_ = merge(s_, Traits::decode(r));
    r.expect_done();
  }
  std::string encode_state() const override {
    ByteWriter w;
    Traits::encode(w, s_);
    return w.take();
  }
  std::string query() const override { return Traits::query(s_); }

 private:
  typename Traits::State s_;
};

// ---------------------------------------------------------------------------
// Engine

struct OpRuntime {
  VersionVector applied;
  std::vector<Effector> store;  // applied effectors, relayed on sync
  std::vector<Effector> buffer;
  std::map<ReplicaId, VersionVector> peer_acked;

  // Commute-check bookkeeping (enabled by RunOptions::check_commutes).
  std::vector<Effector> applied_log;
  std::vector<std::unique_ptr<IOpType>> snapshots;
};

struct InFlight {
  uint64_t id = 0;
  ReplicaId from, to;
  std::string bytes;
  std::string kind;
  uint64_t due = 0;
  uint64_t order = 0;
};

class Engine {
 public:
  Engine(const Scenario& sc, const RunOptions& opts)
      : sc_(sc), opts_(opts), rng_(sc.seed) {
    build_replicas();
  }

  RunResult finish() {
    trace_head();
    apply_initial();
    for (size_t i = 0; i < sc_.script.size(); ++i) {
      tick_ = i + 1;
      deliver_due();
      exec_step(sc_.script[i]);
    }
    while (!inflight_.empty()) {
      ++tick_;
      deliver_due();
    }
    for (const ReplicaId& r : sc_.replicas) {
      result_.queries[r] = query_of(r);
      result_.states[r] = encode_of(r);
      trace_.emit(tick_, "final", r + "\t" + result_.queries[r]);
    }
    result_.history = std::move(history_);
    if (sc_.ends_with_full_sync()) {
      result_.convergence = check_convergence(sc_, result_);
      result_.convergence_checked = true;
      trace_.emit(tick_, "converge",
                  result_.convergence.ok ? "ok" : result_.convergence.detail);
    }
    result_.trace = std::move(trace_);
    return std::move(result_);
  }

 private:
  // -- construction -------------------------------------------------------

  void build_replicas() {
    for (const ReplicaId& r : sc_.replicas) {
      clock_[r] = HybridTimestamp{0, 0, r};
      seen_[r];
      event_seq_[r] = 0;
      switch (sc_.model) {
        case SyncModel::State:
          state_[r] = make_state_replica(r);
          break;
        case SyncModel::Op:
          op_[r] = make_op_replica();
          oprt_[r];
          break;
        case SyncModel::Delta:
          delta_[r] = make_delta_replica();
          deltabuf_[r];
          break;
      }
    }
  }

  std::unique_ptr<IStateType> make_state_replica(const ReplicaId& r) {
    const std::string& t = sc_.crdt.type;
    if (t == "gcounter") return std::make_unique<GCounterReplica>();
    if (t == "gcounter-broken-min") {
      return std::make_unique<BrokenGCounterReplica>();
    }
    if (t == "pncounter") return std::make_unique<PNCounterReplica>();
    if (t == "lwwreg") return std::make_unique<LWWRegReplica>();
    if (t == "mvreg") return std::make_unique<MVRegReplica>();
    if (t == "awset") return std::make_unique<AWSetReplica>();
    if (t == "rwset") return std::make_unique<RWSetReplica>();
    if (t == "lwwset") return std::make_unique<LWWSetReplica>();
    if (t == "bcounter") {
      return std::make_unique<BoundedCounterReplica>(BoundedCounter::make(
          sc_.crdt.initial, sc_.replicas, sc_.crdt.allocation));
    }
    if (t == "topk") {
      auto hook = [this](const std::vector<TopKEntry>& entered) {
        for (const TopKEntry& e : entered) {
          result_.topk_entered.insert(e.dot);
          trace_.emit(tick_, "topk_enter",
                      e.elem + "\t" + std::to_string(e.score) + "\t" +
                          to_string(e.dot));
        }
      };
      auto rep = std::make_unique<TopKReplica>(sc_.crdt.k, hook);
      topk_[r] = rep.get();
      return rep;
    }
    throw ScenarioError("unknown state type '" + t + "'");
  }

  std::unique_ptr<IOpType> make_op_replica() const {
    const std::string& t = sc_.crdt.type;
    if (t == "counter") return std::make_unique<OpCounterReplica>();
    if (t == "awset") return std::make_unique<OpAWSetReplica>();
    if (t == "wwcounter") return std::make_unique<OpWWCounterReplica>();
    throw ScenarioError("unknown op type '" + t + "'");
  }

  std::unique_ptr<IDeltaType> make_delta_replica() const {
    const std::string& t = sc_.crdt.type;
    if (t == "gcounter") {
      return std::make_unique<DeltaReplica<GCounterDeltaTraits>>();
    }
    if (t == "pncounter") {
      return std::make_unique<DeltaReplica<PNCounterDeltaTraits>>();
    }
    if (t == "awset") {
      return std::make_unique<DeltaReplica<AWSetDeltaTraits>>();
    }
    if (t == "mvreg") {
      return std::make_unique<DeltaReplica<MVRegDeltaTraits>>();
    }
    throw ScenarioError("unknown delta type '" + t + "'");
  }

  void trace_head() {
    std::string reps;
    for (const ReplicaId& r : sc_.replicas) {
      if (!reps.empty()) reps += ",";
      reps += r;
    }
    trace_.emit(0, "init",
                "crdt=" + sc_.crdt.type + "\tmodel=" + to_string(sc_.model) +
                    "\treplicas=" + reps + "\tseed=" +
                    std::to_string(sc_.seed));
  }

  // -- initial state -------------------------------------------------------

  void apply_initial() {
    for (size_t i = 0; i < sc_.initial.size(); ++i) {
      const UpdateOp& op = sc_.initial[i];
      Dot dot{kInit, i + 1};
      HybridTimestamp ts{0, i, kInit};
      UpdateCtx ctx{kInit, ts, dot, nullptr};
      oracle::OpEvent ev = plan_event(op, dot, ts);
      history_.add_event(ev);
      for (size_t j = 0; j < i; ++j) {
        history_.add_hb(Dot{kInit, j + 1}, dot);
      }
      switch (sc_.model) {
        case SyncModel::State:
          for (const ReplicaId& r : sc_.replicas) {
            state_[r]->update(op, ctx);
          }
          break;
        case SyncModel::Delta:
          for (const ReplicaId& r : sc_.replicas) {
            delta_[r]->update(op, ctx);  // delta not buffered: everyone has it
          }
          break;
        case SyncModel::Op: {
          Effector eff = make_initial_effector(op, i + 1, ts);
          for (const ReplicaId& r : sc_.replicas) {
            op_deliver(r, eff);
          }
          break;
        }
      }
      for (const ReplicaId& r : sc_.replicas) {
        seen_[r].observe(dot);
      }
      trace_.emit(0, "update",
                  std::string(kInit) + "\t" + render_op(op) + "\tok\tdot=" +
                      to_string(dot) + "\tts=" + to_string(ts));
      ++result_.updates;
    }
  }

  Effector make_initial_effector(const UpdateOp& op, uint64_t seq,
                                 const HybridTimestamp& ts) const {
    Effector eff;
    eff.origin = kInit;
    eff.seq = seq;
    eff.deps.set(kInit, seq - 1);
    eff.ts = ts;
    const std::string& t = sc_.crdt.type;
    if (t == "counter") {
      eff.payload = CounterAddEff{op.amount};
    } else if (t == "awset") {
      eff.payload = AWSetAddEff{op.elem, Dot{kInit, seq}};
    } else {
      throw ScenarioError("initial state unsupported for op-based " + t);
    }
    return eff;
  }

  // -- oracle events -------------------------------------------------------

  oracle::OpEvent plan_event(const UpdateOp& op, const Dot& dot,
                             const HybridTimestamp& ts) const {
    oracle::OpEvent ev;
    ev.id = dot;
    ev.ts = ts;
    const std::string& t = sc_.crdt.type;
    if (op.op == "add") {
      ev.kind = oracle::OpKind::Add;
      ev.elem = op.elem;
      if (t == "topk") ev.amount = op.score;
    } else if (op.op == "rmv") {
      ev.kind = oracle::OpKind::Rmv;
      ev.elem = op.elem;
    } else if (op.op == "wr") {
      ev.kind = oracle::OpKind::Wr;
      if (t == "wwcounter") {
        ev.amount = op.amount;
      } else {
        ev.value = op.value;
      }
    } else if (op.op == "inc") {
      ev.kind = oracle::OpKind::Inc;
      ev.amount = op.amount;
    } else if (op.op == "dec") {
      ev.kind = oracle::OpKind::Dec;
      ev.amount = op.amount;
    } else {
      throw ScenarioError("cannot map op '" + op.op + "' to an event");
    }
    return ev;
  }

  void record_event(const ReplicaId& r, const oracle::OpEvent& ev) {
    history_.add_event(ev);
    for (const oracle::OpEvent& prior : history_.events()) {
      if (prior.id != ev.id && dot_seen(seen_[r], prior.id)) {
        history_.add_hb(prior.id, ev.id);
      }
    }
  }

  // -- script steps --------------------------------------------------------

  void exec_step(const Step& st) {
    switch (st.kind) {
      case Step::Kind::Update:
        if (st.op.op == "read") {
          do_read(st.at);
        } else {
          do_update(st.at, st.op);
        }
        break;
      case Step::Kind::SyncPair:
        do_sync(st.from, st.to, false);
        break;
      case Step::Kind::SyncFull:
        do_full_sync();
        break;
      case Step::Kind::Net:
        net_ = st.net;
        trace_.emit(tick_, "net",
                    "drop=" + std::to_string(net_.drop_ppm) + "ppm\tdup=" +
                        std::to_string(net_.dup_ppm) + "ppm\treorder=" +
                        std::to_string(net_.reorder));
        break;
    }
  }

  void do_read(const ReplicaId& r) {
    trace_.emit(tick_, "query", r + "\t" + query_of(r));
  }

  void do_update(const ReplicaId& r, const UpdateOp& op) {
    HybridTimestamp ts = hlc_local(clock_[r], tick_);
    Dot dot{r, event_seq_[r] + 1};
    UpdateCtx ctx{r, ts, dot, &seen_[r]};
    bool ok = true;
    bool makes_event = op.op != "transfer";
    switch (sc_.model) {
      case SyncModel::State:
        ok = state_[r]->update(op, ctx);
        break;
      case SyncModel::Op: {
        Effector eff = op_[r]->generate(op, ctx, dot.counter, oprt_[r].applied);
        oracle::OpEvent ev = plan_event(op, dot, ts);
        record_event(r, ev);
        clock_[r] = ts;
        event_seq_[r] = dot.counter;
        op_deliver(r, eff);  // immediate self-delivery; observes `seen`
        ++result_.updates;
        trace_update(r, op, true, &dot, &ts);
        return;
      }
      case SyncModel::Delta: {
        std::string delta_bytes = delta_[r]->update(op, ctx);
        oracle::OpEvent ev = plan_event(op, dot, ts);
        record_event(r, ev);
        seen_[r].observe(dot);
        clock_[r] = ts;
        event_seq_[r] = dot.counter;
        deltabuf_[r].record_local(DeltaLogEntry{dot, delta_bytes, seen_[r]});
        ++result_.updates;
        trace_update(r, op, true, &dot, &ts);
        return;
      }
    }
    // State model.
    if (!ok || !makes_event) {
      trace_update(r, op, ok, nullptr, nullptr);
      if (ok) ++result_.updates;  // successful transfer: no oracle event
      return;
    }
    oracle::OpEvent ev = plan_event(op, dot, ts);
    record_event(r, ev);
    seen_[r].observe(dot);
    clock_[r] = ts;
    event_seq_[r] = dot.counter;
    ++result_.updates;
    trace_update(r, op, true, &dot, &ts);
  }

  void trace_update(const ReplicaId& r, const UpdateOp& op, bool ok,
                    const Dot* dot, const HybridTimestamp* ts) {
    std::string fields = r + "\t" + render_op(op) + (ok ? "\tok" : "\tfail");
    if (dot != nullptr) fields += "\tdot=" + to_string(*dot);
    if (ts != nullptr) fields += "\tts=" + to_string(*ts);
    trace_.emit(tick_, "update", fields);
  }

  // -- op-model delivery ---------------------------------------------------

  void op_deliver(const ReplicaId& r, const Effector& eff) {
    OpRuntime& rt = oprt_[r];
    if (dot_seen(rt.applied, eff.dot())) return;
    for (const Effector& b : rt.buffer) {
      if (b.dot() == eff.dot()) return;
    }
    rt.buffer.push_back(eff);
    bool progress = true;
    while (progress) {
      progress = false;
      for (auto it = rt.buffer.begin(); it != rt.buffer.end(); ++it) {
        if (rt.applied.get(it->origin) == it->seq - 1 &&
            vv_leq(it->deps, rt.applied)) {
          Effector ready = *it;
          rt.buffer.erase(it);
          op_apply(r, ready);
          progress = true;
          break;
        }
      }
    }
  }

  void op_apply(const ReplicaId& r, const Effector& eff) {
    OpRuntime& rt = oprt_[r];
    if (!vv_leq(eff.deps, rt.applied)) {
      throw SimError("causal delivery violated at " + r + " for effector " +
                     to_string(eff.dot()));
    }
    if (opts_.check_commutes) {
      for (size_t i = 0; i < rt.applied_log.size(); ++i) {
        const Effector& prior = rt.applied_log[i];
        if (!effectors_concurrent(prior, eff)) continue;
        ++result_.concurrent_pairs;
        check_pair(*rt.snapshots[i], prior, eff);
        auto fresh = make_op_replica();
        check_pair(*fresh, prior, eff);
      }
      rt.snapshots.push_back(op_[r]->clone());
      rt.applied_log.push_back(eff);
    }
    op_[r]->apply(eff);
    rt.applied.observe(eff.dot());
    rt.store.push_back(eff);
    seen_[r].observe(eff.dot());
  }

  void check_pair(const IOpType& base, const Effector& a, const Effector& b) {
    auto s1 = base.clone();
    s1->apply(a);
    s1->apply(b);
    auto s2 = base.clone();
    s2->apply(b);
    s2->apply(a);
    if (s1->encode_state() != s2->encode_state()) {
      result_.commute_failures.push_back(
          "effectors " + to_string(a.dot()) + " and " + to_string(b.dot()) +
          " do not commute");
    }
  }

  // -- sync ----------------------------------------------------------------

  void do_sync(const ReplicaId& from, const ReplicaId& to, bool direct) {
    switch (sc_.model) {
      case SyncModel::State: {
        std::string payload = state_[from]->encode_sync();
        note_topk_shipment(from);
        ByteWriter w;
        w.put_u8(kMsgState);
        w.put_str(payload);
        write(w, seen_[from]);
        write(w, clock_[from]);
        transmit(from, to, w.take(), "state", direct);
        break;
      }
      case SyncModel::Op: {
        OpRuntime& rt = oprt_[from];
        const VersionVector& acked = rt.peer_acked[to];
        for (const Effector& eff : rt.store) {
          if (dot_seen(acked, eff.dot())) continue;
          ByteWriter w;
          w.put_u8(kMsgEffector);
          write(w, eff);
          transmit(from, to, w.take(), "effector", direct);
        }
        break;
      }
      case SyncModel::Delta: {
        DeltaBuffer::Outgoing out = deltabuf_[from].assemble(to, seen_[from]);
        if (out.kind == DeltaBuffer::Outgoing::Kind::None) {
          trace_.emit(tick_, "antientropy", from + "\t" + to + "\tnoop");
          break;
        }
        if (out.kind == DeltaBuffer::Outgoing::Kind::Full) {
          ByteWriter w;
          w.put_u8(kMsgState);
          w.put_str(delta_[from]->encode_state());
          write(w, seen_[from]);
          write(w, clock_[from]);
          transmit(from, to, w.take(), "fullstate", direct);
          break;
        }
        ByteWriter w;
        w.put_u8(kMsgDeltaInterval);
        w.put_u64(out.entries.size());
        for (const DeltaLogEntry& e : out.entries) {
          write(w, e.update_dot);
          w.put_str(e.delta);
          write(w, e.knowledge);
        }
        write(w, clock_[from]);
        transmit(from, to, w.take(), "interval", direct);
        break;
      }
    }
  }

  void note_topk_shipment(const ReplicaId& from) {
    auto it = topk_.find(from);
    if (it == topk_.end()) return;
    for (const Dot& d : it->second->top_dots()) {
      result_.topk_shipped.insert(d);
      trace_.emit(tick_, "topk_ship", from + "\t" + to_string(d));
    }
  }

  void do_full_sync() {
    trace_.emit(tick_, "fullsync", "begin");
    uint64_t rounds = 0;
    std::string before = fingerprint();
    while (true) {
      ++rounds;
      if (rounds > 64) {
        throw SimError("full sync did not reach a fixpoint");
      }
      for (const ReplicaId& from : sc_.replicas) {
        for (const ReplicaId& to : sc_.replicas) {
          if (from == to) continue;
          do_sync(from, to, true);
        }
      }
      std::string after = fingerprint();
      if (after == before) break;
      before = std::move(after);
    }
    if (sc_.model == SyncModel::Op) {
      for (const ReplicaId& r : sc_.replicas) {
        if (!oprt_[r].buffer.empty()) {
          throw SimError("effector buffer not drained after full sync at " + r);
        }
      }
    }
    trace_.emit(tick_, "fullsync", "end\trounds=" + std::to_string(rounds));
  }

  std::string fingerprint() const {
    std::string out;
    for (const ReplicaId& r : sc_.replicas) {
      out += encode_of(r);
      out += to_string(seen_.at(r));
      if (sc_.model == SyncModel::Op) {
        const OpRuntime& rt = oprt_.at(r);
        out += to_string(rt.applied);
        out += std::to_string(rt.buffer.size());
        for (const auto& [p, vv] : rt.peer_acked) out += p + to_string(vv);
      }
      if (sc_.model == SyncModel::Delta) {
        const DeltaBuffer& buf = deltabuf_.at(r);
        for (const auto& [p, vv] : buf.peer_acks()) out += p + to_string(vv);
      }
    }
    return out;
  }

  // -- network -------------------------------------------------------------

  void transmit(const ReplicaId& from, const ReplicaId& to, std::string bytes,
                const std::string& kind, bool direct) {
    uint64_t id = next_msg_id_++;
    ++result_.messages_sent;
    result_.bytes += bytes.size();
    trace_.emit(tick_, direct ? "exchange" : "send",
                "msg=" + std::to_string(id) + "\t" + from + "\t" + to + "\t" +
                    kind + "\tbytes=" + std::to_string(bytes.size()));
    if (direct) {
      deliver_bytes(from, to, bytes, true);
      return;
    }
    if (net_.drop_ppm > 0 && rng_.chance_ppm(net_.drop_ppm)) {
      ++result_.dropped;
      trace_.emit(tick_, "drop", "msg=" + std::to_string(id));
      return;
    }
    int copies = 1;
    if (net_.dup_ppm > 0 && rng_.chance_ppm(net_.dup_ppm)) {
      copies = 2;
      ++result_.duplicated;
      trace_.emit(tick_, "dup", "msg=" + std::to_string(id));
    }
    for (int c = 0; c < copies; ++c) {
      uint64_t delay = net_.reorder > 0 ? rng_.below(net_.reorder + 1) : 0;
      inflight_.push_back(InFlight{id, from, to, bytes, kind,
                                   tick_ + 1 + delay, next_order_++});
    }
  }

  void deliver_due() {
    std::vector<InFlight> due;
    for (auto it = inflight_.begin(); it != inflight_.end();) {
      if (it->due <= tick_) {
        due.push_back(std::move(*it));
        it = inflight_.erase(it);
      } else {
        ++it;
      }
    }
    std::sort(due.begin(), due.end(), [](const InFlight& a, const InFlight& b) {
      return std::tie(a.due, a.order) < std::tie(b.due, b.order);
    });
    for (InFlight& m : due) {
      trace_.emit(tick_, "deliver",
                  "msg=" + std::to_string(m.id) + "\t" + m.from + "\t" + m.to +
                      "\t" + m.kind);
      ++result_.delivered;
      deliver_bytes(m.from, m.to, m.bytes, false);
    }
  }

  void deliver_bytes(const ReplicaId& from, const ReplicaId& to,
                     const std::string& bytes, bool direct) {
    ByteReader r(bytes);
    uint8_t tag = r.get_u8();
    switch (tag) {
      case kMsgState: {
        std::string payload = r.get_str();
        VersionVector knowledge = read_vv(r);
        HybridTimestamp clk = read_ts(r);
        r.expect_done();
        if (sc_.model == SyncModel::State) {
          state_[to]->merge_payload(payload);
        } else {
          delta_[to]->merge_full(payload);
        }
        seen_[to].join_with(knowledge);
        clock_[to] = hlc_receive(clock_[to], clk, tick_);
        if (sc_.model == SyncModel::Delta) send_delta_ack(to, from, direct);
        break;
      }
      case kMsgDeltaInterval: {
        uint64_t n = r.get_u64();
        std::vector<DeltaLogEntry> entries;
        entries.reserve(n);
        for (uint64_t i = 0; i < n; ++i) {
          DeltaLogEntry e;
          e.update_dot = read_dot(r);
          e.delta = r.get_str();
          e.knowledge = read_vv(r);
          entries.push_back(std::move(e));
        }
        HybridTimestamp clk = read_ts(r);
        r.expect_done();
        try {
          delta_[to]->apply_interval(entries);
        } catch (const MiddlewareViolation& e) {
          throw SimError(std::string("delta middleware: ") + e.what());
        }
        deltabuf_[to].record_remote(entries);
        VersionVector k;
        for (const DeltaLogEntry& e : entries) {
          k.join_with(e.knowledge);
          k.observe(e.update_dot);
        }
        seen_[to].join_with(k);
        clock_[to] = hlc_receive(clock_[to], clk, tick_);
        send_delta_ack(to, from, direct);
        break;
      }
      case kMsgDeltaAck: {
        VersionVector acked = read_vv(r);
        r.expect_done();
        deltabuf_[to].on_ack(from, acked);
        break;
      }
      case kMsgEffector: {
        Effector eff = read_effector(r);
        r.expect_done();
        clock_[to] = hlc_receive(clock_[to], eff.ts, tick_);
        op_deliver(to, eff);
        if (direct) {
          oprt_[from].peer_acked[to].join_with(oprt_[to].applied);
        } else {
          ByteWriter w;
          w.put_u8(kMsgOpAck);
          write(w, oprt_[to].applied);
          transmit(to, from, w.take(), "opack", false);
        }
        break;
      }
      case kMsgOpAck: {
        VersionVector acked = read_vv(r);
        r.expect_done();
        oprt_[to].peer_acked[from].join_with(acked);
        break;
      }
      default:
        throw SimError("unknown message tag");
    }
  }

  void send_delta_ack(const ReplicaId& from, const ReplicaId& to, bool direct) {
    // `from` is the replica acknowledging, `to` the original sender.
    if (direct) {
      deltabuf_[to].on_ack(from, seen_[from]);
      return;
    }
    ByteWriter w;
    w.put_u8(kMsgDeltaAck);
    write(w, seen_[from]);
    transmit(from, to, w.take(), "deltaack", false);
  }

  // -- queries -------------------------------------------------------------

  std::string query_of(const ReplicaId& r) const {
    switch (sc_.model) {
      case SyncModel::State: return state_.at(r)->query();
      case SyncModel::Op: return op_.at(r)->query();
      case SyncModel::Delta: return delta_.at(r)->query();
    }
    return "";
  }

  std::string encode_of(const ReplicaId& r) const {
    switch (sc_.model) {
      case SyncModel::State: return state_.at(r)->encode_state();
      case SyncModel::Op: return op_.at(r)->encode_state();
      case SyncModel::Delta: return delta_.at(r)->encode_state();
    }
    return "";
  }

  // -- members -------------------------------------------------------------

  Scenario sc_;
  RunOptions opts_;
  SplitMix64 rng_;
  Trace trace_;
  oracle::History history_;
  RunResult result_;

  uint64_t tick_ = 0;
  NetParams net_;
  std::map<ReplicaId, HybridTimestamp> clock_;
  std::map<ReplicaId, VersionVector> seen_;
  std::map<ReplicaId, uint64_t> event_seq_;

  std::map<ReplicaId, std::unique_ptr<IStateType>> state_;
  std::map<ReplicaId, TopKReplica*> topk_;
  std::map<ReplicaId, std::unique_ptr<IOpType>> op_;
  std::map<ReplicaId, OpRuntime> oprt_;
  std::map<ReplicaId, std::unique_ptr<IDeltaType>> delta_;
  std::map<ReplicaId, DeltaBuffer> deltabuf_;

  std::vector<InFlight> inflight_;
  uint64_t next_msg_id_ = 1;
  uint64_t next_order_ = 1;
};

}  // namespace

RunResult run(const Scenario& sc, const RunOptions& opts) {
  sc.validate();
  Engine engine(sc, opts);
  return engine.finish();
}

std::string oracle_verdict(const Scenario& sc, const oracle::History& h) {
  const std::string& t = sc.crdt.type;
  if (t == "gcounter" || t == "gcounter-broken-min" || t == "pncounter" ||
      t == "counter") {
    return std::to_string(oracle::eval_counter(h));
  }
  if (t == "wwcounter") return std::to_string(oracle::eval_ww_counter(h));
  if (t == "lwwreg") return render_opt(oracle::eval_lww_register(h));
  if (t == "mvreg") return render_multiset(oracle::eval_mv_register(h));
  if (t == "awset") return render_set(oracle::eval_aw_set(h));
  if (t == "rwset") return render_set(oracle::eval_rw_set(h));
  if (t == "lwwset") return render_set(oracle::eval_lww_set(h));
  if (t == "bcounter") {
    int64_t total = sc.crdt.initial;
    for (const oracle::OpEvent& e : h.events()) {
      if (e.kind == oracle::OpKind::Inc) total += e.amount;
      if (e.kind == oracle::OpKind::Dec) total -= e.amount;
    }
    return std::to_string(total);
  }
  if (t == "topk") {
    // Fully replicated reference: every add is visible; an add is dead iff
    // some remove of its element happened after it.
    std::map<Element, TopKEntry> best;
    for (const oracle::OpEvent& a : h.events()) {
      if (a.kind != oracle::OpKind::Add) continue;
      bool removed = false;
      for (const oracle::OpEvent& r : h.events()) {
        if (r.kind == oracle::OpKind::Rmv && r.elem == a.elem &&
            h.happens_before(a.id, r.id)) {
          removed = true;
          break;
        }
      }
      if (removed) continue;
      TopKEntry e{a.elem, a.amount, a.id};
      auto [it, inserted] = best.insert({e.elem, e});
      if (!inserted && (e.score > it->second.score ||
                        (e.score == it->second.score && it->second.dot < e.dot))) {
        it->second = e;
      }
    }
    std::vector<TopKEntry> ranked;
    for (const auto& [_, e] : best) ranked.push_back(e);
    std::sort(ranked.begin(), ranked.end(), topk_outranks);
    if (ranked.size() > sc.crdt.k) ranked.resize(sc.crdt.k);
    return render_topk(ranked);
  }
  throw ScenarioError("no oracle evaluation for type '" + t + "'");
}

ConvergenceReport check_convergence(const Scenario& sc, const RunResult& r) {
  if (!sc.ends_with_full_sync()) {
    return {false, "scenario does not end with a full sync"};
  }
  if (r.queries.empty()) return {false, "no replica queries recorded"};
  auto first = r.queries.begin();
  for (auto it = std::next(first); it != r.queries.end(); ++it) {
    if (it->second != first->second) {
      return {false, "replicas diverge: " + first->first + "=" +
                         first->second + " vs " + it->first + "=" +
                         it->second};
    }
  }
  std::string expected = oracle_verdict(sc, r.history);
  if (first->second != expected) {
    return {false, "replica " + first->first + "=" + first->second +
                       " disagrees with oracle=" + expected};
  }
  return {true, ""};
}

// ---------------------------------------------------------------------------
// Fuzzing

namespace {

const std::vector<std::string>& elem_pool() {
  static const std::vector<std::string> pool = {"x", "y", "z", "w"};
  return pool;
}

UpdateOp random_update(SplitMix64& rng, const Scenario& sc) {
  const std::string& t = sc.crdt.type;
  UpdateOp op;
  if (t == "gcounter" || t == "gcounter-broken-min") {
    op.op = "inc";
  } else if (t == "pncounter") {
    op.op = rng.below(2) == 0 ? "inc" : "dec";
  } else if (t == "counter") {
    op.op = rng.below(2) == 0 ? "inc" : "dec";
    op.amount = 1 + static_cast<int64_t>(rng.below(3));
  } else if (t == "wwcounter") {
    uint64_t pick = rng.below(10);
    if (pick < 3) {
      op.op = "wr";
      op.amount = static_cast<int64_t>(rng.below(20));
    } else {
      op.op = pick < 7 ? "inc" : "dec";
      op.amount = 1 + static_cast<int64_t>(rng.below(2));
    }
  } else if (t == "lwwreg" || t == "mvreg") {
    op.op = "wr";
    op.value = "v" + std::to_string(rng.below(6));
  } else if (t == "awset" || t == "rwset" || t == "lwwset") {
    op.op = rng.below(10) < 6 ? "add" : "rmv";
    op.elem = rng.pick(elem_pool());
  } else if (t == "bcounter") {
    uint64_t pick = rng.below(10);
    if (pick < 3) {
      op.op = "inc";
      op.amount = 1 + static_cast<int64_t>(rng.below(3));
    } else if (pick < 8) {
      op.op = "dec";
      op.amount = 1 + static_cast<int64_t>(rng.below(3));
    } else {
      op.op = "transfer";
      op.amount = 1 + static_cast<int64_t>(rng.below(3));
      op.to = sc.replicas[rng.below(sc.replicas.size())];
    }
  } else if (t == "topk") {
    if (rng.below(10) < 7) {
      op.op = "add";
      op.elem = "e" + std::to_string(rng.below(8));
      op.score = static_cast<int64_t>(rng.below(100));
    } else {
      op.op = "rmv";
      op.elem = "e" + std::to_string(rng.below(8));
    }
  }
  return op;
}

}  // namespace

Scenario generate_scenario(const FuzzConfig& cfg, uint64_t seed) {
  SplitMix64 rng(seed);
  Scenario sc;
  sc.seed = seed;
  sc.model = cfg.model;
  sc.crdt.type = cfg.type;
  uint32_t max_r = std::clamp<uint32_t>(cfg.replicas, 2, 4);
  size_t nr = 2 + rng.below(max_r - 1);
  static const std::vector<ReplicaId> names = {"A", "B", "C", "D"};
  sc.replicas.assign(names.begin(), names.begin() + nr);

  if (cfg.type == "topk") sc.crdt.k = 1 + rng.below(3);
  if (cfg.type == "bcounter") {
    sc.crdt.initial = 5 + static_cast<int64_t>(rng.below(20));
    int64_t remaining = sc.crdt.initial;
    for (size_t i = 0; i < sc.replicas.size(); ++i) {
      int64_t share = (i + 1 == sc.replicas.size())
                          ? remaining
                          : static_cast<int64_t>(
                                rng.below(static_cast<uint64_t>(remaining) + 1));
      sc.crdt.allocation[sc.replicas[i]] = share;
      remaining -= share;
    }
  }
  bool sets = cfg.type == "awset" || cfg.type == "rwset" ||
              cfg.type == "lwwset";
  if (sets && sc.model != SyncModel::Op && rng.below(10) < 3) {
    size_t n = 1 + rng.below(2);
    for (size_t i = 0; i < n; ++i) {
      UpdateOp op;
      op.op = "add";
      op.elem = rng.pick(elem_pool());
      sc.initial.push_back(op);
    }
  }

  uint64_t n_updates = 1 + rng.below(std::max<uint32_t>(cfg.ops, 1));
  auto random_replica = [&]() -> const ReplicaId& {
    return sc.replicas[rng.below(sc.replicas.size())];
  };
  for (uint64_t u = 0; u < n_updates; ++u) {
    if (rng.below(100) < 12) {
      Step st;
      st.kind = Step::Kind::Net;
      static const std::vector<uint32_t> drops = {0, 200000, 500000};
      static const std::vector<uint32_t> dups = {0, 200000};
      static const std::vector<uint32_t> reorders = {0, 2, 3};
      st.net.drop_ppm = rng.pick(drops);
      st.net.dup_ppm = rng.pick(dups);
      st.net.reorder = rng.pick(reorders);
      sc.script.push_back(st);
    }
    if (rng.below(100) < 30) {
      Step st;
      st.kind = Step::Kind::SyncPair;
      st.from = random_replica();
      do {
        st.to = random_replica();
      } while (st.to == st.from);
      sc.script.push_back(st);
    }
    if (rng.below(100) < 8) {
      Step st;
      st.kind = Step::Kind::Update;
      st.at = random_replica();
      st.op.op = "read";
      sc.script.push_back(st);
    }
    Step st;
    st.kind = Step::Kind::Update;
    st.at = random_replica();
    st.op = random_update(rng, sc);
    sc.script.push_back(st);
  }
  Step lossless;
  lossless.kind = Step::Kind::Net;
  sc.script.push_back(lossless);
  Step full;
  full.kind = Step::Kind::SyncFull;
  sc.script.push_back(full);
  for (const ReplicaId& r : sc.replicas) {
    Step read;
    read.kind = Step::Kind::Update;
    read.at = r;
    read.op.op = "read";
    sc.script.push_back(read);
  }
  sc.validate();
  return sc;
}

FuzzSummary fuzz(const FuzzConfig& cfg) {
  FuzzSummary sum;
  SplitMix64 master(cfg.seed);
  for (uint32_t i = 0; i < cfg.runs; ++i) {
    uint64_t run_seed = master.next();
    Scenario sc = generate_scenario(cfg, run_seed);
    RunOptions opts;
    opts.check_commutes = cfg.check_commutes && cfg.model == SyncModel::Op;
    std::string failure;
    try {
      RunResult rr = run(sc, opts);
      sum.updates += rr.updates;
      sum.messages += rr.messages_sent;
      sum.dropped += rr.dropped;
      sum.duplicated += rr.duplicated;
      sum.bytes += rr.bytes;
      if (!rr.convergence_checked) {
        failure = "convergence was not checked";
      } else if (!rr.convergence.ok) {
        failure = rr.convergence.detail;
      } else if (!rr.commute_failures.empty()) {
        failure = rr.commute_failures.front();
      } else if (!rr.history.validate().ok()) {
        failure = "induced history invalid: " + rr.history.validate().detail;
      } else if (cfg.type == "topk") {
        for (const Dot& d : rr.topk_shipped) {
          if (!rr.topk_entered.count(d)) {
            failure = "shipped add " + to_string(d) + " never entered a top";
            break;
          }
        }
      }
    } catch (const std::exception& e) {
      failure = e.what();
    }
    ++sum.runs;
    if (!failure.empty()) {
      sum.ok = false;
      sum.failure = failure;
      sum.failing_seed = run_seed;
      sum.scenario_dump = sc.to_json_text();
      return sum;
    }
  }
  return sum;
}

}  // namespace crdt::sim
