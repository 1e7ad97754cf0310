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
#include "crdt/oracle.hpp"

namespace crdt::sim {

/// Deterministic discrete-event replication harness. A scenario scripts
/// updates, pairwise sync sessions and network conditions across a set of
/// replicas under one synchronization model; the run records a trace, builds
/// the operation history the oracle evaluates, and the convergence check
/// compares every replica against that evaluation.

enum class SyncModel { State, Op, Delta };

std::string to_string(SyncModel m);
std::optional<SyncModel> parse_sync_model(const std::string& s);

struct CrdtSpec {
  std::string type;
  uint64_t k = 0;                            // topk
  int64_t initial = 0;                       // bcounter
  std::map<ReplicaId, int64_t> allocation;   // bcounter
};

struct UpdateOp {
  std::string op;  // add rmv wr inc dec transfer read
  std::string elem;
  std::string value;
  int64_t amount = 1;
  int64_t score = 0;
  ReplicaId to;  // transfer target
};

struct NetParams {
  uint32_t drop_ppm = 0;
  uint32_t dup_ppm = 0;
  uint32_t reorder = 0;  // max extra delivery delay in ticks
};

struct Step {
  enum class Kind { Update, SyncPair, SyncFull, Net };
  Kind kind = Kind::Update;
  ReplicaId at;  // Update
  UpdateOp op;   // Update
  ReplicaId from, to;  // SyncPair
  NetParams net;       // Net
};

struct ScenarioError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SimError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Scenario {
  uint64_t seed = 0;
  CrdtSpec crdt;
  SyncModel model = SyncModel::State;
  std::vector<ReplicaId> replicas;
  std::vector<UpdateOp> initial;  // applied at a synthetic replica before t=1
  std::vector<Step> script;

  void validate() const;  // throws ScenarioError
  bool ends_with_full_sync() const;

  static Scenario from_json_text(const std::string& text);
  static Scenario load_file(const std::string& path);
  std::string to_json_text() const;
};

struct Trace {
  std::vector<std::string> lines;

  void emit(uint64_t tick, const std::string& kind, const std::string& fields);
  std::string text() const;
};

struct ConvergenceReport {
  bool ok = true;
  std::string detail;
};

struct RunResult {
  std::map<ReplicaId, std::string> queries;  // canonical final query values
  std::map<ReplicaId, std::string> states;   // canonical state encodings
  Trace trace;
  oracle::History history;
  ConvergenceReport convergence;
  bool convergence_checked = false;

  uint64_t updates = 0;
  uint64_t messages_sent = 0;
  uint64_t delivered = 0;
  uint64_t dropped = 0;
  uint64_t duplicated = 0;
  uint64_t bytes = 0;

  // Op model, when commute checking is on.
  uint64_t concurrent_pairs = 0;
  std::vector<std::string> commute_failures;

  // TopK bookkeeping: add identities shipped in sync payloads vs. add
  // identities that ever entered some replica's top.
  std::set<Dot> topk_shipped;
  std::set<Dot> topk_entered;
};

struct RunOptions {
  bool check_commutes = false;
};

/// Executes the scenario. Throws ScenarioError for invalid input and
/// SimError when a middleware contract is broken mid-run.
RunResult run(const Scenario& sc, const RunOptions& opts = {});

/// The oracle's verdict for the scenario's semantics, rendered in the same
/// canonical form replica queries use.
std::string oracle_verdict(const Scenario& sc, const oracle::History& h);

/// ok iff all replicas report the same query value and that value equals the
/// oracle evaluation of the induced history. Requires a trailing full sync.
ConvergenceReport check_convergence(const Scenario& sc, const RunResult& r);

struct FuzzConfig {
  std::string type;
  SyncModel model = SyncModel::State;
  uint32_t replicas = 3;  // 2..4
  uint32_t ops = 30;      // max updates per run
  uint32_t runs = 1000;
  uint64_t seed = 1;
  bool check_commutes = true;
};

struct FuzzSummary {
  bool ok = true;
  uint64_t runs = 0;
  uint64_t updates = 0;
  uint64_t messages = 0;
  uint64_t dropped = 0;
  uint64_t duplicated = 0;
  uint64_t bytes = 0;
  std::string failure;
  uint64_t failing_seed = 0;
  std::string scenario_dump;
};

/// Random scenario with chaos enabled and a lossless full-sync tail.
Scenario generate_scenario(const FuzzConfig& cfg, uint64_t seed);

/// Runs `cfg.runs` generated scenarios; stops at the first convergence
/// failure and reports the reproducing seed plus the scenario itself.
FuzzSummary fuzz(const FuzzConfig& cfg);

/// Every (type, model) combination the harness supports.
std::vector<std::pair<std::string, SyncModel>> supported_pairs();

}  // namespace crdt::sim
