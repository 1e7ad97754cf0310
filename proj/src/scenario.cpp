#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "crdt/simulator.hpp"
#include "json.hpp"

namespace crdt::sim {

using nlohmann::json;

std::string to_string(SyncModel m) {
  switch (m) {
    case SyncModel::State: return "state";
    case SyncModel::Op: return "op";
    case SyncModel::Delta: return "delta";
  }
  return "?";
}

std::optional<SyncModel> parse_sync_model(const std::string& s) {
  if (s == "state") return SyncModel::State;
  if (s == "op") return SyncModel::Op;
  if (s == "delta") return SyncModel::Delta;
  return std::nullopt;
}

std::vector<std::pair<std::string, SyncModel>> supported_pairs() {
  return {
      {"gcounter", SyncModel::State},  {"pncounter", SyncModel::State},
      {"lwwreg", SyncModel::State},    {"mvreg", SyncModel::State},
      {"awset", SyncModel::State},     {"rwset", SyncModel::State},
      {"lwwset", SyncModel::State},    {"bcounter", SyncModel::State},
      {"topk", SyncModel::State},      {"counter", SyncModel::Op},
      {"awset", SyncModel::Op},        {"wwcounter", SyncModel::Op},
      {"gcounter", SyncModel::Delta},  {"pncounter", SyncModel::Delta},
      {"awset", SyncModel::Delta},     {"mvreg", SyncModel::Delta},
  };
}

namespace {

const char* kInitReplicaName = "~init";

bool type_supported(const std::string& type, SyncModel model) {
  if (type == "gcounter-broken-min") return model == SyncModel::State;
  for (const auto& [t, m] : supported_pairs()) {
    if (t == type && m == model) return true;
  }
  return false;
}

/// Update operations each type accepts.
std::set<std::string> ops_for(const std::string& type) {
  if (type == "gcounter" || type == "gcounter-broken-min") return {"inc"};
  if (type == "pncounter" || type == "counter") return {"inc", "dec"};
  if (type == "wwcounter") return {"inc", "dec", "wr"};
  if (type == "lwwreg" || type == "mvreg") return {"wr"};
  if (type == "awset" || type == "rwset" || type == "lwwset") {
    return {"add", "rmv"};
  }
  if (type == "bcounter") return {"inc", "dec", "transfer"};
  if (type == "topk") return {"add", "rmv"};
  return {};
}

std::set<std::string> initial_ops_for(const std::string& type) {
  if (type == "awset" || type == "rwset" || type == "lwwset") return {"add"};
  if (type == "lwwreg" || type == "mvreg") return {"wr"};
  if (type == "gcounter" || type == "gcounter-broken-min" ||
      type == "pncounter" || type == "counter") {
    return {"inc"};
  }
  return {};
}

}  // namespace

void Scenario::validate() const {
  if (replicas.empty()) throw ScenarioError("no replicas declared");
  std::set<ReplicaId> declared;
  for (const ReplicaId& r : replicas) {
    if (r.empty() || r == kInitReplicaName) {
      throw ScenarioError("invalid replica id '" + r + "'");
    }
    if (!declared.insert(r).second) {
      throw ScenarioError("duplicate replica id '" + r + "'");
    }
  }
  if (!type_supported(crdt.type, model)) {
    throw ScenarioError("type '" + crdt.type + "' is not supported under " +
                        to_string(model) + " synchronization");
  }
  if (crdt.type == "topk" && crdt.k == 0) {
    throw ScenarioError("topk requires k >= 1");
  }
  if (crdt.type == "bcounter") {
    int64_t total = 0;
    for (const auto& [r, n] : crdt.allocation) {
      if (!declared.count(r)) {
        throw ScenarioError("allocation names unknown replica '" + r + "'");
      }
      if (n < 0) throw ScenarioError("negative allocation for '" + r + "'");
      total += n;
    }
    if (total != crdt.initial) {
      throw ScenarioError("allocation sums to " + std::to_string(total) +
                          ", expected " + std::to_string(crdt.initial));
    }
  }
  std::set<std::string> allowed = ops_for(crdt.type);
  std::set<std::string> init_allowed = initial_ops_for(crdt.type);
  for (const UpdateOp& op : initial) {
    if (!init_allowed.count(op.op)) {
      throw ScenarioError("initial op '" + op.op + "' not allowed for " +
                          crdt.type);
    }
  }
  for (const Step& st : script) {
    switch (st.kind) {
      case Step::Kind::Update: {
        if (!declared.count(st.at)) {
          throw ScenarioError("step references unknown replica '" + st.at +
                              "'");
        }
        if (st.op.op == "read") break;
        if (!allowed.count(st.op.op)) {
          throw ScenarioError("op '" + st.op.op + "' not allowed for " +
                              crdt.type);
        }
        if ((st.op.op == "inc" || st.op.op == "dec") && st.op.amount < 1) {
          throw ScenarioError("inc/dec amount must be >= 1");
        }
        if (st.op.op == "transfer") {
          if (!declared.count(st.op.to)) {
            throw ScenarioError("transfer targets unknown replica '" +
                                st.op.to + "'");
          }
          if (st.op.amount < 0) throw ScenarioError("negative transfer");
        }
        break;
      }
      case Step::Kind::SyncPair:
        if (!declared.count(st.from) || !declared.count(st.to)) {
          throw ScenarioError("sync references unknown replica");
        }
        if (st.from == st.to) throw ScenarioError("sync from == to");
        break;
      case Step::Kind::SyncFull:
        break;
      case Step::Kind::Net:
        if (st.net.drop_ppm > 1000000 || st.net.dup_ppm > 1000000) {
          throw ScenarioError("net rates must be within [0,1]");
        }
        break;
    }
  }
}

bool Scenario::ends_with_full_sync() const {
  for (auto it = script.rbegin(); it != script.rend(); ++it) {
    if (it->kind == Step::Kind::SyncFull) return true;
    if (it->kind == Step::Kind::Update && it->op.op == "read") continue;
    return false;  // something other than reads after the last full sync
  }
  return false;
}

namespace {

uint32_t rate_to_ppm(const json& v, const char* what) {
  double d = v.get<double>();
  if (d < 0.0 || d > 1.0) {
    throw ScenarioError(std::string(what) + " must be within [0,1]");
  }
  return static_cast<uint32_t>(d * 1000000.0 + 0.5);
}

UpdateOp parse_update(const json& j) {
  UpdateOp op;
  if (!j.contains("op")) throw ScenarioError("update step lacks 'op'");
  op.op = j.at("op").get<std::string>();
  if (j.contains("elem")) op.elem = j.at("elem").get<std::string>();
  if (j.contains("value")) {
    const json& v = j.at("value");
    if (v.is_string()) {
      op.value = v.get<std::string>();
    } else if (v.is_number_integer()) {
      op.amount = v.get<int64_t>();
      op.value = std::to_string(op.amount);
    } else {
      throw ScenarioError("'value' must be a string or integer");
    }
  }
  if (j.contains("amount")) op.amount = j.at("amount").get<int64_t>();
  if (j.contains("score")) op.score = j.at("score").get<int64_t>();
  if (j.contains("to")) op.to = j.at("to").get<std::string>();
  return op;
}

json update_to_json(const UpdateOp& op, const std::string& type) {
  json j;
  j["op"] = op.op;
  if (!op.elem.empty()) j["elem"] = op.elem;
  if (op.op == "wr") {
    if (type == "wwcounter") {
      j["value"] = op.amount;
    } else {
      j["value"] = op.value;
    }
  }
  if (op.op == "inc" || op.op == "dec" || op.op == "transfer") {
    j["amount"] = op.amount;
  }
  if (op.op == "add" && type == "topk") j["score"] = op.score;
  if (!op.to.empty()) j["to"] = op.to;
  return j;
}

}  // namespace

Scenario Scenario::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ScenarioError(std::string("invalid JSON: ") + e.what());
  }
  try {
    Scenario sc;
    if (j.contains("seed")) sc.seed = j.at("seed").get<uint64_t>();
    const json& c = j.at("crdt");
    sc.crdt.type = c.at("type").get<std::string>();
    if (c.contains("k")) sc.crdt.k = c.at("k").get<uint64_t>();
    if (c.contains("initial")) sc.crdt.initial = c.at("initial").get<int64_t>();
    if (c.contains("allocation")) {
      for (const auto& [r, n] : c.at("allocation").items()) {
        sc.crdt.allocation[r] = n.get<int64_t>();
      }
    }
    std::string model = j.at("sync_model").get<std::string>();
    auto m = parse_sync_model(model);
    if (!m) throw ScenarioError("unknown sync_model '" + model + "'");
    sc.model = *m;
    for (const json& r : j.at("replicas")) {
      sc.replicas.push_back(r.get<std::string>());
    }
    if (j.contains("initial")) {
      for (const json& u : j.at("initial")) {
        sc.initial.push_back(parse_update(u));
      }
    }
    for (const json& s : j.at("script")) {
      Step st;
      if (s.contains("at")) {
        st.kind = Step::Kind::Update;
        st.at = s.at("at").get<std::string>();
        st.op = parse_update(s.at("do"));
      } else if (s.contains("sync")) {
        const json& sync = s.at("sync");
        if (sync.is_string() && sync.get<std::string>() == "full") {
          st.kind = Step::Kind::SyncFull;
        } else if (sync.is_object()) {
          st.kind = Step::Kind::SyncPair;
          st.from = sync.at("from").get<std::string>();
          st.to = sync.at("to").get<std::string>();
        } else {
          throw ScenarioError("'sync' must be \"full\" or {from,to}");
        }
      } else if (s.contains("net")) {
        st.kind = Step::Kind::Net;
        const json& net = s.at("net");
        if (net.contains("drop")) {
          st.net.drop_ppm = rate_to_ppm(net.at("drop"), "drop");
        }
        if (net.contains("dup")) {
          st.net.dup_ppm = rate_to_ppm(net.at("dup"), "dup");
        }
        if (net.contains("reorder")) {
          st.net.reorder = net.at("reorder").get<uint32_t>();
        }
      } else {
        throw ScenarioError("step must contain 'at', 'sync' or 'net'");
      }
      sc.script.push_back(std::move(st));
    }
    sc.validate();
    return sc;
  } catch (const json::exception& e) {
    throw ScenarioError(std::string("malformed scenario: ") + e.what());
  }
}

Scenario Scenario::load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError("cannot open scenario file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

std::string Scenario::to_json_text() const {
  json j;
  j["seed"] = seed;
  json c;
  c["type"] = crdt.type;
  if (crdt.type == "topk") c["k"] = crdt.k;
  if (crdt.type == "bcounter") {
    c["initial"] = crdt.initial;
    json alloc;
    for (const auto& [r, n] : crdt.allocation) alloc[r] = n;
    c["allocation"] = alloc;
  }
  j["crdt"] = c;
  j["sync_model"] = to_string(model);
  j["replicas"] = replicas;
  if (!initial.empty()) {
    json init = json::array();
    for (const UpdateOp& u : initial) init.push_back(update_to_json(u, crdt.type));
    j["initial"] = init;
  }
  json script_j = json::array();
  for (const Step& st : script) {
    json s;
    switch (st.kind) {
      case Step::Kind::Update:
        s["at"] = st.at;
        s["do"] = update_to_json(st.op, crdt.type);
        break;
      case Step::Kind::SyncPair:
        s["sync"] = {{"from", st.from}, {"to", st.to}};
        break;
      case Step::Kind::SyncFull:
        s["sync"] = "full";
        break;
      case Step::Kind::Net:
        s["net"] = {{"drop", st.net.drop_ppm / 1000000.0},
                    {"dup", st.net.dup_ppm / 1000000.0},
                    {"reorder", st.net.reorder}};
        break;
    }
    script_j.push_back(std::move(s));
  }
  j["script"] = script_j;
  return j.dump(2);
}

void Trace::emit(uint64_t tick, const std::string& kind,
                 const std::string& fields) {
  std::string line = std::to_string(tick);
  line += '\t';
  line += kind;
  if (!fields.empty()) {
    line += '\t';
    line += fields;
  }
  lines.push_back(std::move(line));
}

std::string Trace::text() const {
  std::string out;
  for (const std::string& l : lines) {
    out += l;
    out += '\n';
  }
  return out;
}

}  // namespace crdt::sim
