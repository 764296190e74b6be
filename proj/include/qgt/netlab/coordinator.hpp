// Copyright 2026 The qgt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Session coordinator.  Single-threaded: it owns the backplane, relays
// classical messages between the nodes and enforces ownership and the
// measurement barriers.  The message log is flushed one trial at a time in
// a canonical order, so it is byte-identical across runs with equal seeds.

#pragma once

#include <poll.h>

#include <array>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qgt/log.hpp"
#include "qgt/netlab/backplane.hpp"
#include "qgt/netlab/node.hpp"
#include "qgt/netlab/transport.hpp"
#include "qgt/tomography.hpp"

namespace qgt::netlab {

struct SessionConfig {
  protocol::InputSpec input = protocol::InputSpec::named("+", "0");
  protocol::Link link{};
  protocol::Mode mode = protocol::Mode::Corrected;
  std::uint64_t seed = 1;
  std::uint64_t trials = 1000;
  std::string readout = "tomography";
  std::string log_path;  // optional; written trial by trial

  /// What nodes are told.  No quantum data.
  json node_config() const { return {{"mode", protocol::to_string(mode)}, {"readout", readout}, {"trials", trials}}; }
};

/// One line of the outcome stream; shared by the netlab and in-process runs.
inline std::string outcome_line(std::uint64_t t, const std::string& plan, const protocol::ShotRecord& s) {
  const auto [b1, b4] = readout_bases(plan, t);
  json j = to_json(s);
  j["trial"] = t;
  j["bases"] = {to_string(b1), to_string(b4)};
  return j.dump();
}

struct SessionResult {
  std::string status = "completed";  // or "aborted"
  std::string reason;
  std::string error_code;
  std::uint64_t requested = 0;
  std::uint64_t completed = 0;
  std::vector<protocol::ShotRecord> shots;
  std::vector<std::string> outcome_lines;
  std::vector<std::string> log;
  tomography::StateCounts counts{};

  bool ok() const { return status == "completed"; }

  std::string log_text() const {
    std::string s;
    for (const auto& l : log) s += l + "\n";
    return s;
  }

  json manifest() const {
    json j = {{"status", status}, {"requested_trials", requested}, {"completed_trials", completed}};
    if (!ok()) {
      j["reason"] = reason;
      j["error_code"] = error_code;
      j["aborted_trial"] = completed;
    }
    return j;
  }
};

class Coordinator {
 public:
  Coordinator(SessionConfig cfg, Listener listener)
      : cfg_(std::move(cfg)), listener_(std::move(listener)), backplane_(cfg_.input, cfg_.link, cfg_.mode, cfg_.seed) {}

  int port() const { return listener_.port(); }

  SessionResult run() {
    SessionResult res;
    res.requested = cfg_.trials;
    std::optional<std::ofstream> file;
    if (!cfg_.log_path.empty()) file.emplace(cfg_.log_path, std::ios::trunc);
    auto flush = [&](const std::vector<std::string>& lines) {
      for (const auto& l : lines) {
        res.log.push_back(l);
        if (file) *file << l << '\n';
      }
      if (file) file->flush();
    };
    try {
      handshake(flush);
      for (std::uint64_t t = 0; t < cfg_.trials; ++t) {
        const auto shot = run_trial(t, flush);
        res.shots.push_back(shot);
        res.outcome_lines.push_back(outcome_line(t, cfg_.readout, shot));
        auto& table = res.counts[static_cast<std::size_t>(readout_setting(cfg_.readout, t).index())];
        if (shot.kept)
          table.n[static_cast<std::size_t>(shot.outcome_index())] += 1;
        else
          table.discarded += 1;
        res.completed = t + 1;
      }
      WireMessage bye = control(MessageType::Shutdown, cfg_.trials, json::object());
      flush({entry("C->*", bye)});
      for (auto& c : conns_) c.send(bye);
    } catch (const ProtocolError& e) {
      res.status = "aborted";
      res.reason = e.what();
      res.error_code = e.code();
      log::error(std::string("netlab session aborted: ") + e.what());
      WireMessage err = control(MessageType::Error, res.completed, {{"code", e.code()}, {"message", e.what()}});
      for (auto& c : conns_) {
        try {
          if (c.open()) c.send(err);
        } catch (const ProtocolError&) {
        }
      }
    }
    for (auto& c : conns_) c.close();
    return res;
  }

 private:
  using Flush = std::function<void(const std::vector<std::string>&)>;

  static std::size_t idx(Role r) { return r == Role::A ? 0 : 1; }

  static WireMessage control(MessageType type, std::uint64_t t, json payload) {
    WireMessage m;
    m.type = type;
    m.trial_id = t;
    m.from = "C";
    m.payload = std::move(payload);
    return m;
  }

  static std::string entry(const std::string& dir, const WireMessage& m) { return json{{"dir", dir}, {"msg", m.to_json()}}.dump(); }

  void handshake(const Flush& flush) {
    std::array<std::optional<Connection>, 2> slots;
    for (int k = 0; k < 2; ++k) {
      auto c = listener_.accept();
      auto hello = c.receive();
      if (!hello || hello->type != MessageType::Hello) throw ProtocolError("ordering", "expected HELLO from a new node");
      Role r;
      try {
        r = parse_role(hello->payload.value("role", std::string()));
      } catch (const std::exception&) {
        throw ProtocolError("malformed", "HELLO carries no valid role");
      }
      if (slots[idx(r)]) throw ProtocolError("permission", std::string("second node claims role ") + to_string(r));
      slots[idx(r)] = std::move(c);
    }
    conns_[0] = std::move(*slots[0]);
    conns_[1] = std::move(*slots[1]);
    std::vector<std::string> lines;
    for (Role r : {Role::A, Role::B}) {
      WireMessage hello = control(MessageType::Hello, 0, {{"role", to_string(r)}});
      hello.from = to_string(r);
      lines.push_back(entry(std::string(to_string(r)) + "->C", hello));
    }
    for (Role r : {Role::A, Role::B}) {
      const auto cfg = control(MessageType::Config, 0, cfg_.node_config());
      conns_[idx(r)].send(cfg);
      lines.push_back(entry(std::string("C->") + to_string(r), cfg));
    }
    flush(lines);
  }

  // Log groups of one trial, in flush order.
  enum Group { kStart, kFromA, kFromB, kToA, kToB, kEnd, kGroups };

  protocol::ShotRecord run_trial(std::uint64_t t, const Flush& flush) {
    std::array<std::vector<std::string>, kGroups> groups;
    backplane_.begin_trial(t);
    const auto epr = control(MessageType::EprReady, t, json::object());
    groups[kStart].push_back(entry("C->*", epr));
    for (auto& c : conns_) c.send(epr);

    std::optional<protocol::ShotRecord> shot;
    while (!shot) {
      std::array<pollfd, 2> fds{pollfd{conns_[0].fd(), POLLIN, 0}, pollfd{conns_[1].fd(), POLLIN, 0}};
      const int r = ::poll(fds.data(), 2, 60000);
      if (r < 0 && errno == EINTR) continue;
      if (r < 0) throw transport_error("poll failed");
      if (r == 0) throw ProtocolError("transport", "timed out waiting for node traffic");
      for (Role role : {Role::A, Role::B}) {
        const auto k = idx(role);
        if (!(fds[k].revents & (POLLIN | POLLHUP | POLLERR))) continue;
        if (!conns_[k].fill()) throw ProtocolError("transport", std::string("node ") + to_string(role) + " disconnected");
        while (!shot) {
          auto m = conns_[k].pop();
          if (!m) break;
          shot = handle(role, *m, t, groups);
        }
      }
    }
    json payload = {{"kept", shot->kept}, {"setting", readout_setting(cfg_.readout, t).id()}};
    payload["outcome"] = shot->kept ? json(shot->outcome_index()) : json(nullptr);
    const auto done = control(MessageType::TrialResult, t, payload);
    groups[kEnd].push_back(entry("C->*", done));
    for (auto& c : conns_) c.send(done);

    std::vector<std::string> lines;
    for (const auto& g : groups) lines.insert(lines.end(), g.begin(), g.end());
    flush(lines);
    return *shot;
  }

  std::optional<protocol::ShotRecord> handle(Role role, const WireMessage& m, std::uint64_t t,
                                             std::array<std::vector<std::string>, kGroups>& groups) {
    const std::string me = to_string(role);
    const std::string other = to_string(peer(role));
    if (m.from != me) throw ProtocolError("permission", "node " + me + " sent a message labelled from '" + m.from + "'");
    if (m.trial_id != t) throw ProtocolError("ordering", "node " + me + " sent trial " + std::to_string(m.trial_id) + " during trial " + std::to_string(t));
    auto& sent = groups[role == Role::A ? kFromA : kFromB];
    switch (m.type) {
      case MessageType::OpRequest: {
        sent.push_back(entry(me + "->C", m));
        for (const auto& resp : backplane_.request(role, m.payload)) {
          const auto out = control(MessageType::OpResult, t, resp.payload);
          groups[resp.to == Role::A ? kToA : kToB].push_back(entry(std::string("C->") + to_string(resp.to), out));
          conns_[idx(resp.to)].send(out);
        }
        if (backplane_.complete()) return backplane_.finish();
        return std::nullopt;
      }
      case MessageType::MeasOutcome: {
        const auto q = m.payload.at("qubit").get<QubitLabel>();
        if (!owns(role, q) || (q != 2 && q != 3)) throw ProtocolError("permission", "node " + me + " reported an outcome for qubit " + std::to_string(q));
        const auto bit = backplane_.bell_bit(q);
        if (!bit) throw ProtocolError("ordering", "outcome reported before the measurement");
        const Basis b = parse_basis(m.payload.at("basis").get<std::string>());
        if (parse_outcome_symbol(b, m.payload.at("result").get<std::string>()) != *bit)
          throw ProtocolError("malformed", "node " + me + " relayed an outcome that differs from its measurement");
        if (backplane_.relayed(role)) throw ProtocolError("ordering", "duplicate MEAS_OUTCOME from node " + me);
        sent.push_back(entry(me + "->" + other, m));
        conns_[idx(peer(role))].send(m);
        backplane_.note_relayed(role);
        return std::nullopt;
      }
      case MessageType::CorrectionApplied:
        sent.push_back(entry(me + "->" + other, m));
        conns_[idx(peer(role))].send(m);
        return std::nullopt;
      default:
        throw ProtocolError("malformed", std::string("node ") + me + " sent unexpected " + to_string(m.type));
    }
  }

  SessionConfig cfg_;
  Listener listener_;
  Backplane backplane_;
  std::array<Connection, 2> conns_;
};

// ---------------------------------------------------------------------------
// Log audit

struct AuditReport {
  bool ok = true;
  std::vector<std::string> violations;
  std::uint64_t trials = 0;
  std::map<std::string, std::uint64_t> totals;

  void fail(std::string what) {
    ok = false;
    if (violations.size() < 20) violations.push_back(std::move(what));
  }
};

namespace detail {

inline bool contains_key(const json& j, const std::vector<std::string>& keys) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      for (const auto& k : keys)
        if (it.key() == k) return true;
      if (contains_key(it.value(), keys)) return true;
    }
  } else if (j.is_array()) {
    for (const auto& v : j)
      if (contains_key(v, keys)) return true;
  }
  return false;
}

}  // namespace detail

/// Per-trial message counts and locality of every logged exchange.
inline AuditReport audit_log(const std::vector<std::string>& lines) {
  static const std::vector<std::string> quantum_keys = {"amplitudes", "state", "rho", "density", "matrix", "probability", "branch_probability"};
  AuditReport rep;
  std::map<std::uint64_t, std::map<std::string, int>> per_trial;
  std::map<std::uint64_t, std::array<int, 2>> outcomes_from;
  std::optional<std::uint64_t> last_epr;
  std::uint64_t last_trial = 0;
  for (const auto& line : lines) {
    const json e = json::parse(line);
    const auto dir = e.at("dir").get<std::string>();
    const auto& msg = e.at("msg");
    const auto type = msg.at("type").get<std::string>();
    const auto t = msg.at("trial_id").get<std::uint64_t>();
    rep.totals[type] += 1;
    if (t < last_trial) rep.fail("trial id decreases at " + type + " of trial " + std::to_string(t));
    last_trial = t;
    const bool between_nodes = dir == "A->B" || dir == "B->A";
    if (between_nodes && type != "MEAS_OUTCOME" && type != "CORRECTION_APPLIED")
      rep.fail("non-classical-outcome message " + type + " between nodes");
    if (dir.rfind("C->", 0) == 0 && detail::contains_key(msg.at("payload"), quantum_keys))
      rep.fail("coordinator sent quantum data in " + type + " of trial " + std::to_string(t));
    if (type == "OP_RESULT" || type == "OP_REQUEST") {
      const Role r = parse_role(type == "OP_RESULT" ? dir.substr(3) : dir.substr(0, 1));
      const auto& p = msg.at("payload");
      std::vector<QubitLabel> qs;
      if (p.contains("qubit")) qs.push_back(p.at("qubit").get<QubitLabel>());
      if (p.contains("qubits"))
        for (const auto& q : p.at("qubits")) qs.push_back(q.get<QubitLabel>());
      for (auto q : qs)
        if (!owns(r, q)) rep.fail(type + " touches qubit " + std::to_string(q) + " not owned by " + to_string(r));
    }
    if (type == "SHUTDOWN" || type == "HELLO" || type == "CONFIG") continue;
    per_trial[t][type] += 1;
    if (type == "EPR_READY") {
      if (last_epr && t <= *last_epr) rep.fail("EPR_READY trial ids not strictly increasing");
      last_epr = t;
    }
    if (type == "MEAS_OUTCOME") outcomes_from[t][dir[0] == 'A' ? 0 : 1] += 1;
  }
  for (const auto& [t, c] : per_trial) {
    auto get = [&](const char* k) {
      const auto it = c.find(k);
      return it == c.end() ? 0 : it->second;
    };
    const auto& from = outcomes_from[t];
    if (get("EPR_READY") != 1 || get("MEAS_OUTCOME") != 2 || from[0] != 1 || from[1] != 1 || get("CORRECTION_APPLIED") > 2 ||
        get("TRIAL_RESULT") != 1)
      rep.fail("message counts of trial " + std::to_string(t) + " break the per-trial budget");
  }
  rep.trials = per_trial.size();
  return rep;
}

}  // namespace qgt::netlab
