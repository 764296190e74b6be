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

// Node agents.  Node A holds the control side (qubits 1, 2), node B the
// target side (qubits 3, 4).  Per trial each node runs its local CNOT,
// measures its Bell-side qubit, sends the bit to the peer, applies its
// correction once the peer bit has arrived and reads out its data qubit.

#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "qgt/log.hpp"
#include "qgt/netlab/transport.hpp"
#include "qgt/protocol.hpp"
#include "qgt/tomography.hpp"

namespace qgt::netlab {

/// Tomography setting read out in trial t: plan "tomography" cycles the 16
/// settings, otherwise the plan is a fixed setting id such as "0,+".
inline tomography::Setting readout_setting(const std::string& plan, std::uint64_t t) {
  if (plan == "tomography") return tomography::Setting::from_index(static_cast<int>(t % tomography::kSettings));
  for (int k = 0; k < tomography::kSettings; ++k) {
    const auto s = tomography::Setting::from_index(k);
    if (s.id() == plan) return s;
  }
  throw std::invalid_argument("unknown readout plan '" + plan + "'");
}

inline std::pair<Basis, Basis> readout_bases(const std::string& plan, std::uint64_t t) {
  const auto s = readout_setting(plan, t);
  return {s.first(), s.second()};
}

/// Fault injection and misbehaviour switches.
struct NodeBehavior {
  long fail_after = -1;           // drop the connection at EPR_READY of this trial
  bool eager_correction = false;  // request a correction right after the CNOT
  bool touch_peer_qubit = false;  // CNOT onto a qubit owned by the peer
  int latency_us = 0;             // sleep before every send
};

class NodeAgent {
 public:
  explicit NodeAgent(Role role, NodeBehavior behavior = {}) : role_(role), behavior_(behavior) {}

  Role role() const { return role_; }
  bool finished() const { return finished_; }
  bool crashed() const { return crashed_; }
  std::uint64_t completed() const { return completed_; }
  const std::vector<int>& readouts() const { return readouts_; }

  WireMessage hello() const { return message(MessageType::Hello, 0, {{"role", to_string(role_)}}); }

  std::vector<WireMessage> handle(const WireMessage& in) {
    switch (in.type) {
      case MessageType::Config:
        mode_ = protocol::parse_mode(in.payload.at("mode").get<std::string>());
        plan_ = in.payload.value("readout", std::string("tomography"));
        return {};
      case MessageType::EprReady: return on_epr(in.trial_id);
      case MessageType::OpResult: return on_result(in);
      case MessageType::MeasOutcome: {
        check_trial(in);
        const Basis b = parse_basis(in.payload.at("basis").get<std::string>());
        peer_bit_ = parse_outcome_symbol(b, in.payload.at("result").get<std::string>());
        return proceed();
      }
      case MessageType::CorrectionApplied: check_trial(in); return {};
      case MessageType::TrialResult:
        check_trial(in);
        ++completed_;
        return {};
      case MessageType::Shutdown: finished_ = true; return {};
      case MessageType::Error:
        throw ProtocolError(in.payload.value("code", std::string("remote")), in.payload.value("message", std::string()));
      default: throw ProtocolError("malformed", std::string("node received unexpected ") + to_string(in.type));
    }
  }

 private:
  QubitLabel data_qubit() const { return role_ == Role::A ? 1 : 4; }
  QubitLabel bell_qubit() const { return role_ == Role::A ? 2 : 3; }
  Basis bell_basis() const { return role_ == Role::A ? Basis::Z : Basis::X; }

  WireMessage message(MessageType type, std::uint64_t t, json payload) const {
    WireMessage m;
    m.type = type;
    m.trial_id = t;
    m.from = to_string(role_);
    m.payload = std::move(payload);
    return m;
  }

  WireMessage op(json payload) const { return message(MessageType::OpRequest, trial_, std::move(payload)); }

  void check_trial(const WireMessage& in) const {
    if (in.trial_id != trial_) throw ProtocolError("ordering", "message for trial " + std::to_string(in.trial_id) + " during trial " + std::to_string(trial_));
  }

  std::vector<WireMessage> on_epr(std::uint64_t t) {
    if (behavior_.fail_after >= 0 && t >= static_cast<std::uint64_t>(behavior_.fail_after)) {
      crashed_ = true;
      return {};
    }
    trial_ = t;
    own_bit_.reset();
    peer_bit_.reset();
    advanced_ = false;
    const auto mine = owned_qubits(role_);
    const QubitLabel target = behavior_.touch_peer_qubit ? owned_qubits(peer(role_))[0] : mine[1];
    std::vector<WireMessage> out{op({{"op", "CNOT"}, {"qubits", {mine[0], target}}})};
    if (behavior_.eager_correction) out.push_back(op({{"op", "PAULI"}, {"qubit", data_qubit()}, {"pauli", "Z"}}));
    return out;
  }

  std::vector<WireMessage> on_result(const WireMessage& in) {
    check_trial(in);
    const auto name = in.payload.at("op").get<std::string>();
    if (name == "CNOT") return {op({{"op", "MEASURE"}, {"qubit", bell_qubit()}, {"basis", to_string(bell_basis())}})};
    if (name == "PAULI") {
      auto out = std::vector<WireMessage>{message(MessageType::CorrectionApplied, trial_,
                                                  {{"qubit", data_qubit()}, {"op", in.payload.at("pauli")}})};
      out.push_back(readout());
      return out;
    }
    if (name != "MEASURE") throw ProtocolError("malformed", "unexpected OP_RESULT " + name);
    const QubitLabel q = in.payload.at("qubit").get<QubitLabel>();
    const Basis b = parse_basis(in.payload.at("basis").get<std::string>());
    const int bit = parse_outcome_symbol(b, in.payload.at("result").get<std::string>());
    if (q == data_qubit()) {
      readouts_.push_back(bit);
      return {};
    }
    own_bit_ = bit;
    std::vector<WireMessage> out{message(MessageType::MeasOutcome, trial_,
                                         {{"qubit", q}, {"basis", to_string(b)}, {"result", outcome_symbol(b, bit)}})};
    for (auto& m : proceed()) out.push_back(std::move(m));
    return out;
  }

  // Runs once both Bell-side bits are known.
  std::vector<WireMessage> proceed() {
    if (!own_bit_ || !peer_bit_ || advanced_) return {};
    advanced_ = true;
    if (mode_ == protocol::Mode::Corrected) {
      const int i = role_ == Role::A ? *own_bit_ : *peer_bit_;
      const int j = role_ == Role::A ? *peer_bit_ : *own_bit_;
      const auto c = protocol::correction_table()[static_cast<std::size_t>(protocol::branch_index(i, j))];
      const int mine = role_ == Role::A ? c.r1 : c.r4;
      if (mine != 0) return {op({{"op", "PAULI"}, {"qubit", data_qubit()}, {"pauli", protocol::pauli_name(mine)}})};
    }
    return {readout()};
  }

  WireMessage readout() const {
    const auto [b1, b4] = readout_bases(plan_, trial_);
    const Basis b = role_ == Role::A ? b1 : b4;
    return op({{"op", "MEASURE"}, {"qubit", data_qubit()}, {"basis", to_string(b)}});
  }

  Role role_;
  NodeBehavior behavior_;
  protocol::Mode mode_ = protocol::Mode::Corrected;
  std::string plan_ = "tomography";
  std::uint64_t trial_ = 0;
  std::uint64_t completed_ = 0;
  std::optional<int> own_bit_;
  std::optional<int> peer_bit_;
  bool advanced_ = false;
  bool finished_ = false;
  bool crashed_ = false;
  std::vector<int> readouts_;
};

struct NodeSummary {
  Role role = Role::A;
  std::uint64_t completed = 0;
  bool clean_shutdown = false;
  bool crashed = false;
  std::string error;
};

/// Connects to the coordinator and serves until SHUTDOWN, error or crash.
inline NodeSummary run_node(Role role, const std::string& host, int port, NodeBehavior behavior = {}) {
  NodeSummary summary;
  summary.role = role;
  NodeAgent agent(role, behavior);
  try {
    auto conn = connect_to(host, port);
    auto send = [&](const WireMessage& m) {
      if (behavior.latency_us > 0) std::this_thread::sleep_for(std::chrono::microseconds(behavior.latency_us));
      conn.send(m);
    };
    send(agent.hello());
    while (!agent.finished()) {
      auto in = conn.receive(60000);
      if (!in) throw ProtocolError("transport", "coordinator closed the connection");
      for (const auto& m : agent.handle(*in)) send(m);
      if (agent.crashed()) {
        log::warn(std::string("node ") + to_string(role) + ": injected failure at trial " + std::to_string(in->trial_id));
        conn.close();
        break;
      }
    }
    summary.clean_shutdown = agent.finished();
  } catch (const std::exception& e) {
    summary.error = e.what();
  }
  summary.completed = agent.completed();
  summary.crashed = agent.crashed();
  return summary;
}

}  // namespace qgt::netlab
