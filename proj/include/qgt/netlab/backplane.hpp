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

// Shared simulation backplane.  Holds the joint register of the current
// trial and executes node operation requests on it.  Nodes only ever see
// measurement bits.
//
// Requests (OP_REQUEST payloads):
//   {"op":"CNOT","qubits":[c,t]}
//   {"op":"MEASURE","qubit":q,"basis":"Z"|"X"|"Y"}
//   {"op":"PAULI","qubit":q,"pauli":"I"|"X"|"Y"|"Z"}
// Measurements of qubits 2 and 3 are Bell-side and wait for both nodes;
// measurements of 1 and 4 are readouts and wait likewise.

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qgt/netlab/wire.hpp"
#include "qgt/protocol.hpp"

namespace qgt::netlab {

inline int parse_pauli(const std::string& s) {
  if (s == "I") return 0;
  if (s == "X") return 1;
  if (s == "Y") return 2;
  if (s == "Z") return 3;
  throw ProtocolError("malformed", "unknown Pauli '" + s + "'");
}

class Backplane {
 public:
  struct Response {
    Role to;
    json payload;
  };

  Backplane(protocol::InputSpec input, protocol::Link link, protocol::Mode mode, std::uint64_t seed)
      : input_(std::move(input)), link_(std::move(link)), mode_(mode), seed_(seed), streams_(protocol::TrialStreams::make(seed, 0)) {}

  void begin_trial(std::uint64_t t) {
    trial_ = t;
    streams_ = protocol::TrialStreams::make(seed_, t);
    state_ = protocol::emit_register(input_, link_, streams_);
    phase_ = Phase::Emitted;
    record_ = {};
    record_.outcome.mode = mode_;
    relayed_ = {false, false};
    bell_pending_ = {};
    readout_pending_ = {};
  }

  std::uint64_t trial() const { return trial_; }

  /// The peer of `from` may now apply corrections.
  void note_relayed(Role from) { relayed_[idx(from)] = true; }
  bool relayed(Role from) const { return relayed_[idx(from)]; }

  /// Bit recorded for a Bell-side qubit, for auditing relayed outcomes.
  std::optional<int> bell_bit(QubitLabel q) const {
    if (phase_ < Phase::BellMeasured) return std::nullopt;
    return q == 2 ? record_.outcome.i : record_.outcome.j;
  }

  bool complete() const { return phase_ == Phase::ReadOut; }

  std::vector<Response> request(Role who, const json& op) {
    if (phase_ == Phase::Idle) throw ProtocolError("ordering", "no trial in progress");
    const auto name = op.value("op", std::string());
    if (name == "CNOT") return cnot(who, op);
    if (name == "MEASURE") return measure(who, op);
    if (name == "PAULI") return pauli(who, op);
    throw ProtocolError("malformed", "unknown op '" + name + "'");
  }

  /// Loss draw and kept flag; ends the trial.
  protocol::ShotRecord finish() {
    if (phase_ != Phase::ReadOut) throw ProtocolError("ordering", "trial finished before both readouts");
    record_.detected = streams_.loss.uniform() < channel::survival_probability(link_.noise);
    record_.kept = record_.detected && !record_.outcome.discarded();
    phase_ = Phase::Idle;
    return record_;
  }

 private:
  enum class Phase { Idle, Emitted, BellMeasured, ReadOut };

  struct Pending {
    QubitLabel qubit = 0;
    Basis basis = Basis::Z;
  };

  static std::size_t idx(Role r) { return r == Role::A ? 0 : 1; }

  static QubitLabel qubit_of(const json& op) {
    if (!op.contains("qubit") || !op.at("qubit").is_number_integer()) throw ProtocolError("malformed", "op lacks an integer qubit");
    return op.at("qubit").get<QubitLabel>();
  }

  static void check_owner(Role who, QubitLabel q) {
    if (q < 1 || q > 4) throw ProtocolError("malformed", "qubit " + std::to_string(q) + " does not exist");
    if (!owns(who, q))
      throw ProtocolError("permission", std::string("node ") + to_string(who) + " does not own qubit " + std::to_string(q));
  }

  std::vector<Response> cnot(Role who, const json& op) {
    const auto qs = op.value("qubits", std::vector<QubitLabel>{});
    if (qs.size() != 2 || qs[0] == qs[1]) throw ProtocolError("malformed", "CNOT needs two distinct qubits");
    for (auto q : qs) check_owner(who, q);
    if (phase_ != Phase::Emitted) throw ProtocolError("ordering", "CNOT after the Bell-side measurement");
    state_ = apply_gate(state_, Operator::cnot(), {qs[0], qs[1]});
    return {{who, {{"op", "CNOT"}, {"qubits", qs}}}};
  }

  std::vector<Response> measure(Role who, const json& op) {
    const QubitLabel q = qubit_of(op);
    check_owner(who, q);
    Basis b;
    try {
      b = parse_basis(op.value("basis", std::string("Z")));
    } catch (const std::exception& e) {
      throw ProtocolError("malformed", e.what());
    }
    const bool bell_side = q == 2 || q == 3;
    if (bell_side) {
      if (phase_ != Phase::Emitted) throw ProtocolError("ordering", "Bell-side qubit measured twice");
      if (bell_pending_[idx(who)]) throw ProtocolError("ordering", "duplicate Bell-side measurement request");
      bell_pending_[idx(who)] = Pending{q, b};
      if (!bell_pending_[0] || !bell_pending_[1]) return {};
      return bell_barrier();
    }
    if (phase_ != Phase::BellMeasured) throw ProtocolError("ordering", "readout before the Bell-side measurement");
    if (readout_pending_[idx(who)]) throw ProtocolError("ordering", "duplicate readout request");
    readout_pending_[idx(who)] = Pending{q, b};
    if (!readout_pending_[0] || !readout_pending_[1]) return {};
    return readout_barrier();
  }

  // Qubit 2 is measured first, then qubit 3; both are then traced out.
  std::vector<Response> bell_barrier() {
    const Pending a = *bell_pending_[0];
    const Pending bq = *bell_pending_[1];
    const auto m2 = measure_qubit(state_, a.qubit, a.basis, streams_.m2);
    const auto m3 = measure_qubit(m2.collapsed, bq.qubit, bq.basis, streams_.m3);
    state_ = contract_qubit(contract_qubit(m3.collapsed, a.qubit, basis_vector(a.basis, m2.bit)), bq.qubit,
                            basis_vector(bq.basis, m3.bit));
    auto& rec = record_.outcome;
    rec.i = m2.bit;
    rec.j = m3.bit;
    rec.branch_probability = m2.probability * m3.probability;
    rec.post_selected = mode_ == protocol::Mode::PostSelected && protocol::branch_index(rec.i, rec.j) == protocol::kKeptBranch;
    phase_ = Phase::BellMeasured;
    return {{Role::A, result_payload(a, m2.bit)}, {Role::B, result_payload(bq, m3.bit)}};
  }

  std::vector<Response> readout_barrier() {
    const Pending a = *readout_pending_[0];
    const Pending bq = *readout_pending_[1];
    const auto r1 = measure_qubit(state_, a.qubit, a.basis, streams_.readout1);
    const auto r4 = measure_qubit(r1.collapsed, bq.qubit, bq.basis, streams_.readout4);
    record_.o1 = r1.bit;
    record_.o4 = r4.bit;
    phase_ = Phase::ReadOut;
    return {{Role::A, result_payload(a, r1.bit)}, {Role::B, result_payload(bq, r4.bit)}};
  }

  static json result_payload(const Pending& p, int bit) {
    return {{"op", "MEASURE"}, {"qubit", p.qubit}, {"basis", to_string(p.basis)}, {"result", outcome_symbol(p.basis, bit)}};
  }

  std::vector<Response> pauli(Role who, const json& op) {
    const QubitLabel q = qubit_of(op);
    check_owner(who, q);
    const int a = parse_pauli(op.value("pauli", std::string()));
    if (phase_ != Phase::BellMeasured || q == 2 || q == 3)
      throw ProtocolError("ordering", "correction outside the window between Bell-side measurement and readout");
    if (!relayed_[idx(peer(who))])
      throw ProtocolError("ordering", std::string("node ") + to_string(who) + " corrected before receiving the peer outcome");
    if (readout_pending_[idx(who)]) throw ProtocolError("ordering", "correction after readout request");
    state_ = apply_gate(state_, Operator::pauli_named(a), {q});
    (q == 1 ? record_.outcome.r1 : record_.outcome.r4) = protocol::pauli_name(a);
    return {{who, {{"op", "PAULI"}, {"qubit", q}, {"pauli", protocol::pauli_name(a)}}}};
  }

  protocol::InputSpec input_;
  protocol::Link link_;
  protocol::Mode mode_;
  std::uint64_t seed_;
  std::uint64_t trial_ = 0;
  protocol::TrialStreams streams_;
  PureState state_ = PureState::basis(0, {1});
  Phase phase_ = Phase::Idle;
  protocol::ShotRecord record_;
  std::array<bool, 2> relayed_{};
  std::array<std::optional<Pending>, 2> bell_pending_{};
  std::array<std::optional<Pending>, 2> readout_pending_{};
};

}  // namespace qgt::netlab
