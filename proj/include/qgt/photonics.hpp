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

// Linear-optical chip components as mode transformations.
//
// Each photon carries two path-encoded qubits on four waveguide modes:
// mode m holds |b_first b_second> with m = 2*b_first + b_second.  Photon A
// carries qubits (1, 2), photon B carries qubits (3, 4), so the joint
// two-photon amplitude at (mode_a, mode_b) is register index 4*mode_a + mode_b.
//
// Elements are lossless; insertion loss belongs to the channel model.

#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "qgt/json_io.hpp"
#include "qgt/qcore.hpp"

namespace qgt::photonics {

using Vector4 = Eigen::Vector4cd;
using Matrix4 = Eigen::Matrix4cd;

inline constexpr int kModes = 4;

enum class Photon { A, B };

inline Labels qubits_of(Photon p) { return p == Photon::A ? Labels{1, 2} : Labels{3, 4}; }
inline const char* to_string(Photon p) { return p == Photon::A ? "A" : "B"; }

class PathRegister {
 public:
  PathRegister(Vector4 modes, Photon photon) : modes_(std::move(modes)), photon_(photon) {
    if (std::abs(modes_.norm() - 1.0) > kExactTol) throw std::invalid_argument("path register is not normalized");
  }

  static PathRegister single_mode(int mode, Photon photon) {
    if (mode < 0 || mode >= kModes) throw std::out_of_range("mode index out of range");
    Vector4 v = Vector4::Zero();
    v(mode) = 1.0;
    return {v, photon};
  }

  /// The fixed mode<->ket bijection makes this a plain relabelling.
  static PathRegister from_state(const PureState& two_qubits, Photon photon) {
    if (two_qubits.labels() != qubits_of(photon)) throw std::invalid_argument("state labels do not match the photon's qubits");
    return {Vector4(two_qubits.amplitudes()), photon};
  }

  PureState to_state() const { return {Vector(modes_), qubits_of(photon_)}; }

  const Vector4& modes() const { return modes_; }
  Photon photon() const { return photon_; }

 private:
  Vector4 modes_;
  Photon photon_;
};

inline Matrix2 mmi_unitary() {
  Matrix2 m;
  m << 1, kI, kI, 1;
  return m * kInvSqrt2;
}

inline Matrix2 phase_matrix(double theta) {
  Matrix2 m = Matrix2::Identity();
  m(0, 0) = std::polar(1.0, theta);
  return m;
}

/// Balanced MZI: MMI, internal phase theta, MMI, then external phase phi on
/// the first output arm.  Column 0 (light entering the first arm) is
/// (e^{i phi} (e^{i theta} - 1) / 2, i (1 + e^{i theta}) / 2).
inline Matrix2 mzi_unitary(double theta, double phi) {
  return phase_matrix(phi) * mmi_unitary() * phase_matrix(theta) * mmi_unitary();
}

inline Matrix2 crosser_matrix() {
  Matrix2 m;
  m << 0, 1, 1, 0;
  return m;
}

enum class ElementKind { MMI, PhaseShifter, Crosser, PBRC, MZI };

inline const char* to_string(ElementKind k) {
  switch (k) {
    case ElementKind::MMI: return "MMI";
    case ElementKind::PhaseShifter: return "PS";
    case ElementKind::Crosser: return "Crosser";
    case ElementKind::PBRC: return "PBRC";
    case ElementKind::MZI: return "MZI";
  }
  return "?";
}

inline ElementKind parse_element_kind(const std::string& s) {
  if (s == "MMI") return ElementKind::MMI;
  if (s == "PS" || s == "PhaseShifter") return ElementKind::PhaseShifter;
  if (s == "Crosser") return ElementKind::Crosser;
  if (s == "PBRC") return ElementKind::PBRC;
  if (s == "MZI") return ElementKind::MZI;
  throw std::invalid_argument("unknown circuit element kind '" + s + "'");
}

/// One component acting on a pair of modes.  A phase shifter acts on
/// `modes[0]` only and stores the same index twice.
struct CircuitElement {
  ElementKind kind;
  std::vector<double> params;
  std::array<int, 2> modes;

  static CircuitElement mmi(int a, int b) { return {ElementKind::MMI, {}, {a, b}}; }
  static CircuitElement phase(int mode, double theta) { return {ElementKind::PhaseShifter, {theta}, {mode, mode}}; }
  static CircuitElement crosser(int a, int b) { return {ElementKind::Crosser, {}, {a, b}}; }
  static CircuitElement pbrc(int a, int b) { return {ElementKind::PBRC, {}, {a, b}}; }
  static CircuitElement mzi(int a, int b, double theta, double phi) { return {ElementKind::MZI, {theta, phi}, {a, b}}; }

  void validate(int num_modes = kModes) const {
    for (int m : modes)
      if (m < 0 || m >= num_modes) throw std::out_of_range(std::string(to_string(kind)) + ": mode index out of range");
    const std::size_t want = kind == ElementKind::PhaseShifter ? 1 : kind == ElementKind::MZI ? 2 : 0;
    if (params.size() != want) throw std::invalid_argument(std::string(to_string(kind)) + ": wrong parameter count");
    if (kind == ElementKind::PhaseShifter ? modes[0] != modes[1] : modes[0] == modes[1])
      throw std::invalid_argument(std::string(to_string(kind)) + ": invalid mode pair");
    for (double p : params)
      if (!std::isfinite(p)) throw std::invalid_argument("non-finite phase");
  }

  /// 2x2 action on (modes[0], modes[1]).
  Matrix2 local_matrix() const {
    switch (kind) {
      case ElementKind::MMI: return mmi_unitary();
      case ElementKind::PhaseShifter: return phase_matrix(params.at(0));
      case ElementKind::Crosser: return crosser_matrix();
      case ElementKind::PBRC: return Matrix2::Identity();
      case ElementKind::MZI: return mzi_unitary(params.at(0), params.at(1));
    }
    throw std::logic_error("unreachable");
  }

  Matrix full_matrix(int num_modes = kModes) const {
    validate(num_modes);
    Matrix u = Matrix::Identity(num_modes, num_modes);
    const Matrix2 m = local_matrix();
    if (kind == ElementKind::PhaseShifter) {
      u(modes[0], modes[0]) = m(0, 0);
      return u;
    }
    u(modes[0], modes[0]) = m(0, 0);
    u(modes[0], modes[1]) = m(0, 1);
    u(modes[1], modes[0]) = m(1, 0);
    u(modes[1], modes[1]) = m(1, 1);
    return u;
  }
};

using Circuit = std::vector<CircuitElement>;

/// Elements apply in list order.
inline Matrix circuit_unitary(const Circuit& circuit, int num_modes = kModes) {
  Matrix u = Matrix::Identity(num_modes, num_modes);
  for (const auto& e : circuit) u = e.full_matrix(num_modes) * u;
  return u;
}

inline PathRegister propagate(const PathRegister& reg, const Circuit& circuit) {
  Vector4 out = reg.modes();
  for (const auto& e : circuit) {
    e.validate();
    const Matrix2 m = e.local_matrix();
    const int a = e.modes[0], b = e.modes[1];
    if (e.kind == ElementKind::PhaseShifter) {
      out(a) *= m(0, 0);
      continue;
    }
    const cplx xa = out(a), xb = out(b);
    out(a) = m(0, 0) * xa + m(0, 1) * xb;
    out(b) = m(1, 0) * xa + m(1, 1) * xb;
  }
  return {out, reg.photon()};
}

inline PathRegister crosser(const PathRegister& reg, int a, int b) {
  return propagate(reg, Circuit{CircuitElement::crosser(a, b)});
}

/// Crosser in the control's |1> paths: swaps modes |10> and |11>.
inline Circuit local_cnot_circuit() { return {CircuitElement::crosser(2, 3)}; }

inline PathRegister local_cnot_via_crosser(const PathRegister& reg) { return propagate(reg, local_cnot_circuit()); }

/// Basis conversion for the first qubit of photon B (qubit 3): interferes
/// |0>_3 with |1>_3 so that |+>_3 exits in the |0>_3 port group and |->_3 in
/// the |1>_3 group.  A crosser makes the interfering modes adjacent; the
/// phase shifters absorb the MMI's i factors, giving exactly H (x) I.
inline Circuit m3_network() {
  constexpr double q = std::numbers::pi / 2;
  return {
      CircuitElement::crosser(1, 2),
      CircuitElement::phase(1, -q),
      CircuitElement::phase(3, -q),
      CircuitElement::mmi(0, 1),
      CircuitElement::mmi(2, 3),
      CircuitElement::phase(1, -q),
      CircuitElement::phase(3, -q),
      CircuitElement::crosser(1, 2),
  };
}

inline PathRegister m3_basis_network(const PathRegister& reg) {
  if (reg.photon() != Photon::B) throw std::invalid_argument("the M3 network sits on photon B");
  return propagate(reg, m3_network());
}

struct MziPhases {
  double theta = std::numbers::pi;  // bar state
  double phi = 0.0;
  bool operator==(const MziPhases&) const = default;
};

/// MZI output for light entering the first arm.
inline Vector2 mzi_output(const MziPhases& p) { return mzi_unitary(p.theta, p.phi).col(0); }

/// Closed-form MZI setting whose output matches `target` up to global phase.
inline MziPhases mzi_settings_for(const Vector2& target) {
  const double n = target.norm();
  if (!(n > 0)) throw std::invalid_argument("target state is zero");
  const double a = std::abs(target(0)) / n, b = std::abs(target(1)) / n;
  MziPhases p;
  p.theta = 2.0 * std::atan2(a, b);
  p.phi = 0.0;
  if (a > 1e-15 && b > 1e-15) {
    p.phi = std::arg(target(0)) - std::arg(target(1));
    p.phi = std::fmod(p.phi, 2 * std::numbers::pi);
    if (p.phi < 0) p.phi += 2 * std::numbers::pi;
  }
  return p;
}

/// MZI phases of the 'State Preparation' region: entries 0 and 1 act on
/// photon A's mode pairs (0,2) and (1,3) and set qubit 1; entries 2 and 3 act
/// on photon B's pairs (0,1) and (2,3) and set qubit 4.
struct PreparationSettings {
  std::array<MziPhases, 4> mzis{};

  static PreparationSettings for_states(const Vector2& q1, const Vector2& q4) {
    const auto a = mzi_settings_for(q1), b = mzi_settings_for(q4);
    return {{a, a, b, b}};
  }
};

inline Circuit preparation_circuit(Photon photon, const PreparationSettings& s) {
  if (photon == Photon::A)
    return {CircuitElement::mzi(0, 2, s.mzis[0].theta, s.mzis[0].phi),
            CircuitElement::mzi(1, 3, s.mzis[1].theta, s.mzis[1].phi)};
  return {CircuitElement::mzi(0, 1, s.mzis[2].theta, s.mzis[2].phi),
          CircuitElement::mzi(2, 3, s.mzis[3].theta, s.mzis[3].phi)};
}

/// |phi>_1 (x) |phi>_4, labels (1, 4).  The two MZIs that set one qubit must
/// agree; otherwise the region realizes a controlled rotation, not a product
/// input.
inline PureState prepare_product_state(const PreparationSettings& s) {
  for (const auto& m : s.mzis) {
    if (!(m.theta >= 0 && m.theta < 2 * std::numbers::pi && m.phi >= 0 && m.phi < 2 * std::numbers::pi))
      throw std::invalid_argument("preparation phases must lie in [0, 2pi)");
  }
  if (!(s.mzis[0] == s.mzis[1]) || !(s.mzis[2] == s.mzis[3]))
    throw std::invalid_argument("preparation MZIs for one qubit disagree; input is not a product state");
  return tensor(PureState(mzi_output(s.mzis[0]), {1}), PureState(mzi_output(s.mzis[2]), {4}));
}

/// Analyzer ('State Measurement' region) for one qubit: maps the basis
/// eigenstate with outcome bit k onto the qubit's |k> path.
inline Matrix2 analyzer_matrix(Basis b) {
  switch (b) {
    case Basis::Z: return Matrix2::Identity();
    case Basis::X: return mzi_unitary(std::numbers::pi / 2, 0.0);
    case Basis::Y: {
      Matrix2 s_dag = Matrix2::Identity();
      s_dag(1, 1) = std::polar(1.0, -std::numbers::pi / 2);
      return mzi_unitary(std::numbers::pi / 2, 0.0) * s_dag;
    }
  }
  throw std::logic_error("unreachable");
}

/// Analyzer elements for `qubit` on its photon.  The qubit's two paths are
/// paired per value of the photon's other qubit.
inline Circuit analyzer_circuit(Photon photon, QubitLabel qubit, Basis b) {
  const auto q = qubits_of(photon);
  std::array<std::array<int, 2>, 2> pairs{};
  if (qubit == q[0])
    pairs = {{{0, 2}, {1, 3}}};
  else if (qubit == q[1])
    pairs = {{{0, 1}, {2, 3}}};
  else
    throw std::invalid_argument("qubit is not carried by this photon");
  Circuit c;
  for (const auto& pr : pairs) {
    if (b == Basis::Y) c.push_back(CircuitElement::phase(pr[1], -std::numbers::pi / 2));
    if (b != Basis::Z) c.push_back(CircuitElement::mzi(pr[0], pr[1], std::numbers::pi / 2, 0.0));
  }
  return c;
}

/// The four rank-1 projectors of the product eigenbasis for qubits (1, 4),
/// indexed by 2*bit1 + bit4.  Built from the analyzer optics: projector k is
/// A^dagger |k><k| A.
inline std::array<Matrix, 4> measurement_setting(Basis first, Basis second) {
  const Matrix2 a1 = analyzer_matrix(first), a4 = analyzer_matrix(second);
  const Matrix a = kron(a1, a4);
  std::array<Matrix, 4> out;
  for (int k = 0; k < 4; ++k) {
    Matrix pk = Matrix::Zero(4, 4);
    pk(k, k) = 1.0;
    out[static_cast<std::size_t>(k)] = a.adjoint() * pk * a;
  }
  return out;
}

inline std::array<Matrix, 4> measurement_setting(const std::string& first, const std::string& second) {
  return measurement_setting(parse_basis(first), parse_basis(second));
}

/// Chip A: qubit-1 preparation, local CNOT C12, qubit-1 analyzer.  Output
/// port m reads (qubit-1 outcome, qubit-2 value i).
inline Circuit chip_a_circuit(const PreparationSettings& prep, Basis analyzer) {
  Circuit c = preparation_circuit(Photon::A, prep);
  for (const auto& e : local_cnot_circuit()) c.push_back(e);
  for (const auto& e : analyzer_circuit(Photon::A, 1, analyzer)) c.push_back(e);
  return c;
}

/// Chip B: PBRC relabelling at the fiber interface, qubit-4 preparation, C34,
/// the M3 basis network and the qubit-4 analyzer.  Output port m reads
/// (qubit-3 X outcome j, qubit-4 outcome).
inline Circuit chip_b_circuit(const PreparationSettings& prep, Basis analyzer) {
  Circuit c = {CircuitElement::pbrc(0, 2), CircuitElement::pbrc(1, 3)};
  for (const auto& e : preparation_circuit(Photon::B, prep)) c.push_back(e);
  for (const auto& e : local_cnot_circuit()) c.push_back(e);
  for (const auto& e : m3_network()) c.push_back(e);
  for (const auto& e : analyzer_circuit(Photon::B, 4, analyzer)) c.push_back(e);
  return c;
}

inline json circuit_to_json(const Circuit& c) {
  json out = json::array();
  for (const auto& e : c) {
    json modes = e.kind == ElementKind::PhaseShifter ? json::array({e.modes[0]}) : json::array({e.modes[0], e.modes[1]});
    out.push_back({{"kind", to_string(e.kind)}, {"params", e.params}, {"modes", modes}});
  }
  return out;
}

inline Circuit circuit_from_json(const json& j) {
  if (!j.is_array()) throw std::invalid_argument("circuit description must be a JSON list");
  Circuit c;
  for (const auto& item : j) {
    CircuitElement e{parse_element_kind(item.at("kind").get<std::string>()),
                     item.value("params", std::vector<double>{}), {0, 0}};
    const auto modes = item.at("modes").get<std::vector<int>>();
    if (modes.size() == 1)
      e.modes = {modes[0], modes[0]};
    else if (modes.size() == 2)
      e.modes = {modes[0], modes[1]};
    else
      throw std::invalid_argument("element needs one or two modes");
    e.validate();
    c.push_back(std::move(e));
  }
  return c;
}

}  // namespace qgt::photonics
