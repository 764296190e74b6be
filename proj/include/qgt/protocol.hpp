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

// CNOT gate teleportation between qubits 1 (chip A) and 4 (chip B).
//
// Register (1, 2, 3, 4); qubits 2 and 3 share |Phi+>.  The protocol applies
// C12 and C34, measures qubit 2 in Z (outcome i) and qubit 3 in X (outcome
// j, bit 0 = '+'), then either keeps only (0, +) or applies the Pauli
// corrections R1(i, j), R4(i, j).  Either way qubits 1 and 4 end in C14|in>.
//
// Two engines share these definitions: an exact density-matrix engine used
// for probabilities, and a per-trial pure-state trajectory driven by
// independent RNG substreams (used by the distributed runner too).

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <variant>

#include "qgt/channel.hpp"
#include "qgt/json_io.hpp"
#include "qgt/photonics.hpp"
#include "qgt/qcore.hpp"

namespace qgt::protocol {

enum class Mode { PostSelected, Corrected };

inline std::string to_string(Mode m) { return m == Mode::PostSelected ? "post_selected" : "corrected"; }

inline Mode parse_mode(const std::string& s) {
  if (s == "post_selected") return Mode::PostSelected;
  if (s == "corrected") return Mode::Corrected;
  throw std::invalid_argument("unknown mode '" + s + "' (expected post_selected or corrected)");
}

/// Branch index 2*i + j; j = 0 is the '+' outcome.
inline constexpr int branch_index(int i, int j) { return 2 * i + j; }
inline constexpr int kKeptBranch = 0;

// ---------------------------------------------------------------------------
// Corrections

/// Pauli indices (0 I, 1 X, 2 Y, 3 Z) for qubits 1 and 4.
struct Correction {
  int r1 = 0;
  int r4 = 0;
  bool operator==(const Correction&) const = default;
};

using CorrectionTable = std::array<Correction, 4>;

inline std::string pauli_name(int a) {
  static const char* names[] = {"I", "X", "Y", "Z"};
  return names[a];
}

/// C14 applied to the input: the target of every branch.
inline PureState ideal_output(const PureState& input14) { return apply_gate(input14, Operator::cnot(), {1, 4}); }

/// |a>_1 (x) pair_23 (x) |b>_4 in register order.
inline PureState teleportation_register(const Vector2& a, const Vector2& b, const PureState& pair23) {
  return tensor(tensor(PureState::normalized(a, {1}), pair23), PureState::normalized(b, {4}));
}

namespace detail {

inline PureState branch_output(const PureState& reg, int i, int j) {
  auto s = apply_gate(apply_gate(reg, Operator::cnot(), {1, 2}), Operator::cnot(), {3, 4});
  s = contract_qubit(s, 2, basis_vector(Basis::Z, i));
  return contract_qubit(s, 3, basis_vector(Basis::X, j));
}

}  // namespace detail

/// Searches the 16 Pauli pairs for each branch and keeps the first that maps
/// 200 random product inputs onto C14|in> with fidelity 1 within 1e-10.
/// Throws std::logic_error if any branch has no valid pair.
inline CorrectionTable derive_correction_table() {
  Rng rng(0xC0FFEE);
  std::normal_distribution<double> g;
  std::vector<std::pair<Vector2, Vector2>> inputs;
  for (int k = 0; k < 200; ++k) {
    Vector2 a, b;
    for (int c = 0; c < 2; ++c) {
      a(c) = cplx(g(rng), g(rng));
      b(c) = cplx(g(rng), g(rng));
    }
    inputs.emplace_back(a / a.norm(), b / b.norm());
  }
  const auto pair = bell_state(BellKind::PhiPlus, {2, 3});
  CorrectionTable table{};
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      bool found = false;
      for (int r1 = 0; r1 < 4 && !found; ++r1) {
        for (int r4 = 0; r4 < 4 && !found; ++r4) {
          bool ok = true;
          for (const auto& [a, b] : inputs) {
            const auto in = tensor(PureState(a, {1}), PureState(b, {4}));
            auto out = detail::branch_output(teleportation_register(a, b, pair), i, j);
            out = apply_gate(apply_gate(out, Operator::pauli_named(r1), {1}), Operator::pauli_named(r4), {4});
            if (fidelity(out, ideal_output(in)) < 1.0 - 1e-10) {
              ok = false;
              break;
            }
          }
          if (ok) {
            table[static_cast<std::size_t>(branch_index(i, j))] = {r1, r4};
            found = true;
          }
        }
      }
      if (!found) throw std::logic_error("no Pauli correction reproduces the target for branch " + std::to_string(i) + std::to_string(j));
    }
  }
  return table;
}

inline const CorrectionTable& correction_table() {
  static const CorrectionTable table = derive_correction_table();
  return table;
}

inline PureState apply_correction(const PureState& s14, const Correction& c) {
  return apply_gate(apply_gate(s14, Operator::pauli_named(c.r1), {1}), Operator::pauli_named(c.r4), {4});
}

inline MixedState apply_correction(const MixedState& s14, const Correction& c) {
  return apply_gate(apply_gate(s14, Operator::pauli_named(c.r1), {1}), Operator::pauli_named(c.r4), {4});
}

// ---------------------------------------------------------------------------
// Inputs

/// Single-qubit state from a token: 0, 1, +, -, +i, -i.
inline Vector2 named_qubit(const std::string& s) {
  if (s == "0") return basis_vector(Basis::Z, 0);
  if (s == "1") return basis_vector(Basis::Z, 1);
  if (s == "+") return basis_vector(Basis::X, 0);
  if (s == "-") return basis_vector(Basis::X, 1);
  if (s == "+i") return basis_vector(Basis::Y, 0);
  if (s == "-i") return basis_vector(Basis::Y, 1);
  throw std::invalid_argument("unknown qubit state '" + s + "'");
}

/// Product input |a>_1 |b>_4, given either as amplitudes or as the MZI
/// phases of the preparation region.
class InputSpec {
 public:
  static InputSpec amplitudes(const Vector2& q1, const Vector2& q4) {
    if (!(q1.norm() > 0) || !(q4.norm() > 0)) throw std::invalid_argument("input amplitudes must be nonzero");
    return InputSpec(Amplitudes{q1 / q1.norm(), q4 / q4.norm()});
  }
  static InputSpec named(const std::string& q1, const std::string& q4) {
    return amplitudes(named_qubit(q1), named_qubit(q4));
  }
  static InputSpec settings(const photonics::PreparationSettings& s) {
    (void)photonics::prepare_product_state(s);  // validates
    return InputSpec(s);
  }

  bool has_settings() const { return std::holds_alternative<photonics::PreparationSettings>(value_); }

  /// Single-qubit factors (qubit 1, qubit 4).
  std::pair<Vector2, Vector2> factors() const {
    if (has_settings()) {
      const auto& s = std::get<photonics::PreparationSettings>(value_);
      return {photonics::mzi_output(s.mzis[0]), photonics::mzi_output(s.mzis[2])};
    }
    const auto& a = std::get<Amplitudes>(value_);
    return {a.q1, a.q4};
  }

  /// Labels (1, 4).
  PureState state() const {
    if (has_settings()) return photonics::prepare_product_state(std::get<photonics::PreparationSettings>(value_));
    const auto& a = std::get<Amplitudes>(value_);
    return tensor(PureState(a.q1, {1}), PureState(a.q4, {4}));
  }

  /// Register (1, 2, 3, 4) with the given pair.
  PureState with_pair(const PureState& pair23) const {
    const auto [a, b] = factors();
    return teleportation_register(a, b, pair23);
  }

  photonics::PreparationSettings preparation() const {
    if (has_settings()) return std::get<photonics::PreparationSettings>(value_);
    const auto& a = std::get<Amplitudes>(value_);
    return photonics::PreparationSettings::for_states(a.q1, a.q4);
  }

  json to_json() const {
    if (has_settings()) {
      json mzis = json::array();
      for (const auto& m : std::get<photonics::PreparationSettings>(value_).mzis)
        mzis.push_back({{"theta", m.theta}, {"phi", m.phi}});
      return {{"mzi", mzis}};
    }
    const auto& a = std::get<Amplitudes>(value_);
    auto vec = [](const Vector2& v) {
      return json::array({json::array({v(0).real(), v(0).imag()}), json::array({v(1).real(), v(1).imag()})});
    };
    return {{"q1", vec(a.q1)}, {"q4", vec(a.q4)}};
  }

  /// Accepts {"q1": "+", "q4": "0"}, {"q1": [[re,im],[re,im]], ...} or
  /// {"mzi": [{"theta":..,"phi":..} x4]}.
  static InputSpec from_json(const json& j) {
    if (j.contains("mzi")) {
      photonics::PreparationSettings s;
      const auto& arr = j.at("mzi");
      if (!arr.is_array() || arr.size() != 4) throw std::invalid_argument("input 'mzi' must list 4 MZI settings");
      for (std::size_t k = 0; k < 4; ++k) s.mzis[k] = {arr[k].at("theta").get<double>(), arr[k].at("phi").get<double>()};
      return settings(s);
    }
    auto qubit = [](const json& q) -> Vector2 {
      if (q.is_string()) return named_qubit(q.get<std::string>());
      if (!q.is_array() || q.size() != 2) throw std::invalid_argument("qubit amplitudes must be [[re,im],[re,im]]");
      Vector2 v;
      for (std::size_t k = 0; k < 2; ++k) v(static_cast<Eigen::Index>(k)) = cplx(q[k].at(0).get<double>(), q[k].at(1).get<double>());
      return v;
    };
    return amplitudes(qubit(j.at("q1")), qubit(j.at("q4")));
  }

 private:
  struct Amplitudes {
    Vector2 q1;
    Vector2 q4;
  };
  explicit InputSpec(std::variant<Amplitudes, photonics::PreparationSettings> v) : value_(std::move(v)) {}
  std::variant<Amplitudes, photonics::PreparationSettings> value_;
};

// ---------------------------------------------------------------------------
// Link

/// Noise plus the compensator in use.
struct Link {
  channel::NoiseConfig noise{};
  channel::CompensatorSetting compensator{};

  static Link ideal() { return {}; }

  /// Compensator calibrated against the configured drift with bright light.
  static Link calibrated(const channel::NoiseConfig& noise, Rng& rng, channel::CalibrationReport* report = nullptr) {
    const auto r = channel::calibrate_compensator(channel::bright_light_oracle(channel::euler_unitary(noise.drift)), 2000, rng);
    if (report) *report = r;
    if (!r.success) log::warn("compensator calibration did not reach the isolation threshold");
    return {noise, r.setting};
  }
};

// ---------------------------------------------------------------------------
// Exact engine

struct BranchResult {
  int i = 0;
  int j = 0;
  double probability = 0.0;
  /// Normalized state of (1, 4), corrected in corrected mode.
  MixedState output = MixedState::maximally_mixed({1, 4});
};

struct ExactResult {
  std::array<BranchResult, 4> branches;
  /// Post-selected: branch (0, +).  Corrected: mixture over branches.
  MixedState output = MixedState::maximally_mixed({1, 4});
  double survival = 1.0;
  /// Fraction of attempted trials that yield a kept coincidence.
  double kept_fraction = 1.0;
};

inline MixedState after_local_cnots(const MixedState& reg) {
  return apply_gate(apply_gate(reg, Operator::cnot(), {1, 2}), Operator::cnot(), {3, 4});
}

inline ExactResult exact_run(const InputSpec& input, const Link& link, Mode mode) {
  const auto reg = input.with_pair(bell_state(BellKind::PhiPlus, {2, 3}));
  const auto sent = channel::apply_channel_averaged(MixedState::from_pure(reg), link.noise, link.compensator);
  const auto state = after_local_cnots(sent.state);
  ExactResult res;
  res.survival = sent.survival;
  Matrix mixture = Matrix::Zero(4, 4);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const Vector2 zi = basis_vector(Basis::Z, i), xj = basis_vector(Basis::X, j);
      const Operator proj(kron(zi * zi.adjoint(), xj * xj.adjoint()), "P");
      const Matrix p = embed(proj, {2, 3}, state.labels());
      const MixedState projected = MixedState::trusted(p * state.matrix() * p, state.labels());
      auto& b = res.branches[static_cast<std::size_t>(branch_index(i, j))];
      b.i = i;
      b.j = j;
      b.probability = std::max(0.0, projected.matrix().trace().real());
      if (b.probability > 1e-15) {
        auto reduced = partial_trace(projected, {1, 4});
        reduced = MixedState::trusted(reduced.matrix() / b.probability, reduced.labels());
        if (mode == Mode::Corrected) reduced = apply_correction(reduced, correction_table()[static_cast<std::size_t>(branch_index(i, j))]);
        b.output = reduced;
        mixture += b.probability * reduced.matrix();
      }
    }
  }
  if (mode == Mode::PostSelected) {
    res.output = res.branches[kKeptBranch].output;
    res.kept_fraction = res.survival * res.branches[kKeptBranch].probability;
  } else {
    res.output = MixedState::trusted(mixture / mixture.trace().real(), {1, 4});
    res.kept_fraction = res.survival;
  }
  return res;
}

/// Outcome probabilities for analyzer bases (b1, b4), indexed 2*o1 + o4.
inline std::array<double, 4> setting_probabilities(const MixedState& rho14, Basis b1, Basis b4) {
  const auto projectors = photonics::measurement_setting(b1, b4);
  std::array<double, 4> p{};
  double total = 0.0;
  for (std::size_t k = 0; k < 4; ++k) {
    p[k] = std::max(0.0, (projectors[k] * rho14.matrix()).trace().real());
    total += p[k];
  }
  for (auto& x : p) x /= total;
  return p;
}

// ---------------------------------------------------------------------------
// Counts

/// Coincidence counts over the four outcomes of one setting (2*o1 + o4),
/// plus attempted trials that produced no kept coincidence.  Doubles so the
/// exact mode can carry probabilities in the same type.
struct CountTable {
  std::array<double, 4> n{};
  double discarded = 0.0;
  bool exact = false;  // n holds probabilities

  double kept() const { return n[0] + n[1] + n[2] + n[3]; }
  std::array<double, 4> frequencies() const {
    const double k = kept();
    if (!(k > 0)) throw std::domain_error("count table has no kept coincidences");
    return {n[0] / k, n[1] / k, n[2] / k, n[3] / k};
  }
  CountTable& operator+=(const CountTable& o) {
    for (std::size_t k = 0; k < 4; ++k) n[k] += o.n[k];
    discarded += o.discarded;
    return *this;
  }
  bool operator==(const CountTable&) const = default;
};

inline json to_json(const CountTable& c) {
  json j = {{"counts", c.n}, {"discarded", c.discarded}};
  if (c.exact) j["exact"] = true;
  return j;
}

inline CountTable count_table_from_json(const json& j) {
  CountTable c;
  const auto& arr = j.at("counts");
  if (!arr.is_array() || arr.size() != 4) throw std::invalid_argument("counts must have 4 entries");
  for (std::size_t k = 0; k < 4; ++k) c.n[k] = arr[k].get<double>();
  c.discarded = j.value("discarded", 0.0);
  c.exact = j.value("exact", false);
  return c;
}

/// Multinomial draw of `shots` outcomes by sequential binomials.
inline std::array<double, 4> sample_multinomial(const std::array<double, 4>& p, std::uint64_t shots, Rng& rng) {
  std::array<double, 4> out{};
  std::uint64_t left = shots;
  double mass = 1.0;
  for (std::size_t k = 0; k < 3; ++k) {
    const double q = mass > 0 ? std::clamp(p[k] / mass, 0.0, 1.0) : 0.0;
    const auto x = left > 0 ? std::binomial_distribution<std::uint64_t>(left, q)(rng) : 0;
    out[k] = static_cast<double>(x);
    left -= x;
    mass -= p[k];
  }
  out[3] = static_cast<double>(left);
  return out;
}

/// `shots` attempted trials.  Each yields a kept coincidence with
/// probability survival * P(kept branch); kept ones are distributed over the
/// four outcomes by the exact conditional probabilities.
inline CountTable sample_counts(const InputSpec& input, Basis b1, Basis b4, std::uint64_t shots, const Link& link, Mode mode,
                                Rng& rng) {
  if (shots < 1) throw std::invalid_argument("shots must be >= 1");
  const auto res = exact_run(input, link, mode);
  const auto kept = std::binomial_distribution<std::uint64_t>(shots, std::clamp(res.kept_fraction, 0.0, 1.0))(rng);
  CountTable c;
  c.n = sample_multinomial(setting_probabilities(res.output, b1, b4), kept, rng);
  c.discarded = static_cast<double>(shots - kept);
  return c;
}

/// Shot count, or nullopt for exact probabilities.
using Shots = std::optional<std::uint64_t>;

inline Shots parse_shots(const std::string& s) {
  if (s == "exact") return std::nullopt;
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("shots must be a positive integer or 'exact'");
  }
  if (used != s.size() || v < 1) throw std::invalid_argument("shots must be a positive integer or 'exact'");
  return static_cast<std::uint64_t>(v);
}

inline std::string to_string(const Shots& s) { return s ? std::to_string(*s) : "exact"; }

/// Counts with `kept` coincidences, or probabilities when exact.
inline CountTable kept_counts(const std::array<double, 4>& p, const Shots& kept, Rng& rng) {
  CountTable c;
  c.n = kept ? sample_multinomial(p, *kept, rng) : p;
  c.exact = !kept;
  return c;
}

// ---------------------------------------------------------------------------
// Truth table

struct TruthTable {
  /// Row: logical input 2*b1 + b4.  Column: measured output 2*o1 + o4.
  Eigen::Matrix4d probabilities = Eigen::Matrix4d::Zero();
  double fidelity = 0.0;
};

inline int cnot_of(int index) { return (index & 2) ? (index ^ 1) : index; }

/// Mean over rows of the probability of the CNOT-correct output.
inline double truth_table_fidelity(const Eigen::Matrix4d& p) {
  double f = 0.0;
  for (int r = 0; r < 4; ++r) f += p(r, cnot_of(r));
  return f / 4.0;
}

/// Post-selected runs of the four computational inputs in (Z, Z).  `shots`
/// is the number of kept coincidences per row.
inline TruthTable truth_table(const Link& link, const Shots& shots, Rng& rng) {
  TruthTable t;
  for (int r = 0; r < 4; ++r) {
    const auto in = InputSpec::named(r & 2 ? "1" : "0", r & 1 ? "1" : "0");
    const auto res = exact_run(in, link, Mode::PostSelected);
    auto sub = rng.split(static_cast<std::uint64_t>(r));
    const auto freq = kept_counts(setting_probabilities(res.output, Basis::Z, Basis::Z), shots, sub).frequencies();
    for (int c = 0; c < 4; ++c) t.probabilities(r, c) = freq[static_cast<std::size_t>(c)];
  }
  t.fidelity = truth_table_fidelity(t.probabilities);
  return t;
}

// ---------------------------------------------------------------------------
// Per-trial trajectories

/// Substream ids under Rng(seed).split(trial).
enum class Stream : std::uint64_t { Source = 1, Jitter, Loss, M2, M3, Readout1, Readout4 };

struct TrialStreams {
  Rng source, jitter, loss, m2, m3, readout1, readout4;

  static TrialStreams make(std::uint64_t seed, std::uint64_t trial) {
    const Rng t = Rng(seed).split(trial);
    auto s = [&](Stream k) { return t.split(static_cast<std::uint64_t>(k)); };
    return {s(Stream::Source), s(Stream::Jitter),   s(Stream::Loss),    s(Stream::M2),
            s(Stream::M3),     s(Stream::Readout1), s(Stream::Readout4)};
  }
};

/// One emission: input, sampled Werner component, link unitary with sampled
/// jitter on qubit 3.  Register (1, 2, 3, 4).
inline PureState emit_register(const InputSpec& input, const Link& link, TrialStreams& streams) {
  const auto pair = channel::emit_pair(link.noise.source_visibility, streams.source);
  const double eps = channel::sample_jitter(link.noise, streams.jitter);
  const auto reg = input.with_pair(pair);
  return apply_gate(reg, Operator(channel::link_unitary(link.noise, link.compensator, eps), "link"), {channel::kTransmittedQubit});
}

struct OutcomeRecord {
  int i = 0;
  int j = 0;
  std::string r1 = "I";
  std::string r4 = "I";
  Mode mode = Mode::PostSelected;
  bool post_selected = false;
  double branch_probability = 0.0;

  bool discarded() const { return mode == Mode::PostSelected && !post_selected; }
};

inline json to_json(const OutcomeRecord& r) {
  return {{"i", r.i},
          {"j", r.j == 0 ? "+" : "-"},
          {"corrections", {r.r1, r.r4}},
          {"mode", to_string(r.mode)},
          {"post_selected", r.post_selected},
          {"branch_probability", r.branch_probability}};
}

struct TrialResult {
  OutcomeRecord record;
  PureState output;  // (1, 4), conditional on the outcomes
};

/// Local CNOTs, the two Bell-side measurements and (corrected mode) the
/// Pauli corrections on one trajectory.
inline TrialResult run_trial_streams(const InputSpec& input, const Link& link, Mode mode, TrialStreams& streams) {
  auto s = emit_register(input, link, streams);
  s = apply_gate(apply_gate(s, Operator::cnot(), {1, 2}), Operator::cnot(), {3, 4});
  const auto m2 = measure_qubit(s, 2, Basis::Z, streams.m2);
  const auto m3 = measure_qubit(m2.collapsed, 3, Basis::X, streams.m3);
  auto out = contract_qubit(contract_qubit(m3.collapsed, 2, basis_vector(Basis::Z, m2.bit)), 3, basis_vector(Basis::X, m3.bit));
  OutcomeRecord rec;
  rec.i = m2.bit;
  rec.j = m3.bit;
  rec.mode = mode;
  rec.branch_probability = m2.probability * m3.probability;
  rec.post_selected = mode == Mode::PostSelected && branch_index(rec.i, rec.j) == kKeptBranch;
  if (mode == Mode::Corrected) {
    const auto c = correction_table()[static_cast<std::size_t>(branch_index(rec.i, rec.j))];
    rec.r1 = pauli_name(c.r1);
    rec.r4 = pauli_name(c.r4);
    out = apply_correction(out, c);
  }
  return {rec, out};
}

inline TrialResult run_trial(const InputSpec& input, const Link& link, Mode mode, Rng& rng) {
  auto streams = TrialStreams::make(rng(), 0);
  return run_trial_streams(input, link, mode, streams);
}

/// Full detection record of one attempted trial.
struct ShotRecord {
  OutcomeRecord outcome;
  bool detected = false;  // survived the link loss
  bool kept = false;      // detected and not discarded by post-selection
  int o1 = 0;
  int o4 = 0;

  int outcome_index() const { return 2 * o1 + o4; }
};

inline json to_json(const ShotRecord& s) {
  json j = to_json(s.outcome);
  j["detected"] = s.detected;
  j["kept"] = s.kept;
  j["o1"] = s.o1;
  j["o4"] = s.o4;
  return j;
}

/// Trial `t` of a run seeded with `seed`, read out in (b1, b4).
inline ShotRecord run_shot(const InputSpec& input, Basis b1, Basis b4, const Link& link, Mode mode, std::uint64_t seed,
                           std::uint64_t t) {
  auto streams = TrialStreams::make(seed, t);
  const auto tr = run_trial_streams(input, link, mode, streams);
  ShotRecord rec;
  rec.outcome = tr.record;
  rec.detected = streams.loss.uniform() < channel::survival_probability(link.noise);
  rec.kept = rec.detected && !tr.record.discarded();
  const auto r1 = measure_qubit(tr.output, 1, b1, streams.readout1);
  const auto r4 = measure_qubit(r1.collapsed, 4, b4, streams.readout4);
  rec.o1 = r1.bit;
  rec.o4 = r4.bit;
  return rec;
}

/// Counts from `shots` trajectory trials; trial t uses run_shot(seed, t).
inline CountTable trajectory_counts(const InputSpec& input, Basis b1, Basis b4, std::uint64_t shots, const Link& link, Mode mode,
                                    std::uint64_t seed) {
  CountTable c;
  for (std::uint64_t t = 0; t < shots; ++t) {
    const auto s = run_shot(input, b1, b4, link, mode, seed, t);
    if (s.kept)
      c.n[static_cast<std::size_t>(s.outcome_index())] += 1;
    else
      c.discarded += 1;
  }
  return c;
}

// ---------------------------------------------------------------------------
// Photonic route

/// Joint detection probabilities of the two chips' output ports, index
/// 4*portA + portB, for an ideal pair.  Port A = 2*o1 + i, port B = 2*j + o4.
inline std::array<double, 16> photonic_port_probabilities(const InputSpec& input, Basis b1, Basis b4) {
  const auto prep = input.preparation();
  const Matrix ua = photonics::circuit_unitary(photonics::chip_a_circuit(prep, b1));
  const Matrix ub = photonics::circuit_unitary(photonics::chip_b_circuit(prep, b4));
  // Photons enter with qubits 1 and 4 in |0>; the pair lives in qubits 2, 3.
  const auto start = tensor(tensor(PureState::basis(0, {1}), bell_state(BellKind::PhiPlus, {2, 3})), PureState::basis(0, {4}));
  const Vector out = kron(ua, ub) * start.amplitudes();
  std::array<double, 16> p{};
  for (std::size_t k = 0; k < 16; ++k) p[k] = std::norm(out(static_cast<Eigen::Index>(k)));
  return p;
}

/// Post-selected (0, +) outcome distribution from the photonic route.
inline std::array<double, 4> photonic_post_selected(const InputSpec& input, Basis b1, Basis b4) {
  const auto p = photonic_port_probabilities(input, b1, b4);
  std::array<double, 4> out{};
  double total = 0.0;
  for (int o1 = 0; o1 < 2; ++o1)
    for (int o4 = 0; o4 < 2; ++o4) {
      const int port_a = 2 * o1 + 0, port_b = 2 * 0 + o4;
      out[static_cast<std::size_t>(2 * o1 + o4)] = p[static_cast<std::size_t>(4 * port_a + port_b)];
      total += p[static_cast<std::size_t>(4 * port_a + port_b)];
    }
  for (auto& x : out) x /= total;
  return out;
}

}  // namespace qgt::protocol
