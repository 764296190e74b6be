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

// Dense multi-qubit states and operators.
//
// Register convention: a state carries an ordered list of qubit labels; the
// first label is the most significant bit of the basis index.  The
// teleportation register is labelled (1, 2, 3, 4), so |b1 b2 b3 b4> sits at
// index 8*b1 + 4*b2 + 2*b3 + b4.

#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qgt/log.hpp"
#include "qgt/rng.hpp"

namespace qgt {

using cplx = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;
using Vector2 = Eigen::Vector2cd;
using Matrix2 = Eigen::Matrix2cd;
using QubitLabel = int;
using Labels = std::vector<QubitLabel>;

inline constexpr double kExactTol = 1e-12;
inline constexpr double kPsdTol = 1e-10;
inline constexpr double kInvSqrt2 = std::numbers::sqrt2 / 2.0;
inline constexpr cplx kI{0.0, 1.0};

namespace detail {

inline void check_labels(const Labels& labels) {
  if (labels.empty()) throw std::invalid_argument("register needs at least one qubit");
  if (labels.size() > 20) throw std::invalid_argument("register too large");
  auto sorted = labels;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw std::invalid_argument("duplicate qubit label in register");
}

inline int position_of(const Labels& labels, QubitLabel q) {
  const auto it = std::find(labels.begin(), labels.end(), q);
  if (it == labels.end()) {
    std::ostringstream os;
    os << "qubit " << q << " is not in the register";
    throw std::out_of_range(os.str());
  }
  return static_cast<int>(it - labels.begin());
}

// Bit mask of the basis-index bit carrying the qubit at `pos`.
inline std::size_t bit_mask(int num_qubits, int pos) {
  return std::size_t{1} << (num_qubits - 1 - pos);
}

// Scatter the k bits of `sub` (MSB first) onto the given index masks.
inline std::size_t deposit(std::size_t sub, const std::vector<std::size_t>& masks) {
  std::size_t out = 0;
  const std::size_t k = masks.size();
  for (std::size_t b = 0; b < k; ++b)
    if ((sub >> (k - 1 - b)) & 1U) out |= masks[b];
  return out;
}

inline std::size_t extract(std::size_t index, const std::vector<std::size_t>& masks) {
  std::size_t out = 0;
  for (const auto m : masks) out = (out << 1) | ((index & m) ? 1U : 0U);
  return out;
}

inline std::vector<std::size_t> masks_for(const Labels& labels, const Labels& targets) {
  std::vector<std::size_t> masks;
  masks.reserve(targets.size());
  const int n = static_cast<int>(labels.size());
  for (const auto q : targets) masks.push_back(bit_mask(n, position_of(labels, q)));
  return masks;
}

}  // namespace detail

inline bool is_hermitian(const Matrix& m, double tol = kExactTol) {
  return m.rows() == m.cols() && (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

inline bool is_unitary(const Matrix& m, double tol = kExactTol) {
  if (m.rows() != m.cols()) return false;
  return (m * m.adjoint() - Matrix::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff() <= tol;
}

inline Matrix kron(const Matrix& a, const Matrix& b) { return Eigen::kroneckerProduct(a, b).eval(); }

/// Single-qubit Pauli matrix: 0 = I, 1 = X, 2 = Y, 3 = Z.
inline Matrix2 pauli(int a) {
  Matrix2 m;
  switch (a) {
    case 0: m << 1, 0, 0, 1; break;
    case 1: m << 0, 1, 1, 0; break;
    case 2: m << 0, -kI, kI, 0; break;
    case 3: m << 1, 0, 0, -1; break;
    default: throw std::out_of_range("pauli index must be 0..3");
  }
  return m;
}

/// Pure state over a labelled register.
class PureState {
 public:
  PureState(Vector amplitudes, Labels labels) : amps_(std::move(amplitudes)), labels_(std::move(labels)) {
    detail::check_labels(labels_);
    if (static_cast<std::size_t>(amps_.size()) != (std::size_t{1} << labels_.size()))
      throw std::invalid_argument("amplitude vector length must be 2^n");
    if (std::abs(amps_.norm() - 1.0) > kExactTol) throw std::invalid_argument("state is not normalized");
  }

  /// Normalizes `amplitudes` first; throws on the zero vector.
  static PureState normalized(Vector amplitudes, Labels labels) {
    const double n = amplitudes.norm();
    if (!(n > 1e-300)) throw std::invalid_argument("cannot normalize the zero vector");
    return PureState(amplitudes / n, std::move(labels));
  }

  static PureState basis(std::size_t index, Labels labels) {
    Vector v = Vector::Zero(static_cast<Eigen::Index>(std::size_t{1} << labels.size()));
    if (index >= static_cast<std::size_t>(v.size())) throw std::out_of_range("basis index out of range");
    v(static_cast<Eigen::Index>(index)) = 1.0;
    return PureState(std::move(v), std::move(labels));
  }

  const Vector& amplitudes() const { return amps_; }
  const Labels& labels() const { return labels_; }
  int num_qubits() const { return static_cast<int>(labels_.size()); }
  std::size_t dim() const { return static_cast<std::size_t>(amps_.size()); }
  int position(QubitLabel q) const { return detail::position_of(labels_, q); }
  cplx operator[](std::size_t i) const { return amps_(static_cast<Eigen::Index>(i)); }

 private:
  Vector amps_;
  Labels labels_;
};

/// Density matrix over a labelled register.
class MixedState {
 public:
  MixedState(Matrix rho, Labels labels) : rho_(std::move(rho)), labels_(std::move(labels)) {
    detail::check_labels(labels_);
    const auto d = static_cast<Eigen::Index>(std::size_t{1} << labels_.size());
    if (rho_.rows() != d || rho_.cols() != d) throw std::invalid_argument("density matrix must be 2^n x 2^n");
    if (!is_hermitian(rho_, kExactTol)) throw std::invalid_argument("density matrix is not Hermitian");
    if (std::abs(rho_.trace() - 1.0) > kExactTol) throw std::invalid_argument("density matrix trace is not 1");
    if (min_eigenvalue() < -kPsdTol) throw std::invalid_argument("density matrix is not positive semidefinite");
  }

  static MixedState from_pure(const PureState& psi) {
    return trusted(psi.amplitudes() * psi.amplitudes().adjoint(), psi.labels());
  }

  static MixedState maximally_mixed(Labels labels) {
    const auto d = static_cast<Eigen::Index>(std::size_t{1} << labels.size());
    return MixedState(Matrix::Identity(d, d) / static_cast<double>(d), std::move(labels));
  }

  /// Skips validation; for results of operations already known to preserve
  /// the invariants.  The matrix is re-symmetrized to absorb rounding.
  static MixedState trusted(const Matrix& rho, Labels labels) {
    MixedState s;
    s.rho_ = (rho + rho.adjoint()) / 2.0;
    s.labels_ = std::move(labels);
    return s;
  }

  const Matrix& matrix() const { return rho_; }
  const Labels& labels() const { return labels_; }
  int num_qubits() const { return static_cast<int>(labels_.size()); }
  std::size_t dim() const { return static_cast<std::size_t>(rho_.rows()); }
  int position(QubitLabel q) const { return detail::position_of(labels_, q); }

  double purity() const { return (rho_ * rho_).trace().real(); }
  double min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho_, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  }

 private:
  MixedState() = default;
  Matrix rho_;
  Labels labels_;
};

/// A k-qubit operator; `unitary()` is computed on construction.
class Operator {
 public:
  Operator(Matrix m, std::string name = "U") : m_(std::move(m)), name_(std::move(name)) {
    if (m_.rows() != m_.cols()) throw std::invalid_argument("operator must be square");
    const auto d = static_cast<std::size_t>(m_.rows());
    if (d < 2 || (d & (d - 1)) != 0) throw std::invalid_argument("operator dimension must be 2^k");
    arity_ = 0;
    for (std::size_t x = d; x > 1; x >>= 1) ++arity_;
    unitary_ = is_unitary(m_);
  }

  const Matrix& matrix() const { return m_; }
  int arity() const { return arity_; }
  bool unitary() const { return unitary_; }
  const std::string& name() const { return name_; }

  static Operator identity(int arity = 1) {
    const auto d = static_cast<Eigen::Index>(std::size_t{1} << arity);
    return {Matrix::Identity(d, d), "I"};
  }
  static Operator x() { return {pauli(1), "X"}; }
  static Operator y() { return {pauli(2), "Y"}; }
  static Operator z() { return {pauli(3), "Z"}; }
  static Operator pauli_named(int a) {
    static constexpr const char* names[] = {"I", "X", "Y", "Z"};
    return {pauli(a), names[a]};
  }
  static Operator hadamard() {
    Matrix2 h;
    h << 1, 1, 1, -1;
    return {h * kInvSqrt2, "H"};
  }
  /// Control is the first target, target bit the second.
  static Operator cnot() {
    Matrix m = Matrix::Zero(4, 4);
    m(0, 0) = m(1, 1) = m(2, 3) = m(3, 2) = 1.0;
    return {m, "CNOT"};
  }
  static Operator rz(double theta) {
    Matrix2 m = Matrix2::Zero();
    m(0, 0) = std::polar(1.0, -theta / 2);
    m(1, 1) = std::polar(1.0, theta / 2);
    return {m, "Rz"};
  }
  static Operator ry(double theta) {
    Matrix2 m;
    m << std::cos(theta / 2), -std::sin(theta / 2), std::sin(theta / 2), std::cos(theta / 2);
    return {m, "Ry"};
  }

 private:
  Matrix m_;
  std::string name_;
  int arity_ = 0;
  bool unitary_ = false;
};

enum class BellKind { PhiPlus, PhiMinus, PsiPlus, PsiMinus };

inline const char* to_string(BellKind k) {
  switch (k) {
    case BellKind::PhiPlus: return "Phi+";
    case BellKind::PhiMinus: return "Phi-";
    case BellKind::PsiPlus: return "Psi+";
    case BellKind::PsiMinus: return "Psi-";
  }
  return "?";
}

inline PureState bell_state(BellKind kind, Labels labels = {1, 2}) {
  if (labels.size() != 2) throw std::invalid_argument("a Bell state has two qubits");
  Vector v = Vector::Zero(4);
  switch (kind) {
    case BellKind::PhiPlus: v << kInvSqrt2, 0, 0, kInvSqrt2; break;
    case BellKind::PhiMinus: v << kInvSqrt2, 0, 0, -kInvSqrt2; break;
    case BellKind::PsiPlus: v << 0, kInvSqrt2, kInvSqrt2, 0; break;
    case BellKind::PsiMinus: v << 0, kInvSqrt2, -kInvSqrt2, 0; break;
  }
  return {std::move(v), std::move(labels)};
}

inline PureState tensor(const PureState& a, const PureState& b) {
  Labels labels = a.labels();
  labels.insert(labels.end(), b.labels().begin(), b.labels().end());
  return PureState::normalized(kron(a.amplitudes(), b.amplitudes()), std::move(labels));
}

inline MixedState tensor(const MixedState& a, const MixedState& b) {
  Labels labels = a.labels();
  labels.insert(labels.end(), b.labels().begin(), b.labels().end());
  detail::check_labels(labels);
  return MixedState::trusted(kron(a.matrix(), b.matrix()), std::move(labels));
}

/// Full-register matrix of `op` acting on `targets` (first target = MSB of
/// the operator index).
inline Matrix embed(const Operator& op, const Labels& targets, const Labels& labels) {
  if (static_cast<int>(targets.size()) != op.arity())
    throw std::invalid_argument("operator arity does not match target count");
  detail::check_labels(targets);
  const auto masks = detail::masks_for(labels, targets);
  std::size_t target_mask = 0;
  for (auto m : masks) target_mask |= m;
  const std::size_t dim = std::size_t{1} << labels.size();
  const std::size_t sub = std::size_t{1} << targets.size();
  Matrix full = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (std::size_t base = 0; base < dim; ++base) {
    if (base & target_mask) continue;
    for (std::size_t r = 0; r < sub; ++r)
      for (std::size_t c = 0; c < sub; ++c)
        full(static_cast<Eigen::Index>(base | detail::deposit(r, masks)),
             static_cast<Eigen::Index>(base | detail::deposit(c, masks))) =
            op.matrix()(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  }
  return full;
}

namespace detail {

// Applies `op` to `targets` without renormalizing; used for projections too.
inline Vector apply_raw(const Vector& amps, const Labels& labels, const Matrix& op, const Labels& targets) {
  detail::check_labels(targets);
  const auto masks = masks_for(labels, targets);
  std::size_t target_mask = 0;
  for (auto m : masks) target_mask |= m;
  const std::size_t dim = static_cast<std::size_t>(amps.size());
  const std::size_t sub = std::size_t{1} << targets.size();
  if (static_cast<std::size_t>(op.rows()) != sub) throw std::invalid_argument("operator arity does not match target count");
  std::vector<std::size_t> offsets(sub);
  for (std::size_t s = 0; s < sub; ++s) offsets[s] = deposit(s, masks);
  Vector out = amps;
  Vector in_sub(static_cast<Eigen::Index>(sub));
  for (std::size_t base = 0; base < dim; ++base) {
    if (base & target_mask) continue;
    for (std::size_t s = 0; s < sub; ++s) in_sub(static_cast<Eigen::Index>(s)) = amps(static_cast<Eigen::Index>(base | offsets[s]));
    for (std::size_t r = 0; r < sub; ++r) {
      cplx acc = 0.0;
      for (std::size_t c = 0; c < sub; ++c) {
        const cplx m = op(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
        if (m != 0.0) acc += m * in_sub(static_cast<Eigen::Index>(c));
      }
      out(static_cast<Eigen::Index>(base | offsets[r])) = acc;
    }
  }
  return out;
}

}  // namespace detail

inline PureState apply_gate(const PureState& state, const Operator& op, const Labels& targets) {
  if (static_cast<int>(targets.size()) != op.arity())
    throw std::invalid_argument("operator arity does not match target count");
  Vector out = detail::apply_raw(state.amplitudes(), state.labels(), op.matrix(), targets);
  if (op.unitary()) return {std::move(out), state.labels()};
  return PureState::normalized(std::move(out), state.labels());
}

inline MixedState apply_gate(const MixedState& state, const Operator& op, const Labels& targets) {
  const Matrix e = embed(op, targets, state.labels());
  Matrix out = e * state.matrix() * e.adjoint();
  if (!op.unitary()) {
    const double tr = out.trace().real();
    if (!(tr > 0.0)) throw std::domain_error("operator annihilates the state");
    out /= tr;
  }
  return MixedState::trusted(out, state.labels());
}

enum class Basis { Z, X, Y };

inline const char* to_string(Basis b) {
  switch (b) {
    case Basis::Z: return "Z";
    case Basis::X: return "X";
    case Basis::Y: return "Y";
  }
  return "?";
}

inline Basis parse_basis(const std::string& token) {
  if (token == "Z" || token == "z") return Basis::Z;
  if (token == "X" || token == "x") return Basis::X;
  if (token == "Y" || token == "y") return Basis::Y;
  throw std::invalid_argument("unknown measurement basis '" + token + "'");
}

/// Eigenvector for outcome `bit`: bit 0 is the +1 eigenstate (|0>, |+>, |+i>).
inline Vector2 basis_vector(Basis b, int bit) {
  if (bit != 0 && bit != 1) throw std::out_of_range("outcome bit must be 0 or 1");
  Vector2 v;
  const double s = bit == 0 ? 1.0 : -1.0;
  switch (b) {
    case Basis::Z: v = bit == 0 ? Vector2(1, 0) : Vector2(0, 1); break;
    case Basis::X: v << kInvSqrt2, s * kInvSqrt2; break;
    case Basis::Y: v << kInvSqrt2, s * kInvSqrt2 * kI; break;
  }
  return v;
}

/// Outcome label in the notation of the basis: "0"/"1" for Z, "+"/"-" otherwise.
inline std::string outcome_symbol(Basis b, int bit) {
  if (b == Basis::Z) return bit == 0 ? "0" : "1";
  return bit == 0 ? "+" : "-";
}

inline int parse_outcome_symbol(Basis b, const std::string& s) {
  if (b == Basis::Z) {
    if (s == "0") return 0;
    if (s == "1") return 1;
  } else {
    if (s == "+") return 0;
    if (s == "-") return 1;
  }
  throw std::invalid_argument("outcome '" + s + "' is not valid for basis " + to_string(b));
}

struct MeasurementOutcome {
  int bit;
  double probability;
  PureState collapsed;
};

inline std::array<double, 2> outcome_probabilities(const PureState& state, QubitLabel q, Basis b) {
  std::array<double, 2> p{};
  for (int bit = 0; bit < 2; ++bit) {
    const Vector2 e = basis_vector(b, bit);
    const Matrix proj = e * e.adjoint();
    p[static_cast<std::size_t>(bit)] = detail::apply_raw(state.amplitudes(), state.labels(), proj, {q}).squaredNorm();
  }
  return p;
}

/// Projects qubit `q` onto the given outcome; throws std::domain_error when
/// that branch has zero probability.
inline MeasurementOutcome project_qubit(const PureState& state, QubitLabel q, Basis b, int bit) {
  const Vector2 e = basis_vector(b, bit);
  const Matrix proj = e * e.adjoint();
  Vector post = detail::apply_raw(state.amplitudes(), state.labels(), proj, {q});
  const double p = post.squaredNorm();
  if (p < 1e-24) throw std::domain_error("requested measurement branch has zero probability");
  post /= std::sqrt(p);
  return {bit, p, PureState(std::move(post), state.labels())};
}

/// Samples a projective measurement with one uniform draw from `rng`.
inline MeasurementOutcome measure_qubit(const PureState& state, QubitLabel q, Basis b, Rng& rng) {
  const Vector2 e0 = basis_vector(b, 0);
  const Matrix proj0 = e0 * e0.adjoint();
  const Vector post0 = detail::apply_raw(state.amplitudes(), state.labels(), proj0, {q});
  const double p0 = std::clamp(post0.squaredNorm(), 0.0, 1.0);
  const double u = rng.uniform();
  if (u < p0) return {0, p0, PureState(post0 / std::sqrt(p0), state.labels())};
  return project_qubit(state, q, b, 1);
}

/// Contracts qubit `q` with <bra| and renormalizes the remaining register.
inline PureState contract_qubit(const PureState& state, QubitLabel q, const Vector2& ket) {
  if (state.num_qubits() < 2) throw std::invalid_argument("cannot contract the only qubit");
  const int pos = state.position(q);
  const int n = state.num_qubits();
  const std::size_t mask = detail::bit_mask(n, pos);
  const std::size_t low = mask - 1;
  Vector out = Vector::Zero(static_cast<Eigen::Index>(state.dim() / 2));
  for (std::size_t x = 0; x < state.dim(); ++x) {
    const std::size_t reduced = ((x >> 1) & ~low) | (x & low);
    const int bit = (x & mask) ? 1 : 0;
    out(static_cast<Eigen::Index>(reduced)) += std::conj(ket(bit)) * state[x];
  }
  Labels labels = state.labels();
  labels.erase(labels.begin() + pos);
  return PureState::normalized(std::move(out), std::move(labels));
}

/// Reduced state on `keep`; result labels follow register order.
inline MixedState partial_trace(const MixedState& state, const Labels& keep) {
  if (keep.empty()) throw std::invalid_argument("partial trace must keep at least one qubit");
  detail::check_labels(keep);
  Labels kept, traced;
  for (const auto q : state.labels()) {
    if (std::find(keep.begin(), keep.end(), q) != keep.end())
      kept.push_back(q);
    else
      traced.push_back(q);
  }
  for (const auto q : keep) (void)state.position(q);
  if (traced.empty()) return state;
  const auto keep_masks = detail::masks_for(state.labels(), kept);
  const auto trace_masks = detail::masks_for(state.labels(), traced);
  const std::size_t dk = std::size_t{1} << kept.size();
  const std::size_t dt = std::size_t{1} << traced.size();
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(dk), static_cast<Eigen::Index>(dk));
  const Matrix& rho = state.matrix();
  for (std::size_t r = 0; r < dk; ++r) {
    const std::size_t rr = detail::deposit(r, keep_masks);
    for (std::size_t c = 0; c < dk; ++c) {
      const std::size_t cc = detail::deposit(c, keep_masks);
      cplx acc = 0.0;
      for (std::size_t t = 0; t < dt; ++t) {
        const std::size_t tt = detail::deposit(t, trace_masks);
        acc += rho(static_cast<Eigen::Index>(rr | tt), static_cast<Eigen::Index>(cc | tt));
      }
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = acc;
    }
  }
  return MixedState::trusted(out, std::move(kept));
}

/// Embeds a reduced state back into `labels`, with the maximally mixed state
/// on every qubit not carried by `reduced`.
inline MixedState tensor_identity(const MixedState& reduced, const Labels& labels) {
  detail::check_labels(labels);
  Labels others;
  for (const auto q : labels)
    if (std::find(reduced.labels().begin(), reduced.labels().end(), q) == reduced.labels().end()) others.push_back(q);
  for (const auto q : reduced.labels()) (void)detail::position_of(labels, q);
  const auto keep_masks = detail::masks_for(labels, reduced.labels());
  const auto other_masks = detail::masks_for(labels, others);
  const std::size_t dim = std::size_t{1} << labels.size();
  const double scale = 1.0 / static_cast<double>(std::size_t{1} << others.size());
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (std::size_t r = 0; r < dim; ++r) {
    for (std::size_t c = 0; c < dim; ++c) {
      if (detail::extract(r, other_masks) != detail::extract(c, other_masks)) continue;
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          scale * reduced.matrix()(static_cast<Eigen::Index>(detail::extract(r, keep_masks)),
                                   static_cast<Eigen::Index>(detail::extract(c, keep_masks)));
    }
  }
  return MixedState::trusted(out, labels);
}

/// F = Tr(measured * ideal).  The formula is a fidelity only for a pure
/// ideal; a mixed ideal is accepted with a warning.
inline double fidelity_state(const MixedState& measured, const MixedState& ideal) {
  if (measured.dim() != ideal.dim()) throw std::invalid_argument("fidelity: dimension mismatch");
  if (ideal.purity() < 1.0 - kPsdTol) log::warn("fidelity_state: ideal state is mixed; Tr(rho sigma) is not a fidelity");
  const cplx f = (measured.matrix() * ideal.matrix()).trace();
  if (std::abs(f.imag()) > kPsdTol) log::warn("fidelity_state: non-negligible imaginary residue");
  return f.real();
}

inline double fidelity(const PureState& a, const PureState& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("fidelity: dimension mismatch");
  return std::norm(a.amplitudes().dot(b.amplitudes()));
}

}  // namespace qgt
