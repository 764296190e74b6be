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

// Two-qubit state and process tomography over the alphabet
// {|0>, |1>, |+>, |+i>}.
//
// A measurement setting is a letter pair; each letter selects the analyzer
// basis of its qubit (0 and 1 -> Z, + -> X, +i -> Y) and yields a 4-outcome
// count table.  Pauli expectations are pooled over every compatible setting
// and inverted linearly; the result is projected onto the density matrices.
//
// Process matrices use A_m = s_a (x) s_b with s in (I, X, Y, Z), m = 4a + b,
// so a trace-preserving chi has trace 1 and the CNOT has entries +-1/4.

#pragma once

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "qgt/log.hpp"
#include "qgt/protocol.hpp"
#include "qgt/qcore.hpp"

namespace qgt::tomography {

using protocol::CountTable;
using protocol::Shots;

inline constexpr int kSettings = 16;
inline const std::array<std::string, 4> kAlphabet{"0", "1", "+", "+i"};

inline Basis letter_basis(int k) {
  static const Basis b[] = {Basis::Z, Basis::Z, Basis::X, Basis::Y};
  return b[k];
}

inline Vector2 letter_state(int k) { return protocol::named_qubit(kAlphabet[static_cast<std::size_t>(k)]); }

/// Setting index 4*a + b: letter a on the first qubit, b on the second.
struct Setting {
  int a = 0;
  int b = 0;
  int index() const { return 4 * a + b; }
  Basis first() const { return letter_basis(a); }
  Basis second() const { return letter_basis(b); }
  std::string id() const { return kAlphabet[static_cast<std::size_t>(a)] + "," + kAlphabet[static_cast<std::size_t>(b)]; }
  static Setting from_index(int k) { return {k / 4, k % 4}; }
};

using StateCounts = std::array<CountTable, kSettings>;
using ProcessCounts = std::array<StateCounts, kSettings>;

/// Counts for every setting of `rho` (labels in register order).  Exact
/// when `kept` is empty, else `kept` coincidences per setting.
inline StateCounts state_counts(const MixedState& rho, const Shots& kept, Rng& rng) {
  if (rho.num_qubits() != 2) throw std::invalid_argument("state tomography needs a two-qubit state");
  StateCounts out;
  for (int k = 0; k < kSettings; ++k) {
    const auto s = Setting::from_index(k);
    auto sub = rng.split(static_cast<std::uint64_t>(k));
    out[static_cast<std::size_t>(k)] = protocol::kept_counts(protocol::setting_probabilities(rho, s.first(), s.second()), kept, sub);
  }
  return out;
}

inline StateCounts exact_counts(const MixedState& rho) {
  Rng unused(0);
  return state_counts(rho, std::nullopt, unused);
}

// ---------------------------------------------------------------------------
// Physical projection

/// Euclidean projection of `v` onto the probability simplex.
inline Eigen::VectorXd project_simplex(const Eigen::VectorXd& v) {
  std::vector<double> u(v.data(), v.data() + v.size());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0, shift = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    cumulative += u[k];
    const double t = (cumulative - 1.0) / static_cast<double>(k + 1);
    if (u[k] - t > 0) shift = t;
  }
  return (v.array() - shift).max(0.0).matrix();
}

/// Nearest (Frobenius) Hermitian PSD trace-one matrix.  Eigenvalues are
/// projected onto the simplex, which is the nearest-point map in the
/// eigenbasis and therefore idempotent and non-expansive.
inline Matrix project_physical(const Matrix& m) {
  const Matrix h = (m + m.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  const Eigen::VectorXd lam = project_simplex(es.eigenvalues());
  Matrix out = es.eigenvectors() * lam.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
  return (out + out.adjoint()) / 2.0;
}

inline double min_eigenvalue(const Matrix& m) {
  return Eigen::SelfAdjointEigenSolver<Matrix>((m + m.adjoint()) / 2.0, Eigen::EigenvaluesOnly).eigenvalues()(0);
}

// ---------------------------------------------------------------------------
// State reconstruction

/// sigma_a (x) sigma_b, a and b in 0..3.
inline Matrix pauli2(int a, int b) { return kron(pauli(a), pauli(b)); }

/// <s_a (x) s_b> pooled over settings whose bases match the non-identity
/// factors.  Index 4a + b; entry 0 is 1.
inline std::array<double, 16> pauli_expectations(const StateCounts& counts) {
  auto matches = [](int pauli_index, Basis basis) {
    if (pauli_index == 0) return true;
    return (pauli_index == 1 && basis == Basis::X) || (pauli_index == 2 && basis == Basis::Y) ||
           (pauli_index == 3 && basis == Basis::Z);
  };
  std::array<double, 16> e{};
  e[0] = 1.0;
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      if (a == 0 && b == 0) continue;
      double num = 0.0, den = 0.0;
      for (int k = 0; k < kSettings; ++k) {
        const auto s = Setting::from_index(k);
        if (!matches(a, s.first()) || !matches(b, s.second())) continue;
        const auto& c = counts[static_cast<std::size_t>(k)];
        for (int o = 0; o < 4; ++o) {
          const double sign = ((a != 0 && (o >> 1)) ? -1.0 : 1.0) * ((b != 0 && (o & 1)) ? -1.0 : 1.0);
          num += sign * c.n[static_cast<std::size_t>(o)];
        }
        den += c.kept();
      }
      e[static_cast<std::size_t>(4 * a + b)] = num / den;
    }
  }
  return e;
}

struct StateEstimate {
  MixedState rho;
  Matrix raw;  // linear inversion, before projection
  double min_raw_eigenvalue = 0.0;
};

/// Throws std::invalid_argument when a setting has no counts.
inline StateEstimate reconstruct_state(const StateCounts& counts, const Labels& labels = {1, 4}) {
  for (int k = 0; k < kSettings; ++k) {
    const auto& c = counts[static_cast<std::size_t>(k)];
    if (!(c.kept() > 0)) throw std::invalid_argument("setting " + Setting::from_index(k).id() + " has no counts");
  }
  const auto e = pauli_expectations(counts);
  Matrix raw = Matrix::Zero(4, 4);
  for (int m = 0; m < 16; ++m) raw += e[static_cast<std::size_t>(m)] * pauli2(m / 4, m % 4);
  raw /= 4.0;
  return {MixedState::trusted(project_physical(raw), labels), raw, min_eigenvalue(raw)};
}

// ---------------------------------------------------------------------------
// Process reconstruction

/// Input k = 4a + b is |letter a> (x) |letter b>.
inline Matrix process_input(int k) {
  const Vector v = kron(letter_state(k / 4), letter_state(k % 4));
  return v * v.adjoint();
}

inline protocol::InputSpec process_input_spec(int k) {
  return protocol::InputSpec::named(kAlphabet[static_cast<std::size_t>(k / 4)], kAlphabet[static_cast<std::size_t>(k % 4)]);
}

/// Counts for all 16 x 16 (input, setting) pairs of a process given as
/// input -> output state.
inline ProcessCounts process_counts(const std::function<MixedState(const protocol::InputSpec&)>& process, const Shots& kept,
                                    Rng& rng) {
  ProcessCounts out;
  for (int k = 0; k < kSettings; ++k) {
    auto sub = rng.split(static_cast<std::uint64_t>(k));
    out[static_cast<std::size_t>(k)] = state_counts(process(process_input_spec(k)), kept, sub);
  }
  return out;
}

/// Column-stacking vec.
inline Vector vec(const Matrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

/// chi from the superoperator S with vec(E(rho)) = S vec(rho):
/// S = sum chi_mn conj(A_n) (x) A_m, and the B_mn are orthogonal with norm 16.
inline Matrix chi_from_superoperator(const Matrix& s) {
  Matrix chi(16, 16);
  for (int m = 0; m < 16; ++m) {
    const Matrix am = pauli2(m / 4, m % 4);
    for (int n = 0; n < 16; ++n) {
      // Tr(B^dagger S) as an elementwise sum.
      const Matrix b = kron(pauli2(n / 4, n % 4).conjugate(), am);
      chi(m, n) = (b.conjugate().cwiseProduct(s)).sum() / 16.0;
    }
  }
  return chi;
}

/// Superoperator of rho -> sum chi_mn A_m rho A_n^dagger.
inline Matrix superoperator_from_chi(const Matrix& chi) {
  Matrix s = Matrix::Zero(16, 16);
  for (int m = 0; m < 16; ++m)
    for (int n = 0; n < 16; ++n)
      if (chi(m, n) != cplx(0.0)) s += chi(m, n) * kron(pauli2(n / 4, n % 4).conjugate(), pauli2(m / 4, m % 4));
  return s;
}

/// chi of rho -> U rho U^dagger: rank one, c_m = Tr(A_m U) / 4.
inline Matrix chi_of_unitary(const Matrix& u) {
  if (u.rows() != 4 || u.cols() != 4) throw std::invalid_argument("chi_of_unitary needs a 4x4 unitary");
  Vector c(16);
  for (int m = 0; m < 16; ++m) c(m) = (pauli2(m / 4, m % 4).adjoint() * u).trace() / 4.0;
  return c * c.adjoint();
}

inline Matrix chi_identity() { return chi_of_unitary(Matrix::Identity(4, 4)); }

inline Matrix chi_cnot() { return chi_of_unitary(Operator::cnot().matrix()); }

/// Pauli label of basis index m, e.g. 13 -> "ZX".
inline std::string pauli_label(int m) {
  static const char* p = "IXYZ";
  return {p[m / 4], p[m % 4]};
}

struct ProcessEstimate {
  Matrix chi;                 // A_m = s (x) s, projected, trace 1
  Matrix chi_half_basis;      // same process in A_m = s (x) s / 2, trace 4
  Matrix chi_raw;             // before projection
  double min_raw_eigenvalue = 0.0;
  double tp_deviation = 0.0;  // max |sum chi_mn A_n^dag A_m - I| of chi_raw
  std::vector<MixedState> outputs;  // one per input
};

inline double tp_deviation(const Matrix& chi) {
  Matrix acc = Matrix::Zero(4, 4);
  for (int m = 0; m < 16; ++m)
    for (int n = 0; n < 16; ++n)
      if (chi(m, n) != cplx(0.0)) acc += chi(m, n) * pauli2(n / 4, n % 4).adjoint() * pauli2(m / 4, m % 4);
  return (acc - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff();
}

/// Linear inversion of the 16 reconstructed outputs followed by physical
/// projection of chi.  Trace preservation is reported, not imposed.
inline ProcessEstimate reconstruct_process(const ProcessCounts& counts) {
  Matrix in(16, 16), out(16, 16);
  ProcessEstimate est;
  for (int k = 0; k < kSettings; ++k) {
    est.outputs.push_back(reconstruct_state(counts[static_cast<std::size_t>(k)]).rho);
    in.col(k) = vec(process_input(k));
    out.col(k) = vec(est.outputs.back().matrix());
  }
  Eigen::FullPivLU<Matrix> lu(in);
  if (lu.rank() != 16) throw std::logic_error("process inputs do not span the operator space");
  const Matrix s = out * lu.inverse();
  est.chi_raw = chi_from_superoperator(s);
  est.chi_raw = (est.chi_raw + est.chi_raw.adjoint()) / 2.0;
  est.min_raw_eigenvalue = min_eigenvalue(est.chi_raw);
  est.tp_deviation = tp_deviation(est.chi_raw);
  est.chi = project_physical(est.chi_raw);
  est.chi_half_basis = 4.0 * est.chi;
  return est;
}

/// F = Re Tr(chi_exp chi_ideal).
inline double fidelity_process(const Matrix& chi_exp, const Matrix& chi_ideal) {
  if (chi_exp.rows() != chi_ideal.rows() || chi_exp.cols() != chi_ideal.cols())
    throw std::invalid_argument("fidelity_process: dimension mismatch");
  const cplx f = (chi_exp * chi_ideal).trace();
  if (std::abs(f.imag()) > 1e-10) log::warn("fidelity_process: imaginary residue " + std::to_string(f.imag()));
  return f.real();
}

// ---------------------------------------------------------------------------
// Visibility

struct FringePoint {
  double phase = 0.0;
  double counts = 0.0;
};

struct VisibilityFit {
  double visibility = 0.0;
  double mean = 0.0;   // A
  double phase0 = 0.0;
  bool degenerate = false;
};

/// Least-squares fit of C(phi) = A (1 + V cos(phi - phi0)), linear in
/// (A, A V cos phi0, A V sin phi0).  Needs >= 8 points over a full period.
inline VisibilityFit fit_visibility(const std::vector<FringePoint>& points) {
  const auto n = points.size();
  if (n < 8) throw std::invalid_argument("visibility fit needs at least 8 phase points");
  const auto [lo, hi] = std::minmax_element(points.begin(), points.end(),
                                            [](const auto& x, const auto& y) { return x.phase < y.phase; });
  if (hi->phase - lo->phase < 2 * std::numbers::pi * (1.0 - 1.0 / static_cast<double>(n)) - 1e-9)
    throw std::invalid_argument("visibility fit phases must cover a full period");
  Eigen::MatrixXd design(static_cast<Eigen::Index>(n), 3);
  Eigen::VectorXd y(static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < n; ++k) {
    const auto r = static_cast<Eigen::Index>(k);
    design(r, 0) = 1.0;
    design(r, 1) = std::cos(points[k].phase);
    design(r, 2) = std::sin(points[k].phase);
    y(r) = points[k].counts;
  }
  const Eigen::Vector3d beta = design.colPivHouseholderQr().solve(y);
  VisibilityFit fit;
  fit.mean = beta(0);
  const double amp = std::hypot(beta(1), beta(2));
  if (!(fit.mean > 0) || amp <= 1e-12 * std::abs(fit.mean)) {
    log::warn("visibility fit: flat or empty fringe, reporting V = 0");
    fit.degenerate = true;
    return fit;
  }
  fit.visibility = amp / fit.mean;
  fit.phase0 = std::atan2(beta(2), beta(1));
  return fit;
}

inline double visibility(const std::vector<FringePoint>& points) { return fit_visibility(points).visibility; }

// ---------------------------------------------------------------------------
// Bootstrap

/// Poisson resample of every outcome count; exact tables are returned as is.
inline CountTable resample_poisson(const CountTable& c, Rng& rng) {
  if (c.exact) return c;
  CountTable out = c;
  for (auto& x : out.n)
    x = x > 0 ? static_cast<double>(std::poisson_distribution<std::uint64_t>(x)(rng)) : 0.0;
  return out;
}

template <class T, std::size_t N>
std::array<T, N> resample_poisson(const std::array<T, N>& c, Rng& rng) {
  std::array<T, N> out;
  for (std::size_t k = 0; k < N; ++k) out[k] = resample_poisson(c[k], rng);
  return out;
}

template <class T>
std::vector<T> resample_poisson(const std::vector<T>& c, Rng& rng) {
  std::vector<T> out;
  out.reserve(c.size());
  for (const auto& x : c) out.push_back(resample_poisson(x, rng));
  return out;
}

struct BootstrapResult {
  double estimate = 0.0;
  double std = 0.0;
  int resamples = 0;
  int failed = 0;  // resamples the estimator rejected (e.g. an emptied setting)
};

/// Point estimate on `counts` and sample standard deviation of the
/// estimator over Poisson resamples.  Resample r draws from
/// Rng(seed).split(r).  Counts types extend via an overload of
/// resample_poisson(const T&, Rng&) found by argument-dependent lookup.
template <class Counts, class Estimator>
BootstrapResult bootstrap_error(const Counts& counts, Estimator&& estimator, int resamples = 250, std::uint64_t seed = 0) {
  if (resamples < 2) throw std::invalid_argument("bootstrap needs at least 2 resamples");
  BootstrapResult res;
  res.estimate = estimator(counts);
  const Rng root(seed);
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(resamples));
  for (int r = 0; r < resamples; ++r) {
    auto rng = root.split(static_cast<std::uint64_t>(r));
    try {
      values.push_back(estimator(resample_poisson(counts, rng)));
    } catch (const std::invalid_argument&) {
      ++res.failed;
    } catch (const std::domain_error&) {
      ++res.failed;
    }
  }
  if (values.size() < 2 || res.failed * 10 > resamples) throw std::runtime_error("bootstrap: too many degenerate resamples");
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  res.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  res.resamples = static_cast<int>(values.size());
  return res;
}

// ---------------------------------------------------------------------------
// JSON

/// {"0,+": {"counts": [...], "discarded": ...}, ...}
inline json to_json(const StateCounts& c) {
  json j = json::object();
  for (int k = 0; k < kSettings; ++k) j[Setting::from_index(k).id()] = protocol::to_json(c[static_cast<std::size_t>(k)]);
  return j;
}

inline StateCounts state_counts_from_json(const json& j) {
  StateCounts c;
  for (int k = 0; k < kSettings; ++k) {
    const auto id = Setting::from_index(k).id();
    if (!j.contains(id)) throw std::invalid_argument("counts file lacks setting " + id);
    c[static_cast<std::size_t>(k)] = protocol::count_table_from_json(j.at(id));
  }
  return c;
}

}  // namespace qgt::tomography
