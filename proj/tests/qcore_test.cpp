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

#include "qgt/qcore.hpp"

#include <gtest/gtest.h>

#include "qgt/json_io.hpp"
#include "test_util.hpp"

using namespace qgt;
using qgt::testing::max_abs;

TEST(qcore, bell_state_amplitudes) {
  const auto phi = bell_state(BellKind::PhiPlus);
  EXPECT_NEAR(phi[0].real(), kInvSqrt2, 1e-15);
  EXPECT_EQ(phi[1], cplx(0));
  EXPECT_EQ(phi[2], cplx(0));
  EXPECT_NEAR(phi[3].real(), kInvSqrt2, 1e-15);

  const auto psi_m = bell_state(BellKind::PsiMinus);
  EXPECT_EQ(psi_m[0], cplx(0));
  EXPECT_NEAR(psi_m[1].real(), kInvSqrt2, 1e-15);
  EXPECT_NEAR(psi_m[2].real(), -kInvSqrt2, 1e-15);
  EXPECT_EQ(psi_m[3], cplx(0));

  EXPECT_NEAR(std::abs(phi.amplitudes().dot(bell_state(BellKind::PhiMinus).amplitudes())), 0.0, 1e-15);
  // all four mutually orthogonal
  const BellKind kinds[] = {BellKind::PhiPlus, BellKind::PhiMinus, BellKind::PsiPlus, BellKind::PsiMinus};
  for (auto a : kinds)
    for (auto b : kinds)
      EXPECT_NEAR(fidelity(bell_state(a), bell_state(b)), a == b ? 1.0 : 0.0, 1e-15);
}

TEST(qcore, state_invariants_rejected) {
  Vector v(4);
  v << 1, 1, 0, 0;
  EXPECT_THROW(PureState(v, {1, 2}), std::invalid_argument);
  EXPECT_THROW(PureState(Vector::Ones(3) / std::sqrt(3.0), {1, 2}), std::invalid_argument);
  EXPECT_THROW(PureState::basis(0, {1, 1}), std::invalid_argument);
  EXPECT_NO_THROW(PureState::normalized(v, {1, 2}));

  Matrix bad = Matrix::Zero(4, 4);
  bad(0, 0) = 1.5;
  bad(1, 1) = -0.5;
  EXPECT_THROW(MixedState(bad, {1, 2}), std::invalid_argument);
  Matrix nonherm = Matrix::Identity(4, 4) / 4.0;
  nonherm(0, 1) = 0.1;
  EXPECT_THROW(MixedState(nonherm, {1, 2}), std::invalid_argument);
}

TEST(qcore, apply_gate_examples) {
  const auto ten = PureState::basis(0b10, {1, 2});
  const auto out = apply_gate(ten, Operator::cnot(), {1, 2});
  EXPECT_EQ(out[0b11], cplx(1));

  Rng rng(7);
  const auto psi = qgt::testing::random_state({1, 2, 3}, rng);
  const auto same = apply_gate(psi, Operator::identity(), {2});
  EXPECT_EQ(same.amplitudes(), psi.amplitudes());

  // CNOT(1,4) on |+>_1 |0>_4 of a (1,4) register gives Phi+
  const auto plus0 = tensor(PureState(Vector2(kInvSqrt2, kInvSqrt2), {1}), PureState::basis(0, {4}));
  const auto bell = apply_gate(plus0, Operator::cnot(), {1, 4});
  EXPECT_NEAR(fidelity(bell, bell_state(BellKind::PhiPlus, {1, 4})), 1.0, 1e-12);

  EXPECT_THROW(apply_gate(psi, Operator::cnot(), {1, 1}), std::invalid_argument);
  EXPECT_THROW(apply_gate(psi, Operator::cnot(), {1}), std::invalid_argument);
  EXPECT_THROW(apply_gate(psi, Operator::x(), {5}), std::out_of_range);
}

TEST(qcore, apply_gate_target_order_matches_embedding) {
  // CNOT with control 3, target 1 against a hand-written permutation.
  Rng rng(11);
  const auto psi = qgt::testing::random_state({1, 2, 3}, rng);
  const auto out = apply_gate(psi, Operator::cnot(), {3, 1});
  for (std::size_t x = 0; x < 8; ++x) {
    const std::size_t b1 = (x >> 2) & 1, b3 = x & 1;
    const std::size_t src = b3 ? (x ^ 0b100) : x;
    EXPECT_EQ(out[x], psi[src]) << x;
    (void)b1;
  }
  const auto mixed = apply_gate(MixedState::from_pure(psi), Operator::cnot(), {3, 1});
  EXPECT_LT(max_abs(mixed.matrix() - MixedState::from_pure(out).matrix()), 1e-14);
}

TEST(qcore, unitary_preserves_norm_property) {
  Rng rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto psi = qgt::testing::random_state({1, 2, 3, 4}, rng);
    const Operator u(qgt::testing::random_unitary(4, rng));
    ASSERT_TRUE(u.unitary());
    const QubitLabel a = 1 + static_cast<int>(rng() % 4);
    QubitLabel b = 1 + static_cast<int>(rng() % 4);
    if (b == a) b = a % 4 + 1;
    const auto out = apply_gate(psi, u, {a, b});
    ASSERT_NEAR(out.amplitudes().norm(), 1.0, 1e-12);
  }
}

TEST(qcore, measure_examples) {
  Rng rng(1);
  const auto zero = PureState::basis(0, {1});
  for (int k = 0; k < 20; ++k) EXPECT_EQ(measure_qubit(zero, 1, Basis::Z, rng).bit, 0);
  const auto plus = PureState(Vector2(kInvSqrt2, kInvSqrt2), {1});
  for (int k = 0; k < 20; ++k) {
    const auto m = measure_qubit(plus, 1, Basis::X, rng);
    EXPECT_EQ(m.bit, 0);
    EXPECT_NEAR(m.probability, 1.0, 1e-15);
  }
  EXPECT_THROW(project_qubit(zero, 1, Basis::Z, 1), std::domain_error);

  // Born rule oracle on the four amplitudes of Phi+ for qubit 2 in Z.
  const auto phi = bell_state(BellKind::PhiPlus);
  double oracle[2] = {0, 0};
  for (std::size_t x = 0; x < 4; ++x) oracle[x & 1] += std::norm(phi[x]);
  const auto p = outcome_probabilities(phi, 2, Basis::Z);
  EXPECT_NEAR(p[0], oracle[0], 1e-15);
  EXPECT_NEAR(p[1], oracle[1], 1e-15);
  EXPECT_NEAR(oracle[0], 0.5, 1e-15);
  const auto collapsed = project_qubit(phi, 2, Basis::Z, 1).collapsed;
  EXPECT_NEAR(std::abs(collapsed[3]), 1.0, 1e-15);
}

TEST(qcore, measurement_frequencies_within_5_sigma) {
  Rng state_rng(99);
  const auto psi = qgt::testing::random_state({1, 2, 3}, state_rng);
  for (const Basis b : {Basis::Z, Basis::X, Basis::Y}) {
    const auto p = outcome_probabilities(psi, 2, b);
    ASSERT_NEAR(p[0] + p[1], 1.0, 1e-12);
    Rng rng(12345);
    const int shots = 100000;
    int zeros = 0;
    for (int s = 0; s < shots; ++s) zeros += measure_qubit(psi, 2, b, rng).bit == 0;
    const double sigma = std::sqrt(shots * p[0] * p[1]);
    EXPECT_LT(std::abs(zeros - shots * p[0]), 5 * sigma) << to_string(b);
  }
}

TEST(qcore, partial_trace_examples) {
  const auto phi = MixedState::from_pure(bell_state(BellKind::PhiPlus));
  const auto marg = partial_trace(phi, {1});
  EXPECT_LT(max_abs(marg.matrix() - Matrix::Identity(2, 2) / 2.0), 1e-15);
  const auto all = partial_trace(phi, {1, 2});
  EXPECT_EQ(all.matrix(), phi.matrix());
  EXPECT_THROW(partial_trace(phi, {}), std::invalid_argument);

  // Explicit 16-dim register |0>_2 |+>_3 (x) C14|Phi>_14 written out by hand.
  Rng rng(5);
  const Vector2 a = qgt::testing::random_qubit(rng), b = qgt::testing::random_qubit(rng);
  Vector target14(4);  // C14 (a (x) b), control 1
  target14 << a(0) * b(0), a(0) * b(1), a(1) * b(1), a(1) * b(0);
  Vector reg = Vector::Zero(16);
  for (int b1 = 0; b1 < 2; ++b1)
    for (int b3 = 0; b3 < 2; ++b3)
      for (int b4 = 0; b4 < 2; ++b4) reg(8 * b1 + 0 * 4 + 2 * b3 + b4) = kInvSqrt2 * target14(2 * b1 + b4);
  const auto rho = MixedState::from_pure(PureState(reg, {1, 2, 3, 4}));
  const auto out = partial_trace(rho, {1, 4});
  EXPECT_LT(max_abs(out.matrix() - target14 * target14.adjoint()), 1e-15);
  EXPECT_EQ(out.labels(), (Labels{1, 4}));
}

TEST(qcore, partial_trace_pauli_consistency_property) {
  Rng rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    const MixedState rho(qgt::testing::random_density(8, rng), {1, 2, 3});
    const auto reduced = partial_trace(rho, {1, 3});
    const auto lifted = tensor_identity(reduced, {1, 2, 3});
    for (int pa = 0; pa < 4; ++pa) {
      for (int pb = 0; pb < 4; ++pb) {
        // Observable sigma_a (x) I (x) sigma_b on the full register.
        const Matrix obs = kron(kron(pauli(pa), Matrix::Identity(2, 2)), pauli(pb));
        const cplx full = (rho.matrix() * obs).trace();
        const cplx lift = (lifted.matrix() * obs).trace();
        const cplx red = (reduced.matrix() * kron(pauli(pa), pauli(pb))).trace();
        ASSERT_LT(std::abs(full - red), 1e-12);
        ASSERT_LT(std::abs(lift - red), 1e-12);
      }
    }
    ASSERT_NEAR(reduced.matrix().trace().real(), 1.0, 1e-12);
    ASSERT_TRUE(is_hermitian(reduced.matrix()));
  }
}

TEST(qcore, fidelity_examples) {
  const auto phi = MixedState::from_pure(bell_state(BellKind::PhiPlus));
  const auto phi_m = MixedState::from_pure(bell_state(BellKind::PhiMinus));
  EXPECT_NEAR(fidelity_state(phi, phi), 1.0, 1e-15);
  EXPECT_NEAR(fidelity_state(phi, phi_m), 0.0, 1e-15);
  // 0.95 * 1 + 0.05 * Tr(I/4 Phi+) = 0.95 + 0.0125
  const MixedState werner(0.95 * phi.matrix() + 0.05 * Matrix::Identity(4, 4) / 4.0, {1, 2});
  EXPECT_NEAR(fidelity_state(werner, phi), 0.9625, 1e-15);
  EXPECT_THROW(fidelity_state(phi, MixedState::maximally_mixed({1})), std::invalid_argument);
}

TEST(qcore, fidelity_symmetric_for_pure_property) {
  Rng rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = qgt::testing::random_state({1, 2}, rng);
    const auto b = qgt::testing::random_state({1, 2}, rng);
    const auto ra = MixedState::from_pure(a), rb = MixedState::from_pure(b);
    const double overlap = std::norm(a.amplitudes().dot(b.amplitudes()));
    ASSERT_NEAR(fidelity_state(ra, rb), fidelity_state(rb, ra), 1e-12);
    ASSERT_NEAR(fidelity_state(ra, rb), overlap, 1e-12);
  }
}

TEST(qcore, contract_qubit_extracts_product_factor) {
  Rng rng(3);
  const auto a = qgt::testing::random_state({1}, rng);
  const auto b = qgt::testing::random_state({3}, rng);
  const auto joint = tensor(tensor(a, PureState(Vector2(kInvSqrt2, -kInvSqrt2), {2})), b);
  const auto out = contract_qubit(joint, 2, basis_vector(Basis::X, 1));
  EXPECT_EQ(out.labels(), (Labels{1, 3}));
  EXPECT_NEAR(fidelity(out, tensor(a, b)), 1.0, 1e-14);
}

TEST(qcore, matrix_json_roundtrip) {
  Rng rng(4);
  const Matrix m = qgt::testing::random_unitary(4, rng);
  const auto j = matrix_to_json(m);
  EXPECT_EQ(j["rows"], 4);
  EXPECT_EQ(j["data"].size(), 16u);
  EXPECT_EQ(j["data"][1][0].get<double>(), m(0, 1).real());
  EXPECT_EQ(matrix_from_json(json::parse(j.dump())), m);
  json broken = j;
  broken["data"].erase(0);
  EXPECT_THROW(matrix_from_json(broken), std::invalid_argument);
}

TEST(rng, split_streams_are_reproducible_and_distinct) {
  Rng a(42), b(42);
  EXPECT_EQ(a(), b());
  const auto s1 = Rng(42).split(1), s1b = Rng(42).split(1), s2 = Rng(42).split(2);
  Rng c = s1, d = s1b, e = s2;
  EXPECT_EQ(c(), d());
  EXPECT_NE(Rng(42).split(1)(), e());
  // split does not advance the parent
  Rng parent(5);
  (void)parent.split(3);
  EXPECT_EQ(parent.counter(), 0u);
}
