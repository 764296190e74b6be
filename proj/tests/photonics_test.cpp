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

#include "qgt/photonics.hpp"

#include <gtest/gtest.h>

#include <numbers>

#include "test_util.hpp"

using namespace qgt;
using namespace qgt::photonics;
using qgt::testing::max_abs;

namespace {

constexpr double kPi = std::numbers::pi;

Matrix cnot4() { return Operator::cnot().matrix(); }

Matrix hadamard_first_of_two() { return kron(Operator::hadamard().matrix(), Matrix::Identity(2, 2)); }

// Random composition of mzi / crosser / phase shifter elements.
Circuit random_circuit(Rng& rng, int length) {
  Circuit c;
  for (int k = 0; k < length; ++k) {
    int a = static_cast<int>(rng() % 4), b = static_cast<int>(rng() % 4);
    if (a == b) b = (a + 1) % 4;
    switch (rng() % 3) {
      case 0: c.push_back(CircuitElement::mzi(a, b, 2 * kPi * rng.uniform(), 2 * kPi * rng.uniform())); break;
      case 1: c.push_back(CircuitElement::crosser(a, b)); break;
      default: c.push_back(CircuitElement::phase(a, 2 * kPi * rng.uniform())); break;
    }
  }
  return c;
}

}  // namespace

TEST(photonics, mmi_examples) {
  const Matrix2 m = mmi_unitary();
  const Vector2 out = m * Vector2(1, 0);
  EXPECT_NEAR(std::abs(out(0) - kInvSqrt2), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(out(1) - kI * kInvSqrt2), 0.0, 1e-15);
  EXPECT_NEAR(std::norm(out(0)), 0.5, 1e-15);
  EXPECT_NEAR(std::norm(out(1)), 0.5, 1e-15);

  // Explicit product of [[1,i],[i,1]]/sqrt2 with itself: [[0,2i],[2i,0]]/2.
  Matrix2 twice_oracle;
  twice_oracle << 0, kI, kI, 0;
  EXPECT_LT(max_abs(m * m - twice_oracle), 1e-15);

  Rng rng(1);
  for (int k = 0; k < 20; ++k) {
    const Vector2 in = k % 2 ? Vector2(0, std::polar(1.0, rng.uniform())) : Vector2(std::polar(1.0, rng.uniform()), 0);
    const Vector2 o = m * in;
    EXPECT_NEAR(std::norm(o(0)), 0.5, 1e-15);
    EXPECT_NEAR(std::norm(o(1)), 0.5, 1e-15);
  }
}

TEST(photonics, mzi_examples) {
  // theta = pi: bar state, no power crosses; with phi = pi exactly identity.
  const Matrix2 bar = mzi_unitary(kPi, 0.3);
  EXPECT_LT(std::abs(bar(0, 1)), 1e-15);
  EXPECT_LT(std::abs(bar(1, 0)), 1e-15);
  EXPECT_LT(max_abs(mzi_unitary(kPi, kPi) - Matrix2::Identity()), 1e-15);

  // theta = 0: full crossover, i * X before the external phase.
  const Matrix2 cross = mzi_unitary(0.0, 0.0);
  Matrix2 ix;
  ix << 0, kI, kI, 0;
  EXPECT_LT(max_abs(cross - ix), 1e-15);

  const Vector2 half = mzi_unitary(kPi / 2, 0.0).col(0);
  EXPECT_NEAR(std::norm(half(0)), 0.5, 1e-15);
  EXPECT_NEAR(std::norm(half(1)), 0.5, 1e-15);
  EXPECT_TRUE(is_unitary(mzi_unitary(1.234, 5.678)));
}

TEST(photonics, crosser_examples) {
  Vector4 v;
  v << 0.5, 0.5 * kI, -0.5, 0.5;
  const PathRegister reg(v, Photon::A);
  const auto swapped = crosser(reg, 1, 3);
  EXPECT_EQ(swapped.modes()(1), v(3));
  EXPECT_EQ(swapped.modes()(3), v(1));
  EXPECT_EQ(crosser(swapped, 1, 3).modes(), v);
  EXPECT_EQ(circuit_unitary(local_cnot_circuit()), cnot4());
}

TEST(photonics, local_cnot_examples) {
  EXPECT_EQ(local_cnot_via_crosser(PathRegister::single_mode(2, Photon::A)).modes(), PathRegister::single_mode(3, Photon::A).modes());
  EXPECT_EQ(local_cnot_via_crosser(PathRegister::single_mode(0, Photon::A)).modes(), PathRegister::single_mode(0, Photon::A).modes());
  Vector4 sup;
  sup << 0, 0, kInvSqrt2, -kInvSqrt2;
  const auto out = local_cnot_via_crosser(PathRegister(sup, Photon::B));
  EXPECT_EQ(out.modes()(3), sup(2));
  EXPECT_EQ(out.modes()(2), sup(3));
}

TEST(photonics, local_cnot_matches_gate_property) {
  Rng rng(77);
  for (int trial = 0; trial < 1000; ++trial) {
    const Photon p = trial % 2 ? Photon::A : Photon::B;
    const auto state = qgt::testing::random_state(qubits_of(p), rng);
    const auto optical = local_cnot_via_crosser(PathRegister::from_state(state, p));
    const auto logical = apply_gate(state, Operator::cnot(), qubits_of(p));
    ASSERT_LT((optical.modes() - Vector4(logical.amplitudes())).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(photonics, m3_network_is_hadamard_on_qubit3) {
  EXPECT_LT(max_abs(circuit_unitary(m3_network()) - hadamard_first_of_two()), 1e-12);

  // |+>_3 |0>_4 -> |0>_3 group only; |->_3 -> |1>_3 group; |0>_3 -> 50/50.
  auto group_power = [](const PathRegister& r, int bit3) {
    return std::norm(r.modes()(2 * bit3)) + std::norm(r.modes()(2 * bit3 + 1));
  };
  Vector4 plus, minus;
  plus << kInvSqrt2, 0, kInvSqrt2, 0;
  minus << kInvSqrt2, 0, -kInvSqrt2, 0;
  EXPECT_NEAR(group_power(m3_basis_network(PathRegister(plus, Photon::B)), 0), 1.0, 1e-12);
  EXPECT_NEAR(group_power(m3_basis_network(PathRegister(minus, Photon::B)), 1), 1.0, 1e-12);
  const auto zero = m3_basis_network(PathRegister::single_mode(0, Photon::B));
  EXPECT_NEAR(group_power(zero, 0), 0.5, 1e-12);
  EXPECT_NEAR(group_power(zero, 1), 0.5, 1e-12);
  EXPECT_THROW(m3_basis_network(PathRegister::single_mode(0, Photon::A)), std::invalid_argument);
}

TEST(photonics, m3_detection_reproduces_x_statistics_property) {
  Rng rng(5);
  for (int trial = 0; trial < 500; ++trial) {
    const auto state = qgt::testing::random_state({3, 4}, rng);
    const auto out = m3_basis_network(PathRegister::from_state(state, Photon::B));
    const auto px = outcome_probabilities(state, 3, Basis::X);
    const double g0 = std::norm(out.modes()(0)) + std::norm(out.modes()(1));
    const double g1 = std::norm(out.modes()(2)) + std::norm(out.modes()(3));
    ASSERT_NEAR(g0, px[0], 1e-12);
    ASSERT_NEAR(g1, px[1], 1e-12);
  }
}

TEST(photonics, compositions_are_unitary_property) {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const auto c = random_circuit(rng, 1 + static_cast<int>(rng() % 12));
    ASSERT_TRUE(is_unitary(circuit_unitary(c), 1e-12));
    const auto reg = PathRegister::from_state(qgt::testing::random_state({1, 2}, rng), Photon::A);
    const auto out = propagate(reg, c);
    ASSERT_LT((out.modes() - circuit_unitary(c) * reg.modes()).cwiseAbs().maxCoeff(), 1e-12);
  }
  for (auto kind : {ElementKind::MMI, ElementKind::Crosser, ElementKind::PBRC})
    EXPECT_TRUE(is_unitary(CircuitElement{kind, {}, {0, 3}}.full_matrix()));
}

TEST(photonics, prepare_product_state_examples) {
  const PreparationSettings bar{};
  EXPECT_NEAR(fidelity(prepare_product_state(bar), PureState::basis(0, {1, 4})), 1.0, 1e-15);

  PreparationSettings plus0 = bar;
  plus0.mzis[0] = plus0.mzis[1] = {kPi / 2, 0.0};
  const auto s = prepare_product_state(plus0);
  const auto want = tensor(PureState(Vector2(kInvSqrt2, kInvSqrt2), {1}), PureState::basis(0, {4}));
  EXPECT_NEAR(fidelity(s, want), 1.0, 1e-15);

  PreparationSettings mismatched = bar;
  mismatched.mzis[0] = {kPi / 2, 0.0};
  EXPECT_THROW(prepare_product_state(mismatched), std::invalid_argument);
  PreparationSettings out_of_range = bar;
  out_of_range.mzis[2] = out_of_range.mzis[3] = {7.0, 0.0};
  EXPECT_THROW(prepare_product_state(out_of_range), std::invalid_argument);
}

TEST(photonics, all_sixteen_tomography_inputs_reachable) {
  const std::array<Vector2, 4> alphabet = {Vector2(1, 0), Vector2(0, 1), Vector2(kInvSqrt2, kInvSqrt2),
                                           Vector2(kInvSqrt2, kI * kInvSqrt2)};
  for (const auto& a : alphabet) {
    for (const auto& b : alphabet) {
      const auto prepared = prepare_product_state(PreparationSettings::for_states(a, b));
      const auto want = tensor(PureState(a, {1}), PureState(b, {4}));
      EXPECT_NEAR(fidelity(prepared, want), 1.0, 1e-12);
    }
  }
}

TEST(photonics, every_single_qubit_state_reachable_by_search) {
  // Independent of the closed form: coarse grid, then a shrinking pattern search.
  auto fid = [](const Vector2& target, double th, double ph) {
    return std::norm(target.dot(mzi_output({th, ph})));
  };
  Rng rng(13);
  for (int trial = 0; trial < 40; ++trial) {
    const Vector2 target = qgt::testing::random_qubit(rng);
    double best_t = 0, best_p = 0, best = -1;
    for (int i = 0; i < 64; ++i)
      for (int k = 0; k < 64; ++k) {
        const double t = 2 * kPi * i / 64, p = 2 * kPi * k / 64;
        const double f = fid(target, t, p);
        if (f > best) best = f, best_t = t, best_p = p;
      }
    double step = 2 * kPi / 64;
    while (step > 1e-12 && best < 1 - 1e-11) {
      bool moved = false;
      for (const auto& d : {std::pair{1, 0}, std::pair{-1, 0}, std::pair{0, 1}, std::pair{0, -1}}) {
        const double f = fid(target, best_t + d.first * step, best_p + d.second * step);
        if (f > best) best = f, best_t += d.first * step, best_p += d.second * step, moved = true;
      }
      if (!moved) step /= 2;
    }
    EXPECT_GE(best, 1 - 1e-10);
    EXPECT_GE(fid(target, mzi_settings_for(target).theta, mzi_settings_for(target).phi), 1 - 1e-12);
  }
}

TEST(photonics, measurement_setting_examples) {
  const auto zz = measurement_setting(Basis::Z, Basis::Z);
  for (int k = 0; k < 4; ++k) {
    Matrix pk = Matrix::Zero(4, 4);
    pk(k, k) = 1;
    EXPECT_LT(max_abs(zz[static_cast<std::size_t>(k)] - pk), 1e-12);
  }

  const auto xx = measurement_setting("X", "X");
  const auto phi = MixedState::from_pure(bell_state(BellKind::PhiPlus, {1, 4}));
  std::array<double, 4> p{};
  for (int k = 0; k < 4; ++k) p[static_cast<std::size_t>(k)] = (xx[static_cast<std::size_t>(k)] * phi.matrix()).trace().real();
  EXPECT_NEAR(p[0], 0.5, 1e-12);
  EXPECT_NEAR(p[1], 0.0, 1e-12);
  EXPECT_NEAR(p[2], 0.0, 1e-12);
  EXPECT_NEAR(p[3], 0.5, 1e-12);

  for (auto b1 : {Basis::Z, Basis::X, Basis::Y}) {
    for (auto b4 : {Basis::Z, Basis::X, Basis::Y}) {
      const auto proj = measurement_setting(b1, b4);
      Matrix sum = Matrix::Zero(4, 4);
      for (int k = 0; k < 4; ++k) {
        sum += proj[static_cast<std::size_t>(k)];
        // analyzer projectors equal the eigenbasis outer products
        const Vector e = kron(basis_vector(b1, k >> 1), basis_vector(b4, k & 1));
        EXPECT_LT(max_abs(proj[static_cast<std::size_t>(k)] - e * e.adjoint()), 1e-12);
      }
      EXPECT_LT(max_abs(sum - Matrix::Identity(4, 4)), 1e-12);
    }
  }
  EXPECT_THROW(measurement_setting("Q", "Z"), std::invalid_argument);
}

TEST(photonics, chip_circuits_realize_local_operations) {
  // Bar preparation and Z analyzers: chip A is exactly the CNOT on (1, 2).
  const PreparationSettings bar{};
  const Matrix ua = circuit_unitary(chip_a_circuit(bar, Basis::Z));
  const Matrix prep = circuit_unitary(preparation_circuit(Photon::A, bar));
  EXPECT_LT(max_abs(ua - cnot4() * prep), 1e-12);
  // Chip B: H on qubit 3 after the CNOT on (3, 4).
  const Matrix ub = circuit_unitary(chip_b_circuit(bar, Basis::Z));
  const Matrix prep_b = circuit_unitary(preparation_circuit(Photon::B, bar));
  EXPECT_LT(max_abs(ub - hadamard_first_of_two() * cnot4() * prep_b), 1e-12);
}

TEST(photonics, circuit_json_roundtrip_and_errors) {
  const auto c = chip_b_circuit(PreparationSettings::for_states(Vector2(1, 0), Vector2(kInvSqrt2, kInvSqrt2)), Basis::Y);
  const auto back = circuit_from_json(json::parse(circuit_to_json(c).dump()));
  EXPECT_LT(max_abs(circuit_unitary(back) - circuit_unitary(c)), 1e-15);
  EXPECT_THROW(circuit_from_json(json::parse(R"([{"kind":"Laser","modes":[0,1]}])")), std::invalid_argument);
  EXPECT_THROW(circuit_from_json(json::parse(R"([{"kind":"MZI","params":[1.0],"modes":[0,1]}])")), std::invalid_argument);
  EXPECT_THROW(circuit_from_json(json::parse(R"([{"kind":"MMI","modes":[0,7]}])")), std::out_of_range);
  EXPECT_THROW(circuit_from_json(json::parse(R"({"kind":"MMI"})")), std::invalid_argument);
}
