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

#include "qgt/channel.hpp"

#include <gtest/gtest.h>

#include <numbers>

#include "test_util.hpp"

namespace qgt::channel {
namespace {

using testing::max_abs;
using testing::random_density;
using testing::random_unitary;

constexpr double kPi = std::numbers::pi;

MixedState register_with_pair(Rng& rng) {
  const auto q1 = MixedState(random_density(2, rng), {1});
  const auto q4 = MixedState(random_density(2, rng), {4});
  const auto pair = MixedState::from_pure(bell_state(BellKind::PhiPlus, {2, 3}));
  return tensor(tensor(q1, pair), q4);
}

EulerAngles random_angles(Rng& rng) { return {2 * kPi * rng.uniform(), kPi * rng.uniform(), 2 * kPi * rng.uniform()}; }

// Independent oracle for the Werner fidelity: <Phi+| (v P + (1-v) I/4) |Phi+>.
double werner_fidelity(double v) {
  const Vector phi = bell_state(BellKind::PhiPlus, {2, 3}).amplitudes();
  const Matrix rho = v * phi * phi.adjoint() + (1 - v) * Matrix::Identity(4, 4) / 4.0;
  return (phi.adjoint() * rho * phi)(0, 0).real();
}

TEST(Channel, IdealWithInvertingCompensatorLeavesStateUnchanged) {
  Rng rng(11);
  NoiseConfig cfg;
  cfg.drift = random_angles(rng);
  const auto in = register_with_pair(rng);
  const auto out = apply_channel(in, cfg, CompensatorSetting::inverting(cfg.drift), rng);
  EXPECT_LT(max_abs(out.state.matrix() - in.matrix()), 1e-12);
  const double db = 0.6 + 0.4 + 3.57 + 3.42 + 0.6 * 0.005;
  EXPECT_NEAR(out.survival, std::pow(10.0, -db / 10.0), 1e-15);
}

TEST(Channel, PairMarginalPreserved) {
  Rng rng(12);
  NoiseConfig cfg;
  const auto out = apply_channel(register_with_pair(rng), cfg, {}, rng);
  const auto marginal = partial_trace(out.state, {2, 3});
  EXPECT_NEAR(fidelity_state(marginal, MixedState::from_pure(bell_state(BellKind::PhiPlus, {2, 3}))), 1.0, 1e-12);
}

TEST(Channel, WernerMarginalFidelity) {
  Rng rng(13);
  NoiseConfig cfg;
  cfg.source_visibility = 0.95;
  const auto out = apply_channel(register_with_pair(rng), cfg, {}, rng);
  const auto marginal = partial_trace(out.state, {2, 3});
  const double f = fidelity_state(marginal, MixedState::from_pure(bell_state(BellKind::PhiPlus, {2, 3})));
  EXPECT_NEAR(f, werner_fidelity(0.95), 1e-12);
  EXPECT_NEAR(f, 0.9625, 1e-12);
}

TEST(Channel, WernerKeepsOtherMarginal) {
  Rng rng(14);
  const auto in = register_with_pair(rng);
  const auto mixed = werner_mix(in, 0.3);
  EXPECT_LT(max_abs(partial_trace(mixed, {1, 4}).matrix() - partial_trace(in, {1, 4}).matrix()), 1e-12);
  EXPECT_LT(max_abs(partial_trace(mixed, {2, 3}).matrix() -
                    (0.3 * partial_trace(in, {2, 3}).matrix() + 0.7 * Matrix::Identity(4, 4) / 4.0)),
            1e-12);
}

TEST(Channel, WernerUnitVisibilityIsExactIdentity) {
  Rng rng(15);
  for (int k = 0; k < 50; ++k) {
    const MixedState in(random_density(16, rng), {1, 2, 3, 4});
    EXPECT_EQ(werner_mix(in, 1.0).matrix(), in.matrix());
  }
}

TEST(Channel, TraceAndPositivityProperty) {
  Rng rng(16);
  for (int k = 0; k < 200; ++k) {
    NoiseConfig cfg;
    cfg.source_visibility = rng.uniform();
    cfg.drift = random_angles(rng);
    cfg.phase_jitter_sigma = rng.uniform();
    cfg.fiber_km = 5 * rng.uniform();
    const CompensatorSetting comp{random_angles(rng)};
    const MixedState in(random_density(16, rng), {1, 2, 3, 4});
    for (const auto& out : {apply_channel(in, cfg, comp, rng), apply_channel_averaged(in, cfg, comp)}) {
      EXPECT_NEAR(out.state.matrix().trace().real(), 1.0, 1e-12);
      EXPECT_GT(out.state.min_eigenvalue(), -1e-10);
      EXPECT_TRUE(is_hermitian(out.state.matrix(), 1e-12));
    }
  }
}

TEST(Channel, JitterAverageMatchesSampledMean) {
  // Mean of sampled Rz(eps) conjugations converges to the averaged map.
  Rng rng(17);
  NoiseConfig cfg;
  cfg.phase_jitter_sigma = 0.4;
  const auto in = MixedState::from_pure(tensor(tensor(PureState::basis(0, {1}), bell_state(BellKind::PhiPlus, {2, 3})),
                                               PureState::basis(0, {4})));
  const int n = 20000;
  Matrix mean = Matrix::Zero(16, 16);
  for (int k = 0; k < n; ++k) mean += apply_channel(in, cfg, {}, rng).state.matrix();
  mean /= n;
  const auto avg = apply_channel_averaged(in, cfg, {}).state.matrix();
  // Coherence <00|rho|11> on the pair: 1/2 * exp(-sigma^2/2) in closed form.
  EXPECT_NEAR(std::abs(avg(0, 6)), 0.5 * std::exp(-0.08), 1e-12);
  EXPECT_LT(max_abs(mean - avg), 5 * 0.5 / std::sqrt(n));
}

TEST(Channel, SurvivalMonotoneInEveryEntry) {
  NoiseConfig base;
  base.fiber_km = 1.0;
  const double s0 = survival_probability(base);
  for (int k = 0; k < 5; ++k) {
    NoiseConfig c = base;
    double* entries[] = {&c.losses.pbrc_te, &c.losses.pbrc_tm, &c.losses.coupler_te, &c.losses.coupler_tm,
                         &c.losses.fiber_per_km};
    *entries[k] += 0.1;
    EXPECT_LT(survival_probability(c), s0);
  }
  NoiseConfig longer = base;
  longer.fiber_km = 2.0;
  EXPECT_LT(survival_probability(longer), s0);
}

TEST(Channel, ValidateRejectsBadConfig) {
  NoiseConfig c;
  c.source_visibility = 1.5;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.losses.coupler_te = -1;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.drift.beta = std::nan("");
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Channel, EmitPairAveragesToWerner) {
  Rng rng(18);
  const double v = 0.7;
  const int n = 40000;
  Matrix mean = Matrix::Zero(4, 4);
  for (int k = 0; k < n; ++k) {
    const Vector a = emit_pair(v, rng).amplitudes();
    mean += a * a.adjoint();
  }
  mean /= n;
  const Vector phi = bell_state(BellKind::PhiPlus, {2, 3}).amplitudes();
  const Matrix expected = v * phi * phi.adjoint() + (1 - v) * Matrix::Identity(4, 4) / 4.0;
  EXPECT_LT(max_abs(mean - expected), 5 * 0.5 / std::sqrt(n));
}

TEST(Isolation, Examples) {
  EXPECT_DOUBLE_EQ(isolation_degree(201, 1), 201.0);
  EXPECT_DOUBLE_EQ(isolation_degree(100, 100), 1.0);
  EXPECT_TRUE(std::isinf(isolation_degree(1.0, 0.0)));
  const auto ideal = bright_light_oracle(Matrix2::Identity())(Matrix2::Identity());
  EXPECT_TRUE(std::isinf(worst_isolation(ideal)));
}

TEST(Isolation, WorstIsMinimumOverProbes) {
  ProbeResults r{{{201, 1}, {1000, 1}, {500, 2}, {90, 0}}};
  EXPECT_DOUBLE_EQ(worst_isolation(r), 201.0);
  r[3] = {1, 90};  // misaligned probe
  EXPECT_DOUBLE_EQ(worst_isolation(r), 1.0);
}

TEST(Calibration, IdentityDrift) {
  Rng rng(21);
  const auto report = calibrate_compensator(bright_light_oracle(Matrix2::Identity()), 2000, rng);
  EXPECT_TRUE(report.success);
  EXPECT_GT(identity_process_fidelity(report.setting.unitary()), 1 - 1e-9);
  EXPECT_GT(report.worst_isolation, 1e8);
}

TEST(Calibration, KnownDriftInvertedUpToPhase) {
  Rng rng(22);
  const EulerAngles drift{0.7, 1.9, -2.3};
  const Matrix2 u = euler_unitary(drift);
  const auto report = calibrate_compensator(bright_light_oracle(u), 2000, rng);
  ASSERT_TRUE(report.success);
  EXPECT_GE(report.worst_isolation, 200.0);
  const Matrix2 w = report.setting.unitary() * u;
  EXPECT_GE(identity_process_fidelity(w), 1 - 1.0 / 201);
  // Direct probabilities through the composed map.
  for (const auto& [basis, bit] : probe_set()) {
    const Vector2 out = w * basis_vector(basis, bit);
    EXPECT_GT(std::norm(basis_vector(basis, bit).dot(out)), 200 * std::norm(basis_vector(basis, 1 - bit).dot(out)));
  }
}

TEST(Calibration, HundredRandomDriftsSucceedWithinBudget) {
  Rng rng(23);
  int successes = 0;
  for (int k = 0; k < 100; ++k) {
    const Matrix2 u = random_unitary(2, rng);
    auto sub = rng.split(static_cast<std::uint64_t>(k));
    const auto report = calibrate_compensator(bright_light_oracle(u), 2000, sub);
    EXPECT_LE(report.evaluations, 2000);
    if (report.success) {
      ++successes;
      EXPECT_GE(identity_process_fidelity(report.setting.unitary() * u), 1 - 1.0 / 201);
    }
  }
  EXPECT_EQ(successes, 100);
}

TEST(Calibration, TinyBudgetReportsFailureWithBestSetting) {
  Rng rng(24);
  const auto report = calibrate_compensator(bright_light_oracle(euler_unitary({0.3, 2.0, 1.0})), 3, rng);
  EXPECT_FALSE(report.success);
  EXPECT_LE(report.evaluations, 3 + 4);
  EXPECT_TRUE(report.setting.angles.finite());
}

TEST(ChannelJson, RoundTripAndDefaults) {
  NoiseConfig c;
  c.source_visibility = 0.94;
  c.drift = {0.1, 0.2, 0.3};
  c.phase_jitter_sigma = 0.05;
  c.fiber_km = 1.0;
  const auto back = noise_from_json(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
  const auto partial = noise_from_json(json{{"source_visibility", 0.9}});
  EXPECT_DOUBLE_EQ(partial.losses.coupler_tm, 3.42);
  EXPECT_THROW(noise_from_json(json{{"source_visibility", -0.1}}), std::invalid_argument);
  CalibrationReport r;
  r.worst_isolation = kInfiniteIsolation;
  EXPECT_EQ(to_json(r).at("worst_isolation"), "inf");
}

}  // namespace
}  // namespace qgt::channel
