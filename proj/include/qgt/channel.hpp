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

// Chip-to-chip interconnect model.
//
// The shared pair (qubits 2 and 3) is emitted on chip B as a Werner mixture
// of |Phi+>; qubit 3 is the transmitted qubit.  In the fiber it picks up a
// fixed polarization drift, then the compensator on arrival, then a per-trial
// Z rotation.  Insertion loss is classical: coincidence post-selection turns
// it into a rate factor, so it never touches the state.

#pragma once

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>

#include "qgt/json_io.hpp"
#include "qgt/qcore.hpp"

namespace qgt::channel {

inline constexpr QubitLabel kTransmittedQubit = 3;
inline const Labels kPairQubits{2, 3};
inline constexpr double kInfiniteIsolation = std::numeric_limits<double>::infinity();
inline constexpr double kIsolationThreshold = 200.0;

/// Z-Y-Z Euler angles: U = Rz(alpha) Ry(beta) Rz(gamma).
struct EulerAngles {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  bool finite() const { return std::isfinite(alpha) && std::isfinite(beta) && std::isfinite(gamma); }
};

inline Matrix2 euler_unitary(const EulerAngles& e) {
  return Operator::rz(e.alpha).matrix() * Operator::ry(e.beta).matrix() * Operator::rz(e.gamma).matrix();
}

inline EulerAngles inverse(const EulerAngles& e) { return {-e.gamma, -e.beta, -e.alpha}; }

/// Insertion losses in dB along the transmitted photon's path.
struct LossTable {
  double pbrc_te = 0.6;
  double pbrc_tm = 0.4;
  double coupler_te = 3.57;
  double coupler_tm = 3.42;
  double fiber_per_km = 0.6;
};

struct NoiseConfig {
  double source_visibility = 1.0;
  EulerAngles drift{};
  double phase_jitter_sigma = 0.0;
  LossTable losses{};
  double fiber_km = 0.005;

  void validate() const {
    if (!(source_visibility >= 0.0 && source_visibility <= 1.0)) throw std::invalid_argument("source_visibility must lie in [0, 1]");
    if (!drift.finite()) throw std::invalid_argument("drift angles must be finite");
    if (!(phase_jitter_sigma >= 0.0) || !std::isfinite(phase_jitter_sigma)) throw std::invalid_argument("phase_jitter_sigma must be >= 0");
    if (!(fiber_km >= 0.0) || !std::isfinite(fiber_km)) throw std::invalid_argument("fiber_km must be >= 0");
    for (double db : {losses.pbrc_te, losses.pbrc_tm, losses.coupler_te, losses.coupler_tm, losses.fiber_per_km})
      if (!(db >= 0.0) || !std::isfinite(db)) throw std::invalid_argument("loss entries must be >= 0 dB");
  }
};

struct CompensatorSetting {
  EulerAngles angles{};
  Matrix2 unitary() const { return euler_unitary(angles); }
  static CompensatorSetting inverting(const EulerAngles& drift) { return {inverse(drift)}; }
};

/// Path budget: two PBRC passes, two chip-fiber couplers and the fiber.
inline double total_loss_db(const NoiseConfig& cfg) {
  const auto& l = cfg.losses;
  return l.pbrc_te + l.pbrc_tm + l.coupler_te + l.coupler_tm + l.fiber_per_km * cfg.fiber_km;
}

inline double survival_probability(const NoiseConfig& cfg) { return std::pow(10.0, -total_loss_db(cfg) / 10.0); }

/// rho -> v rho + (1 - v) (I/4 on the pair (x) marginal of the rest).
inline MixedState werner_mix(const MixedState& state, double v, const Labels& pair = kPairQubits) {
  if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("visibility must lie in [0, 1]");
  if (v == 1.0) return state;
  Labels rest;
  for (auto q : state.labels())
    if (std::find(pair.begin(), pair.end(), q) == pair.end()) rest.push_back(q);
  for (auto q : pair) (void)state.position(q);
  const Matrix noise = rest.empty() ? MixedState::maximally_mixed(state.labels()).matrix()
                                    : tensor_identity(partial_trace(state, rest), state.labels()).matrix();
  return MixedState::trusted(v * state.matrix() + (1.0 - v) * noise, state.labels());
}

/// Single draw of the per-trial fiber phase.
inline double sample_jitter(const NoiseConfig& cfg, Rng& rng) { return rng.normal(cfg.phase_jitter_sigma); }

/// Coherent part of the link acting on the transmitted qubit for one trial.
inline Matrix2 link_unitary(const NoiseConfig& cfg, const CompensatorSetting& comp, double jitter) {
  return Operator::rz(jitter).matrix() * comp.unitary() * euler_unitary(cfg.drift);
}

struct ChannelOutput {
  MixedState state;
  double survival;
  double jitter;
};

/// One trial: Werner mixing at the source, then drift, compensator and a
/// sampled Z(eps), eps ~ Normal(0, sigma), on qubit 3.
inline ChannelOutput apply_channel(const MixedState& state, const NoiseConfig& cfg, const CompensatorSetting& comp, Rng& rng) {
  cfg.validate();
  const double eps = sample_jitter(cfg, rng);
  const auto mixed = werner_mix(state, cfg.source_visibility);
  const auto out = apply_gate(mixed, Operator(link_unitary(cfg, comp, eps), "link"), {kTransmittedQubit});
  return {out, survival_probability(cfg), eps};
}

/// Ensemble over the jitter distribution: the Z rotation averages to
/// dephasing with coherence factor exp(-sigma^2 / 2).
inline ChannelOutput apply_channel_averaged(const MixedState& state, const NoiseConfig& cfg, const CompensatorSetting& comp) {
  cfg.validate();
  const auto mixed = werner_mix(state, cfg.source_visibility);
  auto out = apply_gate(mixed, Operator(link_unitary(cfg, comp, 0.0), "link"), {kTransmittedQubit});
  if (cfg.phase_jitter_sigma > 0.0) {
    const double flip = (1.0 - std::exp(-0.5 * cfg.phase_jitter_sigma * cfg.phase_jitter_sigma)) / 2.0;
    const auto flipped = apply_gate(out, Operator::z(), {kTransmittedQubit});
    out = MixedState::trusted((1.0 - flip) * out.matrix() + flip * flipped.matrix(), out.labels());
  }
  return {out, survival_probability(cfg), 0.0};
}

/// Pure-state trajectory of the source: |Phi+>_23 with probability v,
/// otherwise a uniformly random computational basis pair (whose mixture is
/// I/4).  Consumes at most two draws.
inline PureState emit_pair(double v, Rng& rng) {
  if (v >= 1.0 || rng.uniform() < v) return bell_state(BellKind::PhiPlus, kPairQubits);
  return PureState::basis(static_cast<std::size_t>(rng() & 3U), kPairQubits);
}

// ---------------------------------------------------------------------------
// Polarization compensation

/// max/min of the two outcomes of one probe; infinite when min is zero.
inline double isolation_degree(double max_count, double min_count) {
  if (max_count < min_count) std::swap(max_count, min_count);
  if (min_count <= 0.0) return kInfiniteIsolation;
  return max_count / min_count;
}

/// Outcomes for one probe: its own state and its orthogonal partner.
struct ProbeResult {
  double expected = 0.0;
  double orthogonal = 0.0;
  double isolation() const { return isolation_degree(expected, orthogonal); }
  bool aligned() const { return expected >= orthogonal; }
};

inline constexpr int kProbeCount = 4;
using ProbeResults = std::array<ProbeResult, kProbeCount>;

/// Channel figure: the worst probe.
inline double worst_isolation(const ProbeResults& results) {
  double worst = kInfiniteIsolation;
  for (const auto& r : results) worst = std::min(worst, r.aligned() ? r.isolation() : 1.0);
  return worst;
}

/// Probe states |0>, |1>, |+>, |+i> with their analysis bases.
inline std::array<std::pair<Basis, int>, kProbeCount> probe_set() {
  return {{{Basis::Z, 0}, {Basis::Z, 1}, {Basis::X, 0}, {Basis::Y, 0}}};
}

/// Transmits every probe through the link with the given compensator and
/// reports analysis outcomes.
using ProbeOracle = std::function<ProbeResults(const Matrix2& compensator)>;

/// Bright-light probing: exact outcome probabilities, no shot noise.  The
/// drift is captured but never exposed to the caller.
inline ProbeOracle bright_light_oracle(const Matrix2& drift) {
  return [drift](const Matrix2& compensator) {
    const Matrix2 w = compensator * drift;
    ProbeResults out{};
    std::size_t k = 0;
    for (const auto& [basis, bit] : probe_set()) {
      const Vector2 sent = basis_vector(basis, bit);
      const Vector2 got = w * sent;
      out[k].expected = std::norm(sent.dot(got));
      out[k].orthogonal = std::norm(basis_vector(basis, 1 - bit).dot(got));
      ++k;
    }
    return out;
  };
}

struct CalibrationReport {
  CompensatorSetting setting;
  double worst_isolation = 0.0;
  int evaluations = 0;
  int restarts_used = 0;
  bool success = false;
};

namespace detail {

struct SimplexContext {
  const ProbeOracle* oracle;
  int evaluations = 0;
  double best_value = std::numeric_limits<double>::infinity();
  EulerAngles best{};
};

inline double simplex_objective(const gsl_vector* x, void* params) {
  auto* ctx = static_cast<SimplexContext*>(params);
  const EulerAngles e{gsl_vector_get(x, 0), gsl_vector_get(x, 1), gsl_vector_get(x, 2)};
  ++ctx->evaluations;
  const auto results = (*ctx->oracle)(euler_unitary(e));
  double total = 0.0;
  for (const auto& r : results) total += r.orthogonal;
  if (total < ctx->best_value) {
    ctx->best_value = total;
    ctx->best = e;
  }
  return total;
}

struct MinimizerDeleter {
  void operator()(gsl_multimin_fminimizer* m) const { gsl_multimin_fminimizer_free(m); }
};
struct VectorDeleter {
  void operator()(gsl_vector* v) const { gsl_vector_free(v); }
};

}  // namespace detail

/// Derivative-free simplex descent over the compensator's three angles,
/// minimizing the summed orthogonal-outcome probability of the probes.
/// Each restart starts from random angles and runs to convergence; the
/// search stops at the first restart whose worst isolation clears
/// `threshold`.  `evaluations` counts compensator settings tried.
inline CalibrationReport calibrate_compensator(const ProbeOracle& oracle, int budget, Rng& rng,
                                               double threshold = kIsolationThreshold, int restarts = 8) {
  if (budget < 1) throw std::invalid_argument("calibration budget must be positive");
  gsl_set_error_handler_off();
  detail::SimplexContext ctx{&oracle};
  CalibrationReport report;
  const int per_restart = std::max(1, budget / std::max(1, restarts));
  for (int r = 0; r < restarts && ctx.evaluations < budget; ++r) {
    report.restarts_used = r + 1;
    gsl_multimin_function fn{&detail::simplex_objective, 3, &ctx};
    std::unique_ptr<gsl_vector, detail::VectorDeleter> x(gsl_vector_alloc(3)), step(gsl_vector_alloc(3));
    for (int k = 0; k < 3; ++k) {
      gsl_vector_set(x.get(), static_cast<std::size_t>(k), 2 * std::numbers::pi * rng.uniform());
      gsl_vector_set(step.get(), static_cast<std::size_t>(k), 0.8);
    }
    std::unique_ptr<gsl_multimin_fminimizer, detail::MinimizerDeleter> m(
        gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 3));
    gsl_multimin_fminimizer_set(m.get(), &fn, x.get(), step.get());
    const int stop_at = std::min(budget, ctx.evaluations + per_restart);
    while (ctx.evaluations < stop_at) {
      if (gsl_multimin_fminimizer_iterate(m.get()) != GSL_SUCCESS) break;
      if (gsl_multimin_fminimizer_minimum(m.get()) < 1e-15) break;
      if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(m.get()), 1e-10) == GSL_SUCCESS) break;
    }
    const auto results = oracle(euler_unitary(ctx.best));
    report.setting = {ctx.best};
    report.worst_isolation = worst_isolation(results);
    if (report.worst_isolation >= threshold) {
      report.success = true;
      break;
    }
  }
  report.evaluations = ctx.evaluations;
  return report;
}

/// Process fidelity of a single-qubit unitary map to the identity.
inline double identity_process_fidelity(const Matrix2& w) { return std::norm(w.trace()) / 4.0; }

// ---------------------------------------------------------------------------
// JSON

inline json to_json(const EulerAngles& e) { return {{"alpha", e.alpha}, {"beta", e.beta}, {"gamma", e.gamma}}; }

inline EulerAngles euler_from_json(const json& j) {
  if (j.is_array()) return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
  return {j.value("alpha", 0.0), j.value("beta", 0.0), j.value("gamma", 0.0)};
}

inline json to_json(const NoiseConfig& c) {
  return {{"source_visibility", c.source_visibility},
          {"drift", to_json(c.drift)},
          {"phase_jitter_sigma", c.phase_jitter_sigma},
          {"fiber_km", c.fiber_km},
          {"losses_db",
           {{"pbrc_te", c.losses.pbrc_te},
            {"pbrc_tm", c.losses.pbrc_tm},
            {"coupler_te", c.losses.coupler_te},
            {"coupler_tm", c.losses.coupler_tm},
            {"fiber_per_km", c.losses.fiber_per_km}}}};
}

/// Missing fields keep their defaults; the result is validated.
inline NoiseConfig noise_from_json(const json& j) {
  NoiseConfig c;
  c.source_visibility = j.value("source_visibility", c.source_visibility);
  if (j.contains("drift")) c.drift = euler_from_json(j.at("drift"));
  c.phase_jitter_sigma = j.value("phase_jitter_sigma", c.phase_jitter_sigma);
  c.fiber_km = j.value("fiber_km", c.fiber_km);
  if (j.contains("losses_db")) {
    const auto& l = j.at("losses_db");
    c.losses.pbrc_te = l.value("pbrc_te", c.losses.pbrc_te);
    c.losses.pbrc_tm = l.value("pbrc_tm", c.losses.pbrc_tm);
    c.losses.coupler_te = l.value("coupler_te", c.losses.coupler_te);
    c.losses.coupler_tm = l.value("coupler_tm", c.losses.coupler_tm);
    c.losses.fiber_per_km = l.value("fiber_per_km", c.losses.fiber_per_km);
  }
  c.validate();
  return c;
}

/// Infinite isolation is written as the string "inf".
inline json isolation_to_json(double v) { return std::isinf(v) ? json("inf") : json(v); }

inline json to_json(const CalibrationReport& r) {
  const auto& a = r.setting.angles;
  return {{"angles", {a.alpha, a.beta, a.gamma}},
          {"worst_isolation", isolation_to_json(r.worst_isolation)},
          {"evaluations", r.evaluations},
          {"restarts_used", r.restarts_used},
          {"success", r.success}};
}

}  // namespace qgt::channel
