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

// The netlab-session experiment: a loopback session checked against the
// in-process run of the same seed.

#pragma once

#include "qgt/experiments.hpp"
#include "qgt/netlab/session.hpp"

namespace qgt::netlab {

inline SessionConfig session_config(const experiments::ExperimentConfig& cfg) {
  SessionConfig s;
  s.input = protocol::InputSpec::from_json(cfg.input);
  s.link = experiments::calibrated_link(cfg);
  s.mode = cfg.mode;
  s.seed = cfg.seed;
  s.trials = cfg.trials;
  return s;
}

inline std::string join_lines(const std::vector<std::string>& lines) {
  std::string s;
  for (const auto& l : lines) s += l + "\n";
  return s;
}

/// Tomographic fidelity of the session counts to C14 applied to the input.
inline double session_fidelity(const SessionConfig& s, const tomography::StateCounts& counts) {
  const auto target = MixedState::from_pure(protocol::ideal_output(s.input.state()));
  return fidelity_state(tomography::reconstruct_state(counts).rho, target);
}

inline json audit_json(const AuditReport& a) {
  return {{"ok", a.ok}, {"trials", a.trials}, {"violations", a.violations}, {"message_totals", a.totals}};
}

inline experiments::ExperimentResult run_netlab_experiment(const experiments::ExperimentConfig& cfg) {
  cfg.validate();
  experiments::Report r(cfg);
  const auto s = session_config(cfg);
  const auto net = run_local_session(s);
  const auto ref = reference_session(s);

  r.extra()["manifest"] = net.result.manifest();
  if (!net.result.ok()) throw ProtocolError(net.result.error_code, "netlab session aborted: " + net.result.reason);
  const auto audit = audit_log(net.result.log);
  bool every_setting_counted = true;
  for (const auto& c : net.result.counts) every_setting_counted = every_setting_counted && c.kept() > 0;
  if (every_setting_counted) {
    const double f_net = session_fidelity(s, net.result.counts);
    const double f_ref = session_fidelity(s, ref.counts);
    r.metric("netlab_fidelity", f_net);
    r.metric("in_process_fidelity", f_ref);
    r.metric("fidelity_abs_difference", std::abs(f_net - f_ref));
  } else {
    r.extra()["tomography_skipped"] = "a readout setting has no kept trials; raise trials";
  }
  r.extra()["outcome_stream_identical"] = net.result.outcome_lines == ref.outcome_lines;
  r.extra()["audit"] = audit_json(audit);
  std::uint64_t kept = 0;
  for (const auto& shot : net.result.shots) kept += shot.kept ? 1 : 0;
  r.extra()["kept_trials"] = kept;

  experiments::detail::log_state_counts(r, "session", net.result.counts);
  r.file("messages.jsonl", net.result.log_text());
  r.file("outcomes.jsonl", join_lines(net.result.outcome_lines));
  r.file("manifest.json", net.result.manifest().dump(2) + "\n");
  return {r.json_report(), r.artifacts()};
}

}  // namespace qgt::netlab
