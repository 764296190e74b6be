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

// Loopback sessions with both nodes on threads, and the in-process
// reference run of the same trials.

#pragma once

#include <thread>

#include "qgt/netlab/coordinator.hpp"
#include "qgt/netlab/node.hpp"

namespace qgt::netlab {

struct LocalSession {
  SessionResult result;
  NodeSummary node_a;
  NodeSummary node_b;
};

inline LocalSession run_local_session(const SessionConfig& cfg, NodeBehavior a = {}, NodeBehavior b = {}) {
  Coordinator coordinator(cfg, Listener("127.0.0.1", 0));
  const int port = coordinator.port();
  LocalSession out;
  std::thread ta([&] { out.node_a = run_node(Role::A, "127.0.0.1", port, a); });
  std::thread tb([&] { out.node_b = run_node(Role::B, "127.0.0.1", port, b); });
  out.result = coordinator.run();
  ta.join();
  tb.join();
  return out;
}

/// The same trials without the network: run_shot for every trial id.
inline SessionResult reference_session(const SessionConfig& cfg) {
  SessionResult res;
  res.requested = cfg.trials;
  for (std::uint64_t t = 0; t < cfg.trials; ++t) {
    const auto [b1, b4] = readout_bases(cfg.readout, t);
    const auto shot = protocol::run_shot(cfg.input, b1, b4, cfg.link, cfg.mode, cfg.seed, t);
    res.shots.push_back(shot);
    res.outcome_lines.push_back(outcome_line(t, cfg.readout, shot));
    const auto k = static_cast<std::size_t>(readout_setting(cfg.readout, t).index());
    if (shot.kept)
      res.counts[k].n[static_cast<std::size_t>(shot.outcome_index())] += 1;
    else
      res.counts[k].discarded += 1;
    res.completed = t + 1;
  }
  return res;
}

}  // namespace qgt::netlab
