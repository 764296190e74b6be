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

// Runs a short two-node session over loopback TCP and prints its log.

#include <iostream>

#include "qgt/netlab/session.hpp"

using namespace qgt;

int main(int argc, char** argv) {
  netlab::SessionConfig cfg;
  cfg.trials = argc > 1 ? std::stoull(argv[1]) : 2;
  cfg.seed = 3;
  const auto s = netlab::run_local_session(cfg);
  std::cout << s.result.log_text();
  std::cerr << "status " << s.result.status << ", completed " << s.result.completed << "/" << s.result.requested
            << ", matches in-process run: " << (s.result.outcome_lines == netlab::reference_session(cfg).outcome_lines ? "yes" : "no")
            << "\n";
  return s.result.ok() ? 0 : 1;
}
