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

// Sweeps source visibility and phase jitter; prints exact fidelities.

#include <cstdio>

#include "qgt/experiments.hpp"

using namespace qgt;

int main() {
  Rng rng(1);
  std::printf("%6s %6s %10s %10s %10s\n", "v", "sigma", "entangled", "process", "truth");
  for (double v : {1.0, 0.97, 0.94}) {
    for (double sigma : {0.0, 0.2, 0.4}) {
      channel::NoiseConfig noise;
      noise.source_visibility = v;
      noise.phase_jitter_sigma = sigma;
      const protocol::Link link{noise, {}};
      const double ent = experiments::entangling_run(link, std::nullopt, rng).mean_fidelity;
      const auto counts = experiments::teleported_process_counts(link, protocol::Mode::PostSelected, std::nullopt, rng);
      const double proc = tomography::fidelity_process(tomography::reconstruct_process(counts).chi, tomography::chi_cnot());
      const double tt = protocol::truth_table(link, std::nullopt, rng).fidelity;
      std::printf("%6.2f %6.2f %10.4f %10.4f %10.4f\n", v, sigma, ent, proc, tt);
    }
  }
}
