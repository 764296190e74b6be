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

// Prints the four measurement branches of the teleported CNOT for one input.

#include <cstdio>

#include "qgt/protocol.hpp"

using namespace qgt;

int main(int argc, char** argv) {
  const std::string q1 = argc > 1 ? argv[1] : "+", q4 = argc > 2 ? argv[2] : "0";
  const auto input = protocol::InputSpec::named(q1, q4);
  const auto target = MixedState::from_pure(protocol::ideal_output(input.state()));
  const auto& table = protocol::derive_correction_table();

  for (auto mode : {protocol::Mode::PostSelected, protocol::Mode::Corrected}) {
    const auto ex = protocol::exact_run(input, protocol::Link::ideal(), mode);
    std::printf("%s, input |%s>|%s>\n", mode == protocol::Mode::Corrected ? "corrected" : "post-selected", q1.c_str(), q4.c_str());
    for (const auto& b : ex.branches) {
      const auto c = table[static_cast<std::size_t>(protocol::branch_index(b.i, b.j))];
      std::printf("  M2=%d M3=%c  p=%.3f  fix %s1 %s4  F=%.6f\n", b.i, b.j ? '-' : '+', b.probability,
                  protocol::pauli_name(c.r1).c_str(), protocol::pauli_name(c.r4).c_str(), fidelity_state(b.output, target));
    }
    std::printf("  kept fraction %.3f, output fidelity %.6f\n", ex.kept_fraction, fidelity_state(ex.output, target));
  }
}
