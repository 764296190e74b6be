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

#pragma once

#include <cmath>
#include <random>

#include "qgt/qcore.hpp"

namespace qgt::testing {

// Haar-ish random state: normalized complex Gaussian vector.
inline Vector random_vector(std::size_t dim, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vector v(static_cast<Eigen::Index>(dim));
  for (Eigen::Index k = 0; k < v.size(); ++k) v(k) = cplx(g(rng), g(rng));
  return v / v.norm();
}

inline PureState random_state(const Labels& labels, Rng& rng) {
  return PureState(random_vector(std::size_t{1} << labels.size(), rng), labels);
}

inline Vector2 random_qubit(Rng& rng) { return random_vector(2, rng); }

// Random unitary from the QR decomposition of a complex Gaussian matrix.
inline Matrix random_unitary(std::size_t dim, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  const auto d = static_cast<Eigen::Index>(dim);
  Matrix a(d, d);
  for (Eigen::Index r = 0; r < d; ++r)
    for (Eigen::Index c = 0; c < d; ++c) a(r, c) = cplx(g(rng), g(rng));
  Eigen::HouseholderQR<Matrix> qr(a);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index k = 0; k < d; ++k) q.col(k) *= r(k, k) / std::abs(r(k, k));
  return q;
}

// Random full-rank density matrix G G^dagger / Tr.
inline Matrix random_density(std::size_t dim, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  const auto d = static_cast<Eigen::Index>(dim);
  Matrix a(d, d);
  for (Eigen::Index r = 0; r < d; ++r)
    for (Eigen::Index c = 0; c < d; ++c) a(r, c) = cplx(g(rng), g(rng));
  Matrix rho = a * a.adjoint();
  rho /= rho.trace().real();
  return (rho + rho.adjoint()) / 2.0;
}

inline double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace qgt::testing
