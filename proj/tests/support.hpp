#pragma once

#include <random>

#include "mollow/dynamics.hpp"

namespace mollow::test {

inline CMatrix random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> n(0.0, 1.0);
  CMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = Complex(n(rng), n(rng));
  }
  return m;
}

/// Random full-rank density matrix: G G^dag / tr.
inline CMatrix random_density(std::mt19937_64& rng, Eigen::Index dim) {
  const CMatrix g = random_matrix(rng, dim, dim);
  const CMatrix rho = g * g.adjoint();
  return rho / rho.trace();
}

inline double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

/// Device parameters at a given dot-cavity detuning.
inline SystemParams device_params(double delta_cx = 42.0) {
  SystemParams p;
  p.delta_c = delta_cx;
  p.gamma_ph_ads = 0.19;
  p.gamma_ph_asp = 0.28;
  return p;
}

}  // namespace mollow::test
