#include "mollow/dynamics.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "mollow/error.hpp"
#include "mollow/expm.hpp"

namespace mollow {

DensityMatrix::DensityMatrix(SpaceDims dims, CMatrix matrix) : dims_(dims), matrix_(std::move(matrix)) {
  const auto d = dims_.total();
  if (matrix_.rows() != d || matrix_.cols() != d) throw DimensionError("density matrix must be D x D");
  if ((matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff() > kHermiticityTol) {
    throw NumericalError("density matrix is not Hermitian");
  }
  if (std::abs(matrix_.trace() - Complex(1.0)) > kTraceTol) {
    throw NumericalError("density matrix trace differs from 1");
  }
  const Eigen::SelfAdjointEigenSolver<CMatrix> eig(matrix_, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < kMinEigenvalue) {
    throw NumericalError("density matrix has a negative eigenvalue " + std::to_string(eig.eigenvalues().minCoeff()));
  }
}

double DensityMatrix::population(int qubit, int photons) const {
  const auto k = dims_.index(qubit, photons);
  return matrix_(k, k).real();
}

double DensityMatrix::top_fock_population() const {
  const int top = dims_.fock_dim - 1;
  return population(kExcited, top) + population(kGround, top);
}

DensityMatrix steady_state(const Superoperator& liouvillian, int trace_state) {
  const auto d = liouvillian.dims().total();
  if (trace_state < 0 || trace_state >= d) throw InvalidArgument("trace_state out of range");
  const CMatrix& l = liouvillian.matrix();
  const auto n = l.rows();

  CMatrix m = l;
  const auto row = static_cast<Eigen::Index>(trace_state) * (d + 1);
  m.row(row).setZero();
  for (Eigen::Index k = 0; k < d; ++k) m(row, k * (d + 1)) = 1.0;
  CVector rhs = CVector::Zero(n);
  rhs(row) = 1.0;

  const Eigen::PartialPivLU<CMatrix> lu(m);
  const auto pivots = lu.matrixLU().diagonal().cwiseAbs();
  const double rcond = std::min(lu.rcond(), pivots.minCoeff() / pivots.maxCoeff());
  if (!(rcond > 1e-14)) {
    std::ostringstream msg;
    msg << "steady state is not unique (reciprocal condition number " << rcond << ")";
    throw NumericalError(msg.str());
  }
  const CVector v = lu.solve(rhs);
  if (!v.allFinite()) throw NumericalError("steady state solve produced non-finite values");
  CMatrix rho = unvectorize(v, d);
  rho = 0.5 * (rho + rho.adjoint()).eval();
  rho /= rho.trace();

  const double residual = (l * vectorize(rho)).norm();
  const double scale = l.norm();
  if (!(residual <= 1e-9 * scale)) {
    std::ostringstream msg;
    msg << "steady state residual " << residual << " exceeds tolerance (||L|| = " << scale << ")";
    throw NumericalError(msg.str());
  }
  return DensityMatrix(liouvillian.dims(), std::move(rho));
}

Superoperator propagator(const Superoperator& liouvillian, double dt) {
  if (!(dt > 0.0)) throw InvalidArgument("propagator step must be positive");
  return Superoperator(liouvillian.dims(), expm(liouvillian.matrix() * dt));
}

std::vector<double> CorrelationTrace::tau_grid() const {
  std::vector<double> tau(values.size());
  for (std::size_t k = 0; k < tau.size(); ++k) tau[k] = dtau * static_cast<double>(k);
  return tau;
}

CorrelationTrace correlation(const Superoperator& liouvillian, const DensityMatrix& rho_ss, const Operator& a,
                             double t_max, int n_steps) {
  if (!(t_max > 0.0) || n_steps < 1) throw InvalidArgument("correlation needs t_max > 0 and n_steps >= 1");
  if (!(a.dims() == liouvillian.dims()) || !(rho_ss.dims() == liouvillian.dims())) {
    throw DimensionError("correlation operands have mismatched dimensions");
  }
  const CMatrix& rho = rho_ss.matrix();
  const Complex mean_a = rho_ss.expect(a);
  const Complex mean_a_dag = std::conj(mean_a);

  CorrelationTrace out;
  out.dtau = t_max / n_steps;
  out.coherent_offset = mean_a_dag * mean_a;
  out.values.resize(static_cast<std::size_t>(n_steps) + 1);

  // Evolve the fluctuation rho a^dag - <a^dag> rho; the stationary part
  // contributes exactly the coherent offset.
  CVector x = vectorize(rho * a.matrix().adjoint() - mean_a_dag * rho);
  const CVector row = vectorize(a.matrix().transpose());  // tr(a X) = vec(a^T) . vec(X)
  const CMatrix step = expm(liouvillian.matrix() * out.dtau);

  CVector next(x.size());
  for (int k = 0; k <= n_steps; ++k) {
    out.values[static_cast<std::size_t>(k)] = out.coherent_offset + (row.transpose() * x).value();
    if (k < n_steps) {
      next.noalias() = step * x;
      x.swap(next);
    }
  }
  const double g0 = std::abs(out.values.front());
  out.unresolved = std::abs(out.values.back() - out.coherent_offset) > 0.01 * g0;
  return out;
}

std::vector<double> SpectrumGrid::points() const {
  if (!(spacing > 0.0) || !(omega_max > omega_min)) throw InvalidArgument("invalid spectrum grid");
  const auto n = static_cast<std::size_t>(std::floor((omega_max - omega_min) / spacing + 1e-9)) + 1;
  std::vector<double> w(n);
  for (std::size_t k = 0; k < n; ++k) w[k] = omega_min + spacing * static_cast<double>(k);
  return w;
}

double SpectrumGrid::max_abs() const { return std::max(std::abs(omega_min), std::abs(omega_max)); }

double SpectrumTrace::integral() const {
  double s = 0.0;
  for (std::size_t k = 1; k < omega.size(); ++k) {
    s += 0.5 * (values[k] + values[k - 1]) * (omega[k] - omega[k - 1]);
  }
  return s;
}

SpectrumTrace spectrum(const CorrelationTrace& corr, const SpectrumGrid& grid, Taper taper) {
  if (corr.values.size() < 2) throw InvalidArgument("correlation trace is too short");
  const double t_max = corr.t_max();
  if (grid.spacing < 1.0 / (2.0 * t_max) * (1.0 - 1e-12)) {
    std::ostringstream msg;
    msg << "frequency spacing " << grid.spacing << " GHz is below the resolution limit 1/(2 T_max) = "
        << 1.0 / (2.0 * t_max) << " GHz";
    throw InvalidArgument(msg.str());
  }
  const std::size_t n = corr.values.size();
  std::vector<Complex> h(n);
  for (std::size_t k = 0; k < n; ++k) {
    double w = (k == 0 || k == n - 1) ? 0.5 : 1.0;
    if (taper == Taper::cosine) {
      w *= 0.5 * (1.0 + std::cos(kTwoPi * 0.5 * corr.dtau * static_cast<double>(k) / t_max));
    }
    h[k] = w * corr.dtau * (corr.values[k] - corr.coherent_offset);
  }

  SpectrumTrace out;
  out.omega = grid.points();
  out.values.resize(out.omega.size());
  for (std::size_t j = 0; j < out.omega.size(); ++j) {
    const Complex z = std::polar(1.0, kTwoPi * out.omega[j] * corr.dtau);
    Complex phase = 1.0;
    Complex acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      acc += phase * h[k];
      phase *= z;
    }
    out.values[j] = acc.real();
  }
  out.coherent_amplitude = 0.5 * std::abs(corr.coherent_offset);
  return out;
}

double slowest_rate(const Superoperator& liouvillian, const SystemParams& p) {
  const CMatrix& l = liouvillian.matrix();
  const Eigen::ComplexEigenSolver<CMatrix> eig(l, false);
  const double zero_tol = 1e-9 * l.cwiseAbs().colwise().sum().maxCoeff();
  double gap = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < eig.eigenvalues().size(); ++k) {
    const Complex lambda = eig.eigenvalues()(k);
    if (std::abs(lambda) <= zero_tol) continue;
    const double rate = -lambda.real();
    if (rate > zero_tol) gap = std::min(gap, rate);
  }
  const double coherence = std::numbers::pi * (p.gamma + p.gamma_d);
  double rate = gap;
  if (coherence > 0.0) rate = std::min(rate, coherence);
  if (!std::isfinite(rate) || rate <= 0.0) throw NumericalError("no dissipative decay rate found");
  return rate;
}

Observable default_observable(const SystemParams& p) {
  return p.drive_target == DriveTarget::qubit ? Observable::dot : Observable::cavity;
}

SimulatedSpectrum simulate_spectrum(const SystemParams& p, const SimulationSettings& settings) {
  p.validate();
  const Superoperator l = build_liouvillian(p);
  const DensityMatrix rho = steady_state(l);
  const auto ops = make_ops(p.dims());
  const Operator observed = settings.observable == Observable::cavity ? cavity_operator(p) : ops.sigma_m;

  double t_max = 0.0;
  if (settings.t_max) {
    t_max = *settings.t_max;
  } else {
    t_max = settings.t_max_factor / slowest_rate(l, p);
    t_max = std::max(t_max, 1.0 / (2.0 * settings.grid.spacing));
    t_max = std::min(t_max, settings.t_max_cap);
  }
  const double dtau_target = 1.0 / (2.0 * settings.oversample * settings.grid.max_abs());
  const int n_steps = static_cast<int>(std::ceil(t_max / dtau_target));

  SimulatedSpectrum out;
  out.correlation = correlation(l, rho, observed, t_max, n_steps);
  out.trace = spectrum(out.correlation, settings.grid, settings.taper);
  out.fock_dim = p.fock_dim;
  out.t_max = t_max;
  const Operator a = cavity_operator(p);
  out.cavity_photons = rho.expect(a.dagger() * a).real();
  out.excited_population = rho.expect(ops.sigma_p * ops.sigma_m).real();
  out.top_fock_population = rho.top_fock_population();
  return out;
}

ConvergedSpectrum converge_fock(SystemParams p, const SimulationSettings& settings, const LinewidthExtractor& linewidth,
                                int start, double rel_tol, int max_fock) {
  if (start < 2) throw InvalidArgument("converge_fock start must be >= 2");
  ConvergedSpectrum out;
  SimulationSettings fixed = settings;
  double previous = 0.0;
  for (int n = start; n <= max_fock; n *= 2) {
    p.fock_dim = n;
    SimulatedSpectrum sim = simulate_spectrum(p, fixed);
    // Keep the correlation window identical across truncations.
    fixed.t_max = sim.t_max;
    const double width = linewidth(sim.trace);
    out.fock_history.push_back(n);
    out.linewidth_history.push_back(width);
    const bool converged =
        out.fock_history.size() > 1 && std::abs(width - previous) <= rel_tol * std::max(std::abs(previous), 1e-300);
    if (converged) {
      // The smaller truncation already matches; report it.
      out.fock_used = n / 2;
      return out;
    }
    previous = width;
    out.result = std::move(sim);
    out.fock_used = n;
  }
  std::ostringstream msg;
  msg << "Fock truncation did not converge up to N=" << max_fock << "; top-level population "
      << out.result.top_fock_population << ", <n> = " << out.result.cavity_photons;
  throw NumericalError(msg.str());
}

}  // namespace mollow
