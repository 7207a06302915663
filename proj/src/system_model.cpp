#include "mollow/system_model.hpp"

#include <cmath>

#include "mollow/error.hpp"

namespace mollow {

void SystemParams::validate() const {
  const double values[] = {delta_c, delta_x,      g,           kappa,   gamma,
                           gamma_d, gamma_ph_ads, gamma_ph_asp, drive_J, omega_direct};
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw InvalidArgument("system parameters must be finite");
    }
  }
  if (g < 0.0 || kappa < 0.0 || gamma < 0.0 || gamma_d < 0.0 || gamma_ph_ads < 0.0 || gamma_ph_asp < 0.0) {
    throw InvalidArgument("rates must be non-negative");
  }
  if (g == 0.0 && !uncoupled) {
    throw InvalidArgument("g must be positive unless the uncoupled mode is requested");
  }
  if (fock_dim < 2) {
    throw InvalidArgument("fock_dim must be >= 2");
  }
}

Complex SystemParams::frame_displacement() const {
  if (frame != Frame::displaced || drive_target != DriveTarget::cavity) {
    return 0.0;
  }
  const Complex denom(delta_c, -0.5 * kappa);
  if (std::abs(denom) == 0.0) {
    return 0.0;
  }
  return -std::sqrt(kappa) * drive_J / denom;
}

std::string to_string(DriveTarget target) { return target == DriveTarget::cavity ? "cavity" : "qubit"; }
std::string to_string(Frame frame) { return frame == Frame::lab ? "lab" : "displaced"; }

DriveTarget drive_target_from_string(const std::string& text) {
  if (text == "cavity") return DriveTarget::cavity;
  if (text == "qubit") return DriveTarget::qubit;
  throw InvalidArgument("unknown drive target '" + text + "'");
}

Frame frame_from_string(const std::string& text) {
  if (text == "lab") return Frame::lab;
  if (text == "displaced") return Frame::displaced;
  throw InvalidArgument("unknown frame '" + text + "'");
}

Superoperator::Superoperator(SpaceDims dims, CMatrix matrix) : dims_(dims), matrix_(std::move(matrix)) {
  const auto d2 = static_cast<Eigen::Index>(dims_.total()) * dims_.total();
  if (matrix_.rows() != d2 || matrix_.cols() != d2) {
    throw DimensionError("superoperator must be D^2 x D^2");
  }
}

Superoperator Superoperator::zero(SpaceDims dims) {
  const auto d2 = static_cast<Eigen::Index>(dims.total()) * dims.total();
  return Superoperator(dims, CMatrix::Zero(d2, d2));
}

Superoperator Superoperator::left(const Operator& op) {
  const auto d = op.dims().total();
  return Superoperator(op.dims(), kron(CMatrix::Identity(d, d), op.matrix()));
}

Superoperator Superoperator::right(const Operator& op) {
  const auto d = op.dims().total();
  return Superoperator(op.dims(), kron(CMatrix(op.matrix().transpose()), CMatrix::Identity(d, d)));
}

CMatrix Superoperator::apply(const CMatrix& rho) const {
  const auto d = dims_.total();
  if (rho.rows() != d || rho.cols() != d) {
    throw DimensionError("density matrix does not match superoperator dimension");
  }
  return unvectorize(matrix_ * vectorize(rho), d);
}

Superoperator operator+(const Superoperator& lhs, const Superoperator& rhs) {
  if (!(lhs.dims_ == rhs.dims_)) throw DimensionError("superoperator dimensions differ");
  return Superoperator(lhs.dims_, lhs.matrix_ + rhs.matrix_);
}

Superoperator operator-(const Superoperator& lhs, const Superoperator& rhs) {
  if (!(lhs.dims_ == rhs.dims_)) throw DimensionError("superoperator dimensions differ");
  return Superoperator(lhs.dims_, lhs.matrix_ - rhs.matrix_);
}

Superoperator operator*(Complex factor, const Superoperator& op) {
  return Superoperator(op.dims_, factor * op.matrix_);
}

CVector vectorize(const CMatrix& rho) { return Eigen::Map<const CVector>(rho.data(), rho.size()); }

CMatrix unvectorize(const CVector& v, Eigen::Index dim) {
  if (v.size() != dim * dim) throw DimensionError("vector length is not dim^2");
  return Eigen::Map<const CMatrix>(v.data(), dim, dim);
}

Operator cavity_operator(const SystemParams& p) {
  const auto ops = make_ops(p.dims());
  return ops.a + p.frame_displacement() * ops.identity;
}

Operator build_hamiltonian(const SystemParams& p) {
  p.validate();
  const auto ops = make_ops(p.dims());
  const Operator a = cavity_operator(p);
  const Operator a_dag = a.dagger();

  Operator h = Complex(p.delta_c) * (a_dag * a) + Complex(0.5 * p.delta_x) * ops.sigma_z +
               Complex(p.g) * (ops.sigma_p * a + a_dag * ops.sigma_m);
  if (p.drive_target == DriveTarget::cavity) {
    h = h + Complex(std::sqrt(p.kappa) * p.drive_J) * (a + a_dag);
  } else {
    h = h + Complex(0.5 * p.omega_direct) * (ops.sigma_p + ops.sigma_m);
  }
  // Hermitize away rounding from the displaced-frame products.
  return Operator(h.dims(), 0.5 * (h.matrix() + h.matrix().adjoint()));
}

Superoperator dissipator(const Operator& c) {
  const auto d = c.dims().total();
  const CMatrix& cm = c.matrix();
  const CMatrix cdc = cm.adjoint() * cm;
  const CMatrix id = CMatrix::Identity(d, d);
  // vec(C rho C^dag) = (conj(C) (x) C) vec(rho)
  CMatrix m = kron(CMatrix(cm.conjugate()), cm);
  m -= 0.5 * kron(id, cdc);
  m -= 0.5 * kron(CMatrix(cdc.transpose()), id);
  return Superoperator(c.dims(), std::move(m));
}

Superoperator build_liouvillian(const SystemParams& p) {
  p.validate();
  const auto ops = make_ops(p.dims());
  const Operator h = build_hamiltonian(p);
  const Operator a = cavity_operator(p);
  const Operator a_dag = a.dagger();

  const auto d = h.dims().total();
  const CMatrix id = CMatrix::Identity(d, d);
  CMatrix m = Complex(0.0, -kTwoPi) * (kron(id, h.matrix()) - kron(CMatrix(h.matrix().transpose()), id));

  auto add_channel = [&](double rate, const Operator& c) {
    if (rate > 0.0) {
      m += (kTwoPi * rate) * dissipator(c).matrix();
    }
  };
  add_channel(p.gamma, ops.sigma_m);
  add_channel(p.kappa, a);
  add_channel(p.gamma_d, ops.sigma_p * ops.sigma_m);
  add_channel(p.gamma_ph_ads, a_dag * ops.sigma_m);
  add_channel(p.gamma_ph_asp, a * ops.sigma_p);
  return Superoperator(h.dims(), std::move(m));
}

double vacuum_rabi_splitting(double g, double kappa) {
  const double q = kappa / 4.0;
  if (g <= q) return 0.0;
  return 2.0 * std::sqrt(g * g - q * q);
}

}  // namespace mollow
