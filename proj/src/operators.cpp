#include "mollow/operators.hpp"

#include <cmath>
#include <string>

#include "mollow/error.hpp"

namespace mollow {

SpaceDims SpaceDims::make(int fock_dim) {
  if (fock_dim < 2) {
    throw InvalidArgument("fock_dim must be >= 2, got " + std::to_string(fock_dim));
  }
  return SpaceDims{fock_dim};
}

Operator::Operator(SpaceDims dims, CMatrix matrix) : dims_(dims), matrix_(std::move(matrix)) {
  if (dims_.fock_dim < 2) {
    throw InvalidArgument("fock_dim must be >= 2");
  }
  const auto d = dims_.total();
  if (matrix_.rows() != d || matrix_.cols() != d) {
    throw DimensionError("operator matrix is " + std::to_string(matrix_.rows()) + "x" +
                         std::to_string(matrix_.cols()) + ", expected " + std::to_string(d) + "x" +
                         std::to_string(d));
  }
}

Operator Operator::dagger() const { return Operator(dims_, matrix_.adjoint()); }

namespace {
void require_same(const Operator& lhs, const Operator& rhs) {
  if (!(lhs.dims() == rhs.dims())) {
    throw DimensionError("operator dimensions differ: fock_dim " + std::to_string(lhs.dims().fock_dim) +
                         " vs " + std::to_string(rhs.dims().fock_dim));
  }
}
}  // namespace

Operator operator*(const Operator& lhs, const Operator& rhs) {
  require_same(lhs, rhs);
  return Operator(lhs.dims_, lhs.matrix_ * rhs.matrix_);
}

Operator operator+(const Operator& lhs, const Operator& rhs) {
  require_same(lhs, rhs);
  return Operator(lhs.dims_, lhs.matrix_ + rhs.matrix_);
}

Operator operator-(const Operator& lhs, const Operator& rhs) {
  require_same(lhs, rhs);
  return Operator(lhs.dims_, lhs.matrix_ - rhs.matrix_);
}

Operator operator*(Complex factor, const Operator& op) { return Operator(op.dims_, factor * op.matrix_); }

Operator matmul(const Operator& lhs, const Operator& rhs) { return lhs * rhs; }
Operator add(const Operator& lhs, const Operator& rhs) { return lhs + rhs; }
Operator scale(Complex factor, const Operator& op) { return factor * op; }

CMatrix fock_annihilation(int fock_dim) {
  CMatrix a = CMatrix::Zero(fock_dim, fock_dim);
  for (int n = 1; n < fock_dim; ++n) {
    a(n - 1, n) = std::sqrt(static_cast<double>(n));
  }
  return a;
}

CMatrix qubit_lowering() {
  CMatrix sm = CMatrix::Zero(2, 2);
  sm(kGround, kExcited) = 1.0;
  return sm;
}

CMatrix qubit_sigma_z() {
  CMatrix sz = CMatrix::Zero(2, 2);
  sz(kExcited, kExcited) = 1.0;
  sz(kGround, kGround) = -1.0;
  return sz;
}

CMatrix kron(const CMatrix& left, const CMatrix& right) {
  CMatrix out(left.rows() * right.rows(), left.cols() * right.cols());
  for (Eigen::Index i = 0; i < left.rows(); ++i) {
    for (Eigen::Index j = 0; j < left.cols(); ++j) {
      out.block(i * right.rows(), j * right.cols(), right.rows(), right.cols()) = left(i, j) * right;
    }
  }
  return out;
}

Operator kron(const CMatrix& qubit_factor, const CMatrix& fock_factor, SpaceDims dims) {
  if (qubit_factor.rows() != SpaceDims::qubit_dim || qubit_factor.cols() != SpaceDims::qubit_dim ||
      fock_factor.rows() != dims.fock_dim || fock_factor.cols() != dims.fock_dim) {
    throw DimensionError("kron factors do not multiply to the composite dimension " +
                         std::to_string(dims.total()));
  }
  return Operator(dims, kron(qubit_factor, fock_factor));
}

OperatorSet make_ops(SpaceDims dims) {
  dims = SpaceDims::make(dims.fock_dim);
  const CMatrix id2 = CMatrix::Identity(2, 2);
  const CMatrix idn = CMatrix::Identity(dims.fock_dim, dims.fock_dim);
  const CMatrix af = fock_annihilation(dims.fock_dim);
  const CMatrix sm = qubit_lowering();
  return OperatorSet{
      kron(id2, af, dims),
      kron(id2, CMatrix(af.adjoint()), dims),
      kron(sm, idn, dims),
      kron(CMatrix(sm.adjoint()), idn, dims),
      kron(qubit_sigma_z(), idn, dims),
      Operator(dims, CMatrix::Identity(dims.total(), dims.total())),
  };
}

CVector basis_state(SpaceDims dims, int qubit, int photons) {
  if (qubit < 0 || qubit > 1 || photons < 0 || photons >= dims.fock_dim) {
    throw InvalidArgument("basis state out of range");
  }
  CVector v = CVector::Zero(dims.total());
  v(dims.index(qubit, photons)) = 1.0;
  return v;
}

}  // namespace mollow
