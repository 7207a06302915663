#pragma once

#include <Eigen/Dense>
#include <complex>

namespace mollow {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// Dimensions of the qubit (x) Fock space.
///
/// Basis ordering is qubit first: the state |q, n> has index q * fock_dim + n,
/// with q = 0 the excited state |e> and q = 1 the ground state |g>.
struct SpaceDims {
  int fock_dim = 2;

  static constexpr int qubit_dim = 2;

  /// Validating constructor; fock_dim must be at least 2.
  static SpaceDims make(int fock_dim);

  [[nodiscard]] int total() const { return qubit_dim * fock_dim; }
  [[nodiscard]] int index(int qubit, int photons) const { return qubit * fock_dim + photons; }

  friend bool operator==(const SpaceDims&, const SpaceDims&) = default;
};

inline constexpr int kExcited = 0;
inline constexpr int kGround = 1;

/// A dense operator on the composite space. Immutable once constructed.
class Operator {
 public:
  Operator(SpaceDims dims, CMatrix matrix);

  [[nodiscard]] const SpaceDims& dims() const { return dims_; }
  [[nodiscard]] const CMatrix& matrix() const { return matrix_; }
  [[nodiscard]] Complex operator()(Eigen::Index row, Eigen::Index col) const { return matrix_(row, col); }

  [[nodiscard]] Operator dagger() const;
  [[nodiscard]] Complex trace() const { return matrix_.trace(); }

  friend Operator operator*(const Operator& lhs, const Operator& rhs);
  friend Operator operator+(const Operator& lhs, const Operator& rhs);
  friend Operator operator-(const Operator& lhs, const Operator& rhs);
  friend Operator operator*(Complex scale, const Operator& op);
  friend Operator operator*(const Operator& op, Complex scale) { return scale * op; }

 private:
  SpaceDims dims_;
  CMatrix matrix_;
};

inline Operator dagger(const Operator& op) { return op.dagger(); }
Operator matmul(const Operator& lhs, const Operator& rhs);
Operator add(const Operator& lhs, const Operator& rhs);
Operator scale(Complex factor, const Operator& op);

/// Ladder and Pauli operators lifted to the composite space.
struct OperatorSet {
  Operator a;
  Operator a_dag;
  Operator sigma_m;
  Operator sigma_p;
  Operator sigma_z;
  Operator identity;
};

OperatorSet make_ops(SpaceDims dims);

// Single-factor building blocks.
CMatrix fock_annihilation(int fock_dim);
CMatrix qubit_lowering();
CMatrix qubit_sigma_z();

/// Kronecker product of two plain matrices, left factor outermost.
CMatrix kron(const CMatrix& left, const CMatrix& right);

/// Lift a 2x2 qubit factor and an N x N Fock factor to an Operator.
Operator kron(const CMatrix& qubit_factor, const CMatrix& fock_factor, SpaceDims dims);

/// Composite basis vector |q, n>.
CVector basis_state(SpaceDims dims, int qubit, int photons);

}  // namespace mollow
