#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "mollow/error.hpp"
#include "mollow/operators.hpp"
#include "support.hpp"

using namespace mollow;

TEST_CASE("basis ordering is qubit first") {
  const auto dims = SpaceDims::make(3);
  CHECK(dims.total() == 6);
  CHECK(dims.index(kExcited, 0) == 0);
  CHECK(dims.index(kGround, 2) == 5);
  CHECK_THROWS_AS(SpaceDims::make(1), InvalidArgument);
  CHECK_THROWS_AS(make_ops(SpaceDims{1}), InvalidArgument);
}

TEST_CASE("a has sqrt(n) matrix elements") {
  const auto ops = make_ops(SpaceDims::make(2));
  const auto d = ops.a.dims();
  CHECK(ops.a(d.index(kGround, 0), d.index(kGround, 1)).real() == doctest::Approx(1.0));

  const CMatrix af = fock_annihilation(6);
  for (int m = 0; m < 6; ++m) {
    for (int n = 0; n < 6; ++n) {
      const double expected = m == n - 1 ? std::sqrt(static_cast<double>(n)) : 0.0;
      CHECK(std::abs(af(m, n) - expected) < 1e-15);
    }
  }
}

TEST_CASE("number operator spectrum at N=3") {
  const auto ops = make_ops(SpaceDims::make(3));
  const CMatrix num = (ops.a_dag * ops.a).matrix();
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(num);
  std::vector<double> ev(eig.eigenvalues().data(), eig.eigenvalues().data() + 6);
  std::sort(ev.begin(), ev.end());
  const std::vector<double> expected{0, 0, 1, 1, 2, 2};
  for (std::size_t i = 0; i < ev.size(); ++i) CHECK(ev[i] == doctest::Approx(expected[i]).epsilon(1e-12));
}

TEST_CASE("[a, a^dag] = I except on the top Fock level") {
  const int n = 5;
  const auto dims = SpaceDims::make(n);
  const auto ops = make_ops(dims);
  const CMatrix comm = (ops.a * ops.a_dag - ops.a_dag * ops.a).matrix();
  // Independent evaluation: diag(1, ..., 1, -(N-1)) on the Fock factor.
  CMatrix expected = CMatrix::Zero(dims.total(), dims.total());
  for (int q = 0; q < 2; ++q) {
    for (int k = 0; k < n; ++k) expected(dims.index(q, k), dims.index(q, k)) = k == n - 1 ? -(n - 1.0) : 1.0;
  }
  CHECK(test::max_abs(comm - expected) < 1e-13);
}

TEST_CASE("kron identities and ordering") {
  CHECK(test::max_abs(kron(CMatrix::Identity(2, 2), CMatrix::Identity(3, 3)) - CMatrix::Identity(6, 6)) == 0.0);

  const auto dims = SpaceDims::make(2);
  const Operator sz = kron(qubit_sigma_z(), CMatrix::Identity(2, 2), dims);
  Eigen::VectorXcd diag(4);
  diag << 1, 1, -1, -1;
  CHECK(test::max_abs(sz.matrix() - CMatrix(diag.asDiagonal())) == 0.0);

  // sigma_- (x) a^dag takes |e,0> to |g,1>.
  const Operator op = kron(qubit_lowering(), fock_annihilation(2).adjoint(), dims);
  const CVector out = op.matrix() * basis_state(dims, kExcited, 0);
  CHECK(test::max_abs(out - basis_state(dims, kGround, 1)) < 1e-15);

  CHECK_THROWS_AS(kron(CMatrix::Identity(2, 2), CMatrix::Identity(3, 3), SpaceDims::make(2)), DimensionError);
}

TEST_CASE("kron is associative and mixes products") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const CMatrix a = test::random_matrix(rng, 2, 3);
    const CMatrix b = test::random_matrix(rng, 3, 2);
    const CMatrix c = test::random_matrix(rng, 3, 2);
    const CMatrix d = test::random_matrix(rng, 2, 4);
    CHECK(test::max_abs(kron(kron(a, b), c) - kron(a, kron(b, c))) < 1e-12);
    CHECK(test::max_abs(kron(a, b) * kron(c, d) - kron(a * c, b * d)) < 1e-12);
  }
}

TEST_CASE("dagger and algebra") {
  const auto dims = SpaceDims::make(3);
  const auto ops = make_ops(dims);
  CHECK(test::max_abs(dagger(ops.a).matrix() - ops.a_dag.matrix()) == 0.0);

  std::mt19937_64 rng(3);
  const Operator x(dims, test::random_matrix(rng, 6, 6));
  CHECK(test::max_abs(dagger(dagger(x)).matrix() - x.matrix()) == 0.0);
  CHECK(test::max_abs(matmul(x, ops.identity).matrix() - x.matrix()) == 0.0);
  CHECK(test::max_abs(add(x, scale(-1.0, x)).matrix()) == 0.0);

  // sigma_+ sigma_- is |e><e| (x) I_N.
  CMatrix proj = CMatrix::Zero(2, 2);
  proj(kExcited, kExcited) = 1.0;
  CHECK(test::max_abs((ops.sigma_p * ops.sigma_m).matrix() - kron(proj, CMatrix::Identity(3, 3))) == 0.0);

  CHECK_THROWS_AS(ops.a * make_ops(SpaceDims::make(2)).a, DimensionError);
  CHECK_THROWS_AS(Operator(dims, CMatrix::Zero(5, 5)), DimensionError);
}

TEST_CASE("Pauli relations on the qubit factor") {
  for (int n : {2, 4}) {
    const auto ops = make_ops(SpaceDims::make(n));
    const CMatrix pm = (ops.sigma_p * ops.sigma_m).matrix();
    const CMatrix mp = (ops.sigma_m * ops.sigma_p).matrix();
    CHECK(test::max_abs(pm + mp - ops.identity.matrix()) == 0.0);
    CHECK(test::max_abs(pm - mp - ops.sigma_z.matrix()) == 0.0);
  }
}

TEST_CASE("builders are deterministic") {
  const auto a = make_ops(SpaceDims::make(7));
  const auto b = make_ops(SpaceDims::make(7));
  CHECK(a.a.matrix() == b.a.matrix());
  CHECK(a.sigma_z.matrix() == b.sigma_z.matrix());
}
