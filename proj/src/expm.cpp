#include "mollow/expm.hpp"

#include <array>
#include <cmath>
#include <span>

#include "mollow/error.hpp"

namespace mollow {
namespace {

double norm1(const CMatrix& a) { return a.cwiseAbs().colwise().sum().maxCoeff(); }

// Evaluates U (odd part) and V (even part) so that r(A) = (V - U)^{-1} (V + U).
void pade_low(const CMatrix& a, std::span<const double> b, CMatrix& u, CMatrix& v) {
  const auto n = a.rows();
  const CMatrix id = CMatrix::Identity(n, n);
  const CMatrix a2 = a * a;
  CMatrix odd = b[1] * id;
  CMatrix even = b[0] * id;
  CMatrix power = id;
  const auto degree = b.size() - 1;
  for (std::size_t k = 2; k <= degree; k += 2) {
    power = power * a2;
    even += b[k] * power;
    if (k + 1 <= degree) odd += b[k + 1] * power;
  }
  u = a * odd;
  v = std::move(even);
}

void pade13(const CMatrix& a, CMatrix& u, CMatrix& v) {
  static constexpr double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                 1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                 670442572800.0,      33522128640.0,       1323241920.0,
                                 40840800.0,          960960.0,            16380.0,
                                 182.0,               1.0};
  const auto n = a.rows();
  const CMatrix id = CMatrix::Identity(n, n);
  const CMatrix a2 = a * a;
  const CMatrix a4 = a2 * a2;
  const CMatrix a6 = a4 * a2;
  CMatrix tmp = b[13] * a6 + b[11] * a4 + b[9] * a2;
  u = a * (a6 * tmp + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id);
  tmp = b[12] * a6 + b[10] * a4 + b[8] * a2;
  v = a6 * tmp + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
}

}  // namespace

CMatrix expm(const CMatrix& a) {
  if (a.rows() != a.cols()) throw DimensionError("expm needs a square matrix");
  if (!a.allFinite()) throw NumericalError("expm input contains non-finite entries");
  const double norm = norm1(a);
  if (norm > kExpmMaxNorm) {
    throw NumericalError("expm: ||A||_1 = " + std::to_string(norm) + " exceeds the supported bound");
  }

  static constexpr std::array<double, 4> b3 = {120.0, 60.0, 12.0, 1.0};
  static constexpr std::array<double, 6> b5 = {30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0};
  static constexpr std::array<double, 8> b7 = {17297280.0, 8648640.0, 1995840.0, 277200.0,
                                               25200.0,    1512.0,    56.0,      1.0};
  static constexpr std::array<double, 10> b9 = {17643225600.0, 8821612800.0, 2075673600.0, 302702400.0,
                                                30270240.0,    2162160.0,    110880.0,     3960.0,
                                                90.0,          1.0};

  CMatrix u;
  CMatrix v;
  int squarings = 0;
  if (norm <= 1.495585217958292e-2) {
    pade_low(a, b3, u, v);
  } else if (norm <= 2.539398330063230e-1) {
    pade_low(a, b5, u, v);
  } else if (norm <= 9.504178996162932e-1) {
    pade_low(a, b7, u, v);
  } else if (norm <= 2.097847961257068) {
    pade_low(a, b9, u, v);
  } else {
    constexpr double theta13 = 5.371920351148152;
    squarings = std::max(0, static_cast<int>(std::ceil(std::log2(norm / theta13))));
    pade13(a / std::ldexp(1.0, squarings), u, v);
  }

  CMatrix r = (v - u).partialPivLu().solve(v + u);
  for (int k = 0; k < squarings; ++k) {
    r = r * r;
  }
  if (!r.allFinite()) throw NumericalError("expm produced non-finite entries");
  return r;
}

}  // namespace mollow
