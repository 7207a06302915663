#pragma once

#include "mollow/operators.hpp"

namespace mollow {

/// Largest 1-norm accepted by expm; beyond it the squaring phase loses
/// too many digits to be useful.
inline constexpr double kExpmMaxNorm = 1e8;

/// Matrix exponential by scaling and squaring with diagonal Pade
/// approximants of degree 3..13 (Higham's 2005 selection rule).
/// Throws NumericalError when ||A||_1 > kExpmMaxNorm or the input is not finite.
CMatrix expm(const CMatrix& a);

}  // namespace mollow
