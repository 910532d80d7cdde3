#pragma once

#include <doctest.h>

#include <limits>

// Relative tolerance. doctest's default scale of 1 would make epsilon an
// absolute bound for values below one; the tiny scale lets 0 == 0 pass.
inline doctest::Approx rel(double value, double eps = 1e-9) {
  return doctest::Approx(value).epsilon(eps).scale(std::numeric_limits<double>::min());
}
