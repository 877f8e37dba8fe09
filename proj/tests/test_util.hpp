#pragma once

#include <gtest/gtest.h>

#include <functional>
#include <random>
#include <vector>

#include "crgeom/crgeom.hpp"

namespace crgeom::testing {

/// Asserts that `f` throws crgeom::Error of the given kind.
inline void expect_error(ErrorKind kind, const std::function<void()>& f) {
  try {
    f();
    ADD_FAILURE() << "expected " << to_string(kind) << ", nothing was thrown";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), kind) << e.what();
  }
}

inline std::vector<cplx> random_point(int m, std::mt19937_64& rng, double radius = 1.0) {
  std::uniform_real_distribution<double> u(-radius, radius);
  std::vector<cplx> p(m);
  for (auto& z : p) z = {u(rng), u(rng)};
  return p;
}

}  // namespace crgeom::testing
