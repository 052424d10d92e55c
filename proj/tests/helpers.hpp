#pragma once

#include "cscox/cscox.hpp"

#include <gtest/gtest.h>

#include <initializer_list>
#include <vector>

namespace testing_util {

using namespace cscox;

inline Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

/// One-covariate records.
inline std::vector<Observation> recs(const std::vector<double>& x, const std::vector<int>& a,
                                     const std::vector<double>& z) {
  std::vector<Observation> out;
  for (std::size_t i = 0; i < x.size(); ++i) out.push_back({x[i], a[i], vec({z[i]})});
  return out;
}

inline Dataset data(const std::vector<double>& x, const std::vector<int>& a, const std::vector<double>& z,
                    Model m = Model::RightCS) {
  return validate(recs(x, a, z), m);
}

#define EXPECT_CSCOX_ERROR(stmt, k)                                     \
  do {                                                                  \
    try {                                                               \
      stmt;                                                             \
      ADD_FAILURE() << "expected " << cscox::error_kind_name(k);        \
    } catch (const cscox::Error& e) {                                   \
      EXPECT_EQ(e.kind(), k) << e.what();                               \
    }                                                                   \
  } while (0)

}  // namespace testing_util
