#pragma once

#include <functional>
#include <string>

#include "doctest.h"

#include "emergence/error.hpp"
#include "emergence/kernel.hpp"
#include "oracles.hpp"

namespace testing_support {

inline emergence::Kernel kernel(const oracle::Rows& rows) { return emergence::validate_kernel(rows).kernel; }

inline oracle::Rows rows(const emergence::Kernel& k) { return k.rows(); }

inline emergence::ErrorCode error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const emergence::Error& e) {
    return e.code();
  }
  return emergence::ErrorCode::Ok;
}

inline std::string fixture(const std::string& name) { return std::string(EMERGENCE_FIXTURE_DIR) + "/" + name; }

inline const oracle::Rows kK0 = {{0.573333, 0.393333, 0.033333},
                                 {0.393333, 0.573333, 0.033333},
                                 {0.033333, 0.033333, 0.933333}};
inline const oracle::Rows kK1 = {{0.933333, 0.033333, 0.033333},
                                 {0.033333, 0.573333, 0.393333},
                                 {0.033333, 0.393333, 0.573333}};

/// P(i,i) = s, P(i,i+1) = p, P(i,i-1) = q on three states.
inline oracle::Rows biased_cycle(double p, double q, double s) {
  return {{s, p, q}, {q, s, p}, {p, q, s}};
}

}  // namespace testing_support

#define CHECK_ERROR(expr, expected) CHECK(testing_support::error_of([&] { (void)(expr); }) == (expected))
