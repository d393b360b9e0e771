#pragma once

#include <cmath>

namespace prunetree {

// Neumaier summation; running positions along long paths stay within a few
// ulps instead of drifting with the number of segments.
struct CompensatedSum {
  double sum = 0.0, carry = 0.0;

  explicit CompensatedSum(double start = 0.0) : sum(start) {}
  void add(double x) {
    double s = sum + x;
    carry += std::abs(sum) >= std::abs(x) ? (sum - s) + x : (x - s) + sum;
    sum = s;
  }
  double value() const { return sum + carry; }
};

}  // namespace prunetree
