#pragma once

#include <cmath>

namespace lcmavg {

// Neumaier-compensated accumulator. Adding values in a fixed order gives a
// bit-reproducible sum regardless of how partial sums were produced.
class KahanSum {
 public:
  void add(double x) {
    double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }

  // Merge another compensated partial sum; call in a deterministic order.
  void merge(const KahanSum& other) {
    add(other.sum_);
    add(other.comp_);
  }

  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace lcmavg
