#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <stdexcept>
#include <string>

namespace bhns {

// Cosine similarity, accumulated in double regardless of the input scalar
// type. Exactly symmetric: the dot product and the norm product commute
// coefficient-wise, so cosine(a, b) == cosine(b, a) bit for bit. The result
// is clamped to [-1, 1] to absorb floating-point overshoot.
template <typename DerivedA, typename DerivedB>
double cosine(const Eigen::MatrixBase<DerivedA>& a,
              const Eigen::MatrixBase<DerivedB>& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("cosine: dimension mismatch (" +
                                std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()) + ")");
  }
  const auto ad = a.derived().template cast<double>();
  const auto bd = b.derived().template cast<double>();
  const double norm_a = ad.norm();
  const double norm_b = bd.norm();
  if (norm_a == 0.0 || norm_b == 0.0) {
    throw std::domain_error("cosine: zero-norm input vector");
  }
  const double c = ad.dot(bd) / (norm_a * norm_b);
  return std::clamp(c, -1.0, 1.0);
}

// Rectified cosine in [0, 1]; the probability-like weight consumed by
// false-negative estimation.
template <typename DerivedA, typename DerivedB>
double clamped_sim(const Eigen::MatrixBase<DerivedA>& a,
                   const Eigen::MatrixBase<DerivedB>& b) {
  return std::max(0.0, cosine(a, b));
}

}  // namespace bhns
