#pragma once

#include <Eigen/Core>

#include <functional>
#include <stdexcept>
#include <string>

namespace nplap {

/// Largest spatial dimension supported by the fixed-capacity vector types.
inline constexpr int kMaxDim = 8;

/// Point / n-vector with inline storage (no heap allocation in stencil loops).
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
/// Dense n x n matrix with inline storage; symmetric where the API says so.
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

using ScalarFn = std::function<double(const Vec&)>;
using VectorFn = std::function<Vec(const Vec&)>;
using MatrixFn = std::function<Mat(const Vec&)>;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rejected input: violated precondition or malformed argument.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Numerical failure: NaN, divergence, empty sample sets.
class NumericalError : public Error {
 public:
  using Error::Error;
};

inline Vec zeros(int n) { return Vec::Zero(n); }

inline Vec make_vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

}  // namespace nplap
