#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace hardylab {

// Ambient dimensions are small; vectors and matrices use fixed max-size
// storage so that pointwise evaluation never touches the heap.
inline constexpr int kMaxDim = 8;

using Complex = std::complex<double>;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using CVec = Eigen::Matrix<Complex, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;
using CMat = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

/// Raised when an operation is called outside its contract (bad dimensions,
/// unsupported parameters, unknown ids).
class InvalidArgument : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a pointwise evaluation hits a singular configuration
/// (division by a vanishing field, |grad| = 0 with p < 2, ...).
class SingularPoint : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Raised when a parameter lies outside the admissible range of a bound or case.
class OutOfRange : public std::out_of_range {
public:
  using std::out_of_range::out_of_range;
};

inline void require(bool cond, const std::string &msg) {
  if (!cond)
    throw InvalidArgument(msg);
}

} // namespace hardylab
