#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace stealth {

using Vec = Eigen::VectorXd;
// Row-major so weights[i*in_dim + j] matches the JSON row-major layout and
// the hand-rolled forward loops walk memory contiguously.
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed input file.
struct ParseError : Error {
  using Error::Error;
};

/// Dimension chain / index / structural violation.
struct ShapeError : Error {
  using Error::Error;
};

/// Value outside its mathematical domain (non-finite weight, bad range).
struct DomainError : Error {
  using Error::Error;
};

/// A theorem hypothesis does not hold for the requested parameters.
struct HypothesisError : Error {
  using Error::Error;
};

/// An iterative procedure failed to produce a usable result.
struct SearchError : Error {
  using Error::Error;
};

inline constexpr const char* kToolkitVersion = "0.1.0";

}  // namespace stealth
