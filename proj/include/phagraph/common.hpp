#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace phagraph {

using Scalar = double;
using Index = std::uint32_t;

// Row-major so one vertex embedding occupies a contiguous row.
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using RowVec = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

// Error taxonomy maps onto CLI exit codes: validation -> 1, runtime -> 2, io -> 3.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : ValidationError {
  using ValidationError::ValidationError;
};

struct ComputeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace phagraph
