#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace bhns {

// Row-major storage so that each embedding occupies a contiguous row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Bad user input: unreadable files, malformed records, invalid configuration.
// The CLI maps this to exit code 2; any other failure is a runtime error (1).
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& message) : std::runtime_error(message) {}
};

// A sampler could not produce negatives (e.g. empty candidate pool).
class SamplingError : public std::runtime_error {
 public:
  explicit SamplingError(const std::string& message) : std::runtime_error(message) {}
};

}  // namespace bhns
