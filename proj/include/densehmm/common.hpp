#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace densehmm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Bad input data (files, sequences, symbol indices). CLI exit code 2.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Runtime numeric failure (non-convergence, impossible sequence, NaN). CLI exit code 3.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

}  // namespace densehmm
