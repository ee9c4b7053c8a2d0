#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace tbsm {

using Complex = std::complex<double>;

constexpr const char* kVersion = "0.1.0";

// Requested operation needs at least one propagating lead channel at the
// given energy.
struct NoOpenChannelError : std::runtime_error {
  explicit NoOpenChannelError(const std::string& msg) : std::runtime_error(msg) {}
};

// Longitudinal momentum degenerates (sin k = 0); wave matching is singular.
struct BandEdgeError : std::runtime_error {
  explicit BandEdgeError(const std::string& msg) : std::runtime_error(msg) {}
};

// E - H_eff is not invertible at the requested energy.
struct SingularResolventError : std::runtime_error {
  explicit SingularResolventError(const std::string& msg) : std::runtime_error(msg) {}
};

// Pole-expansion requested on a defective (near-Jordan) eigensystem.
struct DefectivePoleError : std::runtime_error {
  explicit DefectivePoleError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace tbsm
