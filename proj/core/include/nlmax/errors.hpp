// Copyright (c) the nlmaxwell authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef NLMAX_ERRORS_HPP
#define NLMAX_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace nlmax {

/// Mismatched grids, incompatible array lengths, bad layout.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Invalid or inconsistent configuration / file format.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Spectral parameter too close to the discrete symbol set.
class ResonanceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Iteration budget exhausted or a root/flow failed to converge.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fredholm compatibility condition violated. Carries the offending
/// pairing magnitudes so the caller can report them; never downgraded
/// to a least-squares answer.
class InfeasibleError : public std::runtime_error {
 public:
  InfeasibleError(const std::string& what, std::vector<double> pairings)
      : std::runtime_error(what), violated_pairings(std::move(pairings)) {}
  std::vector<double> violated_pairings;
};

/// Fibering direction with nonnegative quadratic part; no interior
/// maximum on the ray exists.
class ConeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace nlmax

#endif  // NLMAX_ERRORS_HPP
