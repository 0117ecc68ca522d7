// Copyright (c) the nlmaxwell authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef NLMAX_SUITE_HPP
#define NLMAX_SUITE_HPP

#include "nlmax/config.hpp"

namespace nlmax {

struct CheckResult {
  std::string name;
  double measured = 0;
  double tolerance = 0;
  bool pass = false;
  std::string note;
};

/// One check battery run: every registered structural identity plus the
/// end-to-end pipeline, under one config + seed. Deterministic given
/// both (wall-clock data lives in a separate volatile field).
struct VerificationReport {
  std::vector<CheckResult> checks;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string grid_desc;
  bool all_pass = false;
  double wall_time_s = 0;  // volatile, excluded from the deterministic dump

  nlohmann::json to_json(bool include_volatile = true) const;
};

/// Executes the registered checks; a check that throws is recorded as
/// a failure and the suite continues.
VerificationReport run_suite(const RunConfig& cfg);

}  // namespace nlmax

#endif  // NLMAX_SUITE_HPP
