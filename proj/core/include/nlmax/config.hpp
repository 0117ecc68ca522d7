// Copyright (c) the nlmaxwell authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef NLMAX_CONFIG_HPP
#define NLMAX_CONFIG_HPP

#include <cstdint>
#include <string>

#include <json.hpp>

#include "nlmax/cavity.hpp"
#include "nlmax/nonlin.hpp"

namespace nlmax {

/// Run configuration: sectioned key = value text or the JSON encoding
/// of the same schema. Unknown sections or keys are rejected before
/// any computation runs.
struct RunConfig {
  // [grid]
  int n = 8;
  double cell_length = kTwoPi;
  GridMode mode = GridMode::periodic;
  CavityBC bc = CavityBC::neumann;

  // [medium]
  double eps0 = 1.0;
  double mu0 = 1.0;
  double omega_sq = 2.5;
  double positivity_floor = 1e-8;

  // [nonlinearity]
  std::string nl_kind = "power";
  double p = 4.0;
  std::string a_kind = "constant";  // constant | cosine_preset | <path>
  double a_value = 1.0;
  double a_amp = 0.3;
  int a_q = 2;

  // [solver]
  std::string case_name = "auto";  // auto | I | II | III | fullspace
  double grad_tol = 1e-6;
  int max_iters = 10000;
  int restarts = 3;
  int sector_m = 3;
  double dedup_energy = 1e-4;
  double dedup_distance = 1e-3;
  std::uint64_t seed = 1;

  // [io]
  std::string out_dir = ".";
  bool write_trajectory = false;

  // [verify]
  double tol_projection = 1e-12;
  double tol_curlcurl = 1e-12;
  double tol_eig_rel = 0.05;
  double tol_fredholm = 1e-8;
  double tol_roundtrip = 1e-10;
  double tol_grad_fd = 1e-6;
  double tol_pipeline = 1e-6;
  double tol_divcurl = 1e-12;
  double tol_equivariance = 1e-12;
  double min_resolvent_order = 1.9;

  static RunConfig parse_file(const std::string& path);
  static RunConfig from_json(const nlohmann::json& j);

  nlohmann::json to_json() const;
  std::string hash() const;  // FNV-1a of the canonical dump, hex

  GridSpec grid() const;
  Medium medium() const;
  Nonlinearity nonlinearity() const;
  void validate() const;
};

}  // namespace nlmax

#endif  // NLMAX_CONFIG_HPP
