// Copyright (c) the nlmaxwell authors.
// SPDX-License-Identifier: Apache-2.0

#include "nlmax/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "nlmax/field_io.hpp"

namespace nlmax {

using nlohmann::json;

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

// Type-sniffing scalar: bool, integer, float, else string.
json sniff(const std::string& raw) {
  if (raw == "true") return true;
  if (raw == "false") return false;
  try {
    std::size_t pos = 0;
    const long long i = std::stoll(raw, &pos);
    if (pos == raw.size()) return i;
  } catch (...) {
  }
  try {
    std::size_t pos = 0;
    const double d = std::stod(raw, &pos);
    if (pos == raw.size()) return d;
  } catch (...) {
  }
  return raw;
}

json parse_ini(std::istream& in) {
  json root = json::object();
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[' && line.back() == ']') {
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty())
        throw ConfigError("config line " + std::to_string(lineno) +
                          ": empty section name");
      root[section] = root.value(section, json::object());
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos || section.empty())
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected key = value inside a section");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": empty key");
    root[section][key] = sniff(val);
  }
  return root;
}

template <typename T>
void take(json& sec, const char* key, T& out) {
  if (!sec.contains(key)) return;
  try {
    out = sec[key].get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config: bad type for key '") + key + "'");
  }
  sec.erase(key);
}

void take_string(json& sec, const char* key, std::string& out) {
  take<std::string>(sec, key, out);
}

void reject_leftovers(const json& sec, const std::string& name) {
  if (!sec.empty()) {
    std::string keys;
    for (auto it = sec.begin(); it != sec.end(); ++it)
      keys += (keys.empty() ? "" : ", ") + it.key();
    throw ConfigError("config: unknown key(s) in [" + name + "]: " + keys);
  }
}

}  // namespace

RunConfig RunConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  // JSON if the first non-space character is a brace.
  char c = 0;
  while (in.get(c) && std::isspace(static_cast<unsigned char>(c))) {
  }
  in.seekg(0);
  if (c == '{') {
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw ConfigError("config: invalid JSON: " + std::string(e.what()));
    }
    return from_json(j);
  }
  return from_json(parse_ini(in));
}

RunConfig RunConfig::from_json(const json& input) {
  if (!input.is_object()) throw ConfigError("config: root must be an object");
  json j = input;
  RunConfig cfg;

  static const std::set<std::string> known = {"grid",   "medium", "nonlinearity",
                                              "solver", "io",     "verify"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key()))
      throw ConfigError("config: unknown section [" + it.key() + "]");

  if (j.contains("grid")) {
    json& s = j["grid"];
    std::string mode = to_string(cfg.mode), bc = to_string(cfg.bc);
    take(s, "n", cfg.n);
    take(s, "cell_length", cfg.cell_length);
    take_string(s, "mode", mode);
    take_string(s, "bc", bc);
    cfg.mode = grid_mode_from_string(mode);
    cfg.bc = cavity_bc_from_string(bc);
    reject_leftovers(s, "grid");
  }
  if (j.contains("medium")) {
    json& s = j["medium"];
    take(s, "eps0", cfg.eps0);
    take(s, "mu0", cfg.mu0);
    take(s, "omega_sq", cfg.omega_sq);
    take(s, "positivity_floor", cfg.positivity_floor);
    reject_leftovers(s, "medium");
  }
  if (j.contains("nonlinearity")) {
    json& s = j["nonlinearity"];
    take_string(s, "kind", cfg.nl_kind);
    take(s, "p", cfg.p);
    take_string(s, "a", cfg.a_kind);
    take(s, "a_value", cfg.a_value);
    take(s, "a_amp", cfg.a_amp);
    take(s, "a_q", cfg.a_q);
    reject_leftovers(s, "nonlinearity");
  }
  if (j.contains("solver")) {
    json& s = j["solver"];
    take_string(s, "case", cfg.case_name);
    take(s, "grad_tol", cfg.grad_tol);
    take(s, "max_iters", cfg.max_iters);
    take(s, "restarts", cfg.restarts);
    take(s, "sector_m", cfg.sector_m);
    take(s, "dedup_energy", cfg.dedup_energy);
    take(s, "dedup_distance", cfg.dedup_distance);
    take(s, "seed", cfg.seed);
    reject_leftovers(s, "solver");
  }
  if (j.contains("io")) {
    json& s = j["io"];
    take_string(s, "out_dir", cfg.out_dir);
    take(s, "write_trajectory", cfg.write_trajectory);
    reject_leftovers(s, "io");
  }
  if (j.contains("verify")) {
    json& s = j["verify"];
    take(s, "tol_projection", cfg.tol_projection);
    take(s, "tol_curlcurl", cfg.tol_curlcurl);
    take(s, "tol_eig_rel", cfg.tol_eig_rel);
    take(s, "tol_fredholm", cfg.tol_fredholm);
    take(s, "tol_roundtrip", cfg.tol_roundtrip);
    take(s, "tol_grad_fd", cfg.tol_grad_fd);
    take(s, "tol_pipeline", cfg.tol_pipeline);
    take(s, "tol_divcurl", cfg.tol_divcurl);
    take(s, "tol_equivariance", cfg.tol_equivariance);
    take(s, "min_resolvent_order", cfg.min_resolvent_order);
    reject_leftovers(s, "verify");
  }

  cfg.validate();
  return cfg;
}

void RunConfig::validate() const {
  grid().validate();
  Medium(eps0, mu0, omega_sq);
  if (nl_kind != "power")
    throw ConfigError(
        "config: only the power nonlinearity is configurable; custom kinds "
        "are constructed through the library API");
  const bool fullspace_window = (mode == GridMode::periodic);
  if (fullspace_window ? !(p > 4.0 && p < 6.0) : !(p > 2.0 && p < 6.0))
    throw ConfigError("config: exponent p outside the admissible window");
  if (a_kind != "constant" && a_kind != "cosine_preset" &&
      a_kind.find('/') == std::string::npos && a_kind.find('.') == std::string::npos)
    throw ConfigError("config: a must be constant, cosine_preset or a path");
  if (case_name != "auto" && case_name != "I" && case_name != "II" &&
      case_name != "III" && case_name != "fullspace")
    throw ConfigError("config: case must be auto, I, II, III or fullspace");
  if (grad_tol <= 0 || max_iters <= 0 || sector_m < 1)
    throw ConfigError("config: solver parameters out of range");
}

GridSpec RunConfig::grid() const { return GridSpec(n, cell_length, mode); }

Medium RunConfig::medium() const {
  Medium m(eps0, mu0, omega_sq);
  m.positivity_floor = positivity_floor;
  return m;
}

Nonlinearity RunConfig::nonlinearity() const {
  const bool fullspace = (mode == GridMode::periodic);
  Weight w = Weight::constant(a_value);
  if (a_kind == "cosine_preset") {
    w = Weight::cosine(a_amp, a_q, cell_length);
  } else if (a_kind != "constant") {
    // Path to a field file; the x component carries the scalar weight.
    VectorField f = read_field(a_kind);
    std::vector<double> scalar(f.grid().num_points());
    for (std::size_t i = 0; i < scalar.size(); ++i) scalar[i] = f.data()[3 * i];
    w = Weight::from_samples(f.grid(), std::move(scalar));
  }
  return Nonlinearity::power(p, std::move(w), fullspace);
}

json RunConfig::to_json() const {
  json j;
  j["grid"] = {{"n", n},
               {"cell_length", cell_length},
               {"mode", to_string(mode)},
               {"bc", to_string(bc)}};
  j["medium"] = {{"eps0", eps0},
                 {"mu0", mu0},
                 {"omega_sq", omega_sq},
                 {"positivity_floor", positivity_floor}};
  j["nonlinearity"] = {{"kind", nl_kind}, {"p", p},   {"a", a_kind},
                       {"a_value", a_value}, {"a_amp", a_amp}, {"a_q", a_q}};
  j["solver"] = {{"case", case_name},
                 {"grad_tol", grad_tol},
                 {"max_iters", max_iters},
                 {"restarts", restarts},
                 {"sector_m", sector_m},
                 {"dedup_energy", dedup_energy},
                 {"dedup_distance", dedup_distance},
                 {"seed", seed}};
  j["io"] = {{"out_dir", out_dir}, {"write_trajectory", write_trajectory}};
  j["verify"] = {{"tol_projection", tol_projection},
                 {"tol_curlcurl", tol_curlcurl},
                 {"tol_eig_rel", tol_eig_rel},
                 {"tol_fredholm", tol_fredholm},
                 {"tol_roundtrip", tol_roundtrip},
                 {"tol_grad_fd", tol_grad_fd},
                 {"tol_pipeline", tol_pipeline},
                 {"tol_divcurl", tol_divcurl},
                 {"tol_equivariance", tol_equivariance},
                 {"min_resolvent_order", min_resolvent_order}};
  return j;
}

std::string RunConfig::hash() const {
  const std::string s = to_json().dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream oss;
  oss << std::hex << h;
  return oss.str();
}

}  // namespace nlmax
