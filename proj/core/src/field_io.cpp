// Copyright (c) the nlmaxwell authors.
// SPDX-License-Identifier: Apache-2.0

#include "nlmax/field_io.hpp"

#include <bit>
#include <fstream>

#include <json.hpp>

namespace nlmax {

static_assert(std::endian::native == std::endian::little,
              "field files are little-endian; big-endian hosts unsupported");

using nlohmann::json;

void write_field(const VectorField& f, const std::string& path) {
  std::ofstream raw(path, std::ios::binary);
  if (!raw) throw ConfigError("write_field: cannot open " + path);
  raw.write(reinterpret_cast<const char*>(f.data()),
            static_cast<std::streamsize>(f.size() * sizeof(double)));
  if (!raw) throw ConfigError("write_field: short write to " + path);

  json side;
  side["format_version"] = kFieldFormatVersion;
  side["n_per_axis"] = f.grid().n;
  side["cell_length"] = f.grid().cell_length;
  side["mode"] = to_string(f.grid().mode);
  side["components"] = {"x", "y", "z"};
  side["layout"] = "z-fastest-interleaved";
  std::ofstream meta(path + ".json");
  if (!meta) throw ConfigError("write_field: cannot open " + path + ".json");
  meta << side.dump(2) << "\n";
}

VectorField read_field(const std::string& path) {
  std::ifstream meta(path + ".json");
  if (!meta) throw ConfigError("read_field: missing sidecar " + path + ".json");
  json side;
  try {
    meta >> side;
  } catch (const json::exception& e) {
    throw ConfigError("read_field: bad sidecar: " + std::string(e.what()));
  }
  for (const char* key :
       {"format_version", "n_per_axis", "cell_length", "mode", "layout"}) {
    if (!side.contains(key))
      throw ConfigError(std::string("read_field: sidecar missing ") + key);
  }
  if (side["format_version"].get<int>() != kFieldFormatVersion)
    throw ConfigError("read_field: unsupported format_version");
  if (side["layout"].get<std::string>() != "z-fastest-interleaved")
    throw ConfigError("read_field: unsupported layout");

  GridSpec grid(side["n_per_axis"].get<int>(),
                side["cell_length"].get<double>(),
                grid_mode_from_string(side["mode"].get<std::string>()));

  std::ifstream raw(path, std::ios::binary | std::ios::ate);
  if (!raw) throw ConfigError("read_field: cannot open " + path);
  const auto bytes = static_cast<std::size_t>(raw.tellg());
  if (bytes != 3 * grid.num_points() * sizeof(double))
    throw ConfigError("read_field: payload length does not match sidecar");
  raw.seekg(0);
  std::vector<double> data(3 * grid.num_points());
  raw.read(reinterpret_cast<char*>(data.data()),
           static_cast<std::streamsize>(bytes));
  if (!raw) throw ConfigError("read_field: short read from " + path);
  VectorField f(grid, std::move(data));
  if (!f.all_finite())
    throw ConfigError("read_field: non-finite entries in " + path);
  return f;
}

}  // namespace nlmax
