// Copyright (c) the nlmaxwell authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef NLMAX_FIELD_IO_HPP
#define NLMAX_FIELD_IO_HPP

#include <string>

#include "nlmax/field.hpp"

namespace nlmax {

inline constexpr int kFieldFormatVersion = 1;

/// Writes `path` (raw little-endian float64 stream, z-fastest
/// interleaved layout) plus the JSON sidecar `path + ".json"` with
/// {format_version, n_per_axis, cell_length, mode, components, layout}.
void write_field(const VectorField& f, const std::string& path);

/// Reads a field written by write_field; validates the sidecar schema
/// and the payload length.
VectorField read_field(const std::string& path);

}  // namespace nlmax

#endif  // NLMAX_FIELD_IO_HPP
