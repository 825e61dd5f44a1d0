#pragma once

#include <filesystem>

#include "hslab/variational.hpp"

namespace hslab {

/// Flat binary snapshot, every entry a little-endian 64-bit float:
///   N, nodes_per_axis[N], lo[N], hi[N], then the row-major node values.
void write_field_snapshot(const std::filesystem::path& path, const DomainGrid& grid, const DiscreteField& u);

struct FieldSnapshot {
  DomainGrid grid;
  DiscreteField values;
};

FieldSnapshot read_field_snapshot(const std::filesystem::path& path);

}  // namespace hslab
