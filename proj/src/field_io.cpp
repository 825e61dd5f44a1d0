#include "hslab/field_io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

namespace hslab {

namespace {

static_assert(std::endian::native == std::endian::little, "snapshot writer assumes a little-endian host");

void put(std::ofstream& out, double v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); }

double take(std::ifstream& in, const std::filesystem::path& path) {
  double v;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) {
    throw Error(Errc::Io, "truncated snapshot " + path.string());
  }
  return v;
}

int as_count(double v, const std::filesystem::path& path) {
  if (!(v >= 1.0 && v < 1e9) || std::floor(v) != v) throw Error(Errc::Io, "corrupt snapshot header in " + path.string());
  return static_cast<int>(v);
}

}  // namespace

void write_field_snapshot(const std::filesystem::path& path, const DomainGrid& grid, const DiscreteField& u) {
  if (u.size() != grid.size()) throw Error(Errc::ShapeMismatch, "field does not match grid");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::Io, "cannot open " + path.string() + " for writing");
  put(out, grid.dim());
  for (int n : grid.nodes_per_axis()) put(out, n);
  for (int d = 0; d < grid.dim(); ++d) put(out, grid.lo()[d]);
  for (int d = 0; d < grid.dim(); ++d) put(out, grid.hi()[d]);
  out.write(reinterpret_cast<const char*>(u.data()), static_cast<std::streamsize>(u.size() * sizeof(double)));
  if (!out) throw Error(Errc::Io, "write failed for " + path.string());
}

FieldSnapshot read_field_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open " + path.string());
  const int N = as_count(take(in, path), path);
  std::vector<int> nodes(N);
  for (int& n : nodes) n = as_count(take(in, path), path);
  Eigen::VectorXd lo(N), hi(N);
  for (int d = 0; d < N; ++d) lo[d] = take(in, path);
  for (int d = 0; d < N; ++d) hi[d] = take(in, path);
  DomainGrid grid(lo, hi, nodes);
  DiscreteField u(grid.size());
  if (!in.read(reinterpret_cast<char*>(u.data()), static_cast<std::streamsize>(u.size() * sizeof(double)))) {
    throw Error(Errc::Io, "truncated snapshot " + path.string());
  }
  return {std::move(grid), std::move(u)};
}

}  // namespace hslab
