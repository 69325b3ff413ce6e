#ifndef HELMDISK_GEOMETRY_HPP
#define HELMDISK_GEOMETRY_HPP

#include "types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace helmdisk {

struct Disk {
  Point2 center;
  Real radius;
};

/// Point on the circle at parameter angle t.
inline Point2 boundary_point(const Disk& d, Real t) {
  return d.center + d.radius * Point2(std::cos(t), std::sin(t));
}

/// Outward unit normal at parameter angle t.
inline Point2 boundary_normal(const Disk&, Real t) {
  return {std::cos(t), std::sin(t)};
}

/// Union of non-touching disks plus the wavenumber.
struct DiskDomain {
  std::vector<Disk> disks;
  Real k = 1.0;
};

struct DomainViolation {
  int i = -1;        // offending pair (j == -1: radius/wavenumber fault on disk i)
  int j = -1;
  Real gap = 0.0;
  std::string what;
};

/// Checks r > 0, k > 0 and strict pairwise separation with a margin of
/// 1e-3 * min(r_i, r_j) beyond touching. Empty optional means valid.
std::optional<DomainViolation> validate_domain(const DiskDomain& dom);

/// validate_domain that throws std::invalid_argument on violation.
void require_valid(const DiskDomain& dom);

/// True if every disk lies in the open upper half-plane (center_y > radius),
/// as the design module requires.
bool upper_half_plane(const DiskDomain& dom);

/// N source points z_j = (j/(N+1), 0), j = 1..N, on the segment Lambda.
struct SourceLine {
  int count = 0;
  std::vector<Point2> points;

  explicit SourceLine(int n);
};

/// Equispaced angular grid t_n = -pi + 2 pi n / N_f with the anchor point
/// at angle pi, i.e. the n = 0 node sits at center + (-r, 0).
struct BoundaryGrid {
  int nf = 0;
  std::vector<Real> angles;

  explicit BoundaryGrid(int n_f);
};

/// Parse a domain configuration from JSON text:
///   {"k": <num>, "disks": [{"center":[x,y],"radius":r}, ...], "sources": N}
/// Throws std::invalid_argument naming the offending field on errors.
/// The optional "sources" count is returned through n_sources when present.
DiskDomain parse_domain_json(const std::string& text, int* n_sources = nullptr);

/// Serialize back to the same JSON schema.
std::string domain_to_json(const DiskDomain& dom, int n_sources = 0);

/// Convenience file loader (wraps parse_domain_json; errors cite the path).
DiskDomain load_domain_file(const std::string& path, int* n_sources = nullptr);

} // namespace helmdisk

#endif
