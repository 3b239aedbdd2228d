#pragma once

// Planar Poisson-Voronoi and Poisson-Delaunay edge sets restricted to a window.

#include <stdexcept>
#include <vector>

#include "coxperc/environments.hpp"

namespace coxperc {

enum class TessKind { voronoi, delaunay };

struct TessellationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Edges of the tessellation of `sites` (all inside [-site_half, site_half]^2)
/// clipped to [-keep, keep]^2. Every returned edge is certified to coincide with
/// the tessellation of any point set agreeing with `sites` on the sample box;
/// a TessellationError is thrown when the pad is too thin to certify an edge.
std::vector<Segment> tessellation_edges(const std::vector<Point>& sites, double site_half, double keep, TessKind kind);

}  // namespace coxperc
