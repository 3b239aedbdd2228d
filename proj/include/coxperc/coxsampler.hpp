#pragma once

// Cox points with intensity lambda * Lambda given a realization, plus i.i.d. radii.

#include <ostream>
#include <vector>

#include "coxperc/core.hpp"
#include "coxperc/environments.hpp"

namespace coxperc {

struct MarkedPointSet {
  std::vector<Point> points;
  std::vector<double> radii;
  Window window;
  double lambda = 0.0;
  Seed position_seed;
  Seed mark_seed;
  /// ess sup of the radius law (+inf if unbounded); drives the censoring pad.
  double radius_bound = kInf;

  std::size_t size() const { return points.size(); }
  int dim() const { return window.dim(); }
  /// Points whose center lies in the closed cube [-h, h]^dim.
  MarkedPointSet restricted(double h) const;
};

/// Exact Poisson sample of intensity lambda * Lambda on the padded window.
std::vector<Point> sample_cox(const EnvRealization& env, double lambda, Seed seed);

/// Radii drawn i.i.d. from `law` on a stream independent of the positions.
MarkedPointSet attach_marks(std::vector<Point> points, const RadiusLaw& law, Seed seed, const Window& window,
                            double lambda = 0.0);

/// One replicate: environment from seed.child(0), positions from seed.child(1),
/// marks from seed.child(2).
struct Replicate {
  EnvRealization env;
  MarkedPointSet marked;
};
Replicate sample_replicate(const EnvironmentSpec& spec, const RadiusLaw& law, const Window& window, double lambda, Seed seed);
/// Same as above for an already realized environment.
MarkedPointSet sample_marked(const EnvRealization& env, const RadiusLaw& law, double lambda, Seed seed);

/// CSV with columns x1..xd, radius.
void write_points_csv(std::ostream& os, const MarkedPointSet& mps);

}  // namespace coxperc
