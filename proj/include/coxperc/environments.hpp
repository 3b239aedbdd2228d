#pragma once

// Directing measures: spec types, sampled realizations, mass queries,
// radius fields and the essential-connectedness audit.

#include <functional>
#include <ostream>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "coxperc/ball_index.hpp"
#include "coxperc/core.hpp"
#include "coxperc/stats.hpp"

namespace coxperc {

namespace env {
/// Lebesgue measure.
struct Homogeneous {};
/// Lambda(dx) = Z dx with Z drawn from a two_point or pareto law of mean 1.
struct MixedPoisson {
  RadiusLaw z;
};
/// Density lambda1 on a Boolean model (PPP intensity mu, radius r) and lambda2 off it.
struct IndicatorField {
  double lambda1;
  double lambda2;
  double mu;
  double radius;
};
/// Top-hat kernel of radius support_radius around a PPP of intensity mu.
struct ShotNoise {
  double mu;
  double support_radius;
};
/// Density proportional to the number of driving balls covering x.
struct BooleanCount {
  double mu;
  RadiusLaw law;
};
struct VoronoiEdges {
  double mu;
};
struct DelaunayEdges {
  double mu;
};
struct ManhattanGrid {
  double mu_vertical;
  double mu_horizontal;
};
}  // namespace env

class EnvironmentSpec {
 public:
  using Variant = std::variant<env::Homogeneous, env::MixedPoisson, env::IndicatorField, env::ShotNoise, env::BooleanCount,
                               env::VoronoiEdges, env::DelaunayEdges, env::ManhattanGrid>;

  explicit EnvironmentSpec(Variant v);

  static EnvironmentSpec homogeneous() { return EnvironmentSpec(env::Homogeneous{}); }
  static EnvironmentSpec mixed_poisson(RadiusLaw z) { return EnvironmentSpec(env::MixedPoisson{z}); }
  static EnvironmentSpec indicator_field(double l1, double l2, double mu, double r) {
    return EnvironmentSpec(env::IndicatorField{l1, l2, mu, r});
  }
  static EnvironmentSpec shot_noise(double mu, double support) { return EnvironmentSpec(env::ShotNoise{mu, support}); }
  static EnvironmentSpec boolean_count(double mu, RadiusLaw law) { return EnvironmentSpec(env::BooleanCount{mu, law}); }
  static EnvironmentSpec voronoi(double mu) { return EnvironmentSpec(env::VoronoiEdges{mu}); }
  static EnvironmentSpec delaunay(double mu) { return EnvironmentSpec(env::DelaunayEdges{mu}); }
  static EnvironmentSpec manhattan(double mv, double mh) { return EnvironmentSpec(env::ManhattanGrid{mv, mh}); }

  const Variant& variant() const { return v_; }
  std::string type_name() const;
  std::string describe() const;

  /// Constant making E[Lambda([0,1]^d)] = 1: kernel height, lambda-tilde,
  /// inverse edge density, or the indicator-field scale.
  double normalization(int dim) const;
  /// Range beyond which the realization on Q_L is unaffected; 0 when the
  /// sampler is exact regardless of margin.
  double required_margin() const;
  bool supports_dim(int dim) const;
  bool has_radius_field() const;

 private:
  Variant v_;
};

/// Density on a regular grid tiling [-W, W]^dim, W the padded half width.
struct DensityGrid {
  int dim = 2;
  double lo = 0.0;
  double h = 1.0;
  std::array<int, 3> n{1, 1, 1};
  std::vector<double> value;

  std::size_t cell_index(const std::array<int, 3>& c) const {
    return (static_cast<std::size_t>(c[2]) * static_cast<std::size_t>(n[1]) + static_cast<std::size_t>(c[1])) *
               static_cast<std::size_t>(n[0]) +
           static_cast<std::size_t>(c[0]);
  }
  double cell_volume() const { return std::pow(h, dim); }
  double at(const Point& p) const;
};

struct Segment {
  Point a;
  Point b;
  double length() const { return distance(a, b); }
};

struct SegmentSet {
  std::vector<Segment> segments;
  double weight = 1.0;
};

/// Driving balls; density at x is weight * #{i : |Y_i - x| < r_i}.
struct BallSet {
  std::vector<Point> centers;
  std::vector<double> radii;
  double weight = 1.0;
  BallIndex index;
};

struct Scalar {
  double z = 1.0;
};

using Representation = std::variant<DensityGrid, SegmentSet, BallSet, Scalar>;

class EnvRealization {
 public:
  EnvRealization(std::optional<EnvironmentSpec> spec, Window window, Representation rep, Seed seed);

  /// Realization holding a user-supplied segment set (audits and tests).
  static EnvRealization from_segments(const Window& window, std::vector<Segment> segments, double weight = 1.0);
  /// Manhattan realization with prescribed line positions (kept up to 3 W).
  static EnvRealization from_lines(const EnvironmentSpec& spec, const Window& window, std::vector<double> vertical,
                                   std::vector<double> horizontal);

  const std::optional<EnvironmentSpec>& spec() const { return spec_; }
  const Window& window() const { return window_; }
  const Representation& representation() const { return rep_; }
  Seed seed() const { return seed_; }
  int dim() const { return window_.dim(); }

  /// Driving sites of a tessellation, sampled on Q_{site_half_width()}.
  const std::vector<Point>& sites() const { return sites_; }
  double site_half_width() const { return site_half_width_; }
  /// Manhattan line positions (x of vertical lines, y of horizontal lines),
  /// sorted, covering [-W, lines_upper()].
  const std::vector<double>& vertical_lines() const { return vlines_; }
  const std::vector<double>& horizontal_lines() const { return hlines_; }
  double lines_upper() const { return lines_upper_; }

  /// Lambda of the padded window.
  double total_mass() const;

 private:
  friend EnvRealization make_environment(const EnvironmentSpec&, const Window&, Seed);

  std::optional<EnvironmentSpec> spec_;
  Window window_;
  Representation rep_;
  Seed seed_;
  std::vector<Point> sites_;
  double site_half_width_ = 0.0;
  std::vector<double> vlines_, hlines_;
  double lines_upper_ = 0.0;
};

EnvRealization make_environment(const EnvironmentSpec& spec, const Window& window, Seed seed);

/// Lambda(B_alpha(center)); the ball must lie inside the padded window.
double measure_of_ball(const EnvRealization& env, const Point& center, double alpha);

/// One primitive per row: x1,y1,x2,y2 for segments, x1..xd,radius for driving balls.
/// Other representations have no primitives and raise std::invalid_argument.
void write_environment_csv(std::ostream& os, const EnvRealization& env);

/// Pixelate a realization into a DensityGrid of cell size about h (BallSet only).
EnvRealization rasterize(const EnvRealization& env, double h);

enum class FieldKind { stabilization, connectivity };

/// R_y as a function of the query point and, for the Delaunay field, the scale alpha.
/// Holds a reference to the realization, which must outlive it.
class RadiusField {
 public:
  RadiusField(FieldKind kind, bool experimental, std::function<double(const Point&, double)> f)
      : kind_(kind), experimental_(experimental), f_(std::move(f)) {}

  FieldKind kind() const { return kind_; }
  bool experimental() const { return experimental_; }
  double operator()(const Point& y, double alpha = 0.0) const { return f_(y, alpha); }

 private:
  FieldKind kind_;
  bool experimental_;
  std::function<double(const Point&, double)> f_;
};

RadiusField radius_field(const EnvRealization& env);

/// mu * int_alpha^inf |B_{2 alpha + r}| nu(dr), the expected number of driving
/// balls of radius >= alpha that can reach Q_alpha.
double campbell_bound(int dim, double mu, const RadiusLaw& law, double alpha);

struct PhiRow {
  double alpha = 0.0;
  Proportion hits;
  std::optional<double> campbell;
};

struct PhiReport {
  std::vector<PhiRow> rows;
  double grid_step = 0.0;
  bool experimental = false;
};

/// Fraction of replicates where max R over a pitch-grid_step lattice in Q_alpha is >= alpha.
PhiReport phi_hat(const EnvironmentSpec& spec, int dim, const std::vector<double>& alphas, double grid_step,
                  std::int64_t replicates, Seed seed, const Exec& exec = {});

enum class Precondition { held, not_held, not_evaluable };
std::string to_string(Precondition p);

struct AuditReport {
  Precondition precondition = Precondition::not_evaluable;
  double sup_radius = 0.0;
  bool connected = true;
  std::size_t support_nodes = 0;
  std::vector<Point> witness_path;
  std::optional<std::pair<Point, Point>> failing_pair;
};

/// Checks whether the support of Lambda in Q_alpha is linked through Q_{2 alpha} by hops shorter than r.
AuditReport essential_connectedness_audit(const EnvRealization& env, double r, double alpha);

}  // namespace coxperc
