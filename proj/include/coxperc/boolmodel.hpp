#pragma once

// Connectivity of the Boolean model and per-cluster observables.

#include <ostream>
#include <span>
#include <vector>

#include "coxperc/coxsampler.hpp"

namespace coxperc {

struct ClusterLabels {
  /// Compact cluster id per point, numbered in order of first appearance.
  std::vector<int> label;
  int count = 0;
  std::vector<std::vector<int>> members;
};

ClusterLabels build_clusters(std::span<const Point> centers, std::span<const double> radii);
inline ClusterLabels build_clusters(const MarkedPointSet& mps) { return build_clusters(mps.points, mps.radii); }

struct VolumeEstimate {
  double estimate = 0.0;
  double se = 0.0;
};

struct ClusterStats {
  bool empty = true;
  std::int64_t point_count = 0;
  double diameter = 0.0;
  double reach = 0.0;
  VolumeEstimate volume;
  bool censored = false;
};

struct OriginOptions {
  bool volume = false;
  /// 0 picks the default so that the SE is about 1% of v_d (max radius)^d.
  std::int64_t volume_samples = 0;
};

/// Observables of the cluster containing the origin (all zero when uncovered).
ClusterStats origin_cluster(const MarkedPointSet& mps, const ClusterLabels& labels, const OriginOptions& opt = {});

/// Origin cluster by breadth-first search from the balls covering o; same
/// members as the union-find cluster, without labelling the whole sample.
std::vector<int> origin_members(const MarkedPointSet& mps);
ClusterStats origin_cluster_stats(const MarkedPointSet& mps, const std::vector<int>& members, const OriginOptions& opt = {});

/// max over member pairs (i = j included) of |X_i - X_j| + rho_i + rho_j.
double cluster_diameter(std::span<const Point> centers, std::span<const double> radii, const std::vector<int>& members);

/// Hit-or-miss volume of a union of balls over its bounding box. d = 1 is exact.
VolumeEstimate union_volume_mc(std::span<const Point> centers, std::span<const double> radii, std::int64_t n_samples, Seed seed);

/// True iff one cluster has balls meeting both faces x_axis = -L and x_axis = +L of inner.
bool crossing_exists(const MarkedPointSet& mps, const ClusterLabels& labels, const Window& inner, int axis);

/// Number of clusters meeting two opposite faces of inner along some axis.
int giant_cluster_count(const MarkedPointSet& mps, const ClusterLabels& labels, const Window& inner);

enum class GVariant { point_cluster, ball_cluster };
std::string to_string(GVariant v);

/// G(o, alpha): using only points within 10 alpha of o, the chosen cluster
/// together with B_alpha(o) is not contained in B_{8 alpha}(o).
bool g_event(const MarkedPointSet& mps, double alpha, GVariant variant);

/// CSV with columns id, x1..xd, radius, cluster.
void write_clusters_csv(std::ostream& os, const MarkedPointSet& mps, const ClusterLabels& labels);

}  // namespace coxperc
