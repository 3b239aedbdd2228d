#pragma once

// Brute-force cross-checks of the clustering, diameter and volume routines.

#include <string>
#include <vector>

#include "coxperc/core.hpp"

namespace coxperc {

struct ClusteringOracleRow {
  int dim = 2;
  int trials = 0;
  int mismatches = 0;
  int max_points = 0;
};

/// Random ball configurations with at most max_points balls, labelled by
/// build_clusters and by an O(n^2) graph search; counts partition mismatches.
std::vector<ClusteringOracleRow> clustering_oracle(const std::vector<int>& dims, int trials, int max_points, Seed seed);

struct DiameterOracleRow {
  int cluster = 0;
  int balls = 0;
  double formula = 0.0;
  double sampled = 0.0;
  double abs_diff = 0.0;
};

/// Planar chain clusters; cluster_diameter against the diameter of the disk
/// boundaries sampled at arc-length pitch (convex hull + rotating calipers).
std::vector<DiameterOracleRow> diameter_oracle(int clusters, double pitch, Seed seed);

struct VolumeOracleRow {
  std::string name;
  double exact = 0.0;
  double estimate = 0.0;
  double se = 0.0;
  double z = 0.0;
};

/// Unit disk and the union of two unit disks at distance `separation`.
std::vector<VolumeOracleRow> volume_oracle(std::int64_t samples, double separation, Seed seed);

}  // namespace coxperc
