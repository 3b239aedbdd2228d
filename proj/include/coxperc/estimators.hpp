#pragma once

// Replicated Monte Carlo estimators built on top of the sampler and the cluster code.

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "coxperc/boolmodel.hpp"
#include "coxperc/environments.hpp"
#include "coxperc/stats.hpp"

namespace coxperc {

/// Raised when an estimator cannot produce a result for valid input
/// (no bracket found, regime check failed, ...).
struct EstimatorError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Environment, radius law and observation window shared by most experiments.
struct Model {
  EnvironmentSpec env;
  RadiusLaw law;
  Window window;
};

// --- vacant probability -----------------------------------------------------

struct VacantRow {
  double lambda = 0.0;
  Proportion vacant;
  std::optional<double> closed_form;
  /// P(rho > L + m): mass of balls that could cover o but are never sampled.
  double truncation = 0.0;
};

std::vector<VacantRow> vacant_probability(const Model& m, const std::vector<double>& lambdas, std::int64_t replicates,
                                          Seed seed, const Exec& exec = {});
/// E[exp(-lambda Z v_d E[rho^d])] where available (homogeneous and mixed Poisson).
std::optional<double> vacant_closed_form(const EnvironmentSpec& env, const RadiusLaw& law, int dim, double lambda);

// --- crossing probabilities -------------------------------------------------

struct CurveRow {
  double lambda = 0.0;
  double half_width = 0.0;
  Proportion crossing;
};

/// Crossing fraction of Q_L along axis 0 for each lambda, with common random
/// numbers across lambda (one environment per replicate).
std::vector<CurveRow> percolation_curve(const Model& m, const std::vector<double>& lambdas, std::int64_t replicates, Seed seed,
                                        const Exec& exec = {});
/// True when some lower-lambda estimate exceeds a higher-lambda one beyond both Wilson intervals.
bool curve_violates_monotonicity(const std::vector<CurveRow>& rows);

struct CriticalResult {
  double estimate = 0.0;
  double ci_half_width = 0.0;
  double half_width = 0.0;
  double tolerance = 0.0;
  std::vector<CurveRow> evaluations;
};

struct CriticalOptions {
  double tolerance = 0.01;
  std::optional<double> initial;
  /// Give up once the expected number of points in the padded window exceeds this.
  double max_expected_points = 2e6;
};

/// Bisection on crossing probability = 1/2 at fixed L.
CriticalResult critical_intensity(const Model& m, std::int64_t replicates, Seed seed, const CriticalOptions& opt = {},
                                  const Exec& exec = {});

// --- moment ladders ---------------------------------------------------------

enum class Observable { volume, diameter, count };
std::string to_string(Observable o);
Observable observable_from_string(const std::string& s);

struct LadderRung {
  double half_width = 0.0;
  MeanSe moment;
  double censored_fraction = 0.0;
  /// Witness alpha = L/2 and the empirical P(exists i: |X_i| + alpha < rho_i).
  double witness_alpha = 0.0;
  Proportion witness;
};

struct MomentLadder {
  Observable observable = Observable::diameter;
  double s = 1.0;
  double exponent = 1.0;
  double lambda = 0.0;
  std::vector<LadderRung> rungs;
  std::string verdict;
  /// Crossing fraction at 2 lambda on the smallest rung (subcritical check).
  std::optional<Proportion> check_crossing;
};

struct LadderOptions {
  bool enforce_subcritical = true;
  std::int64_t check_replicates = 200;
  std::int64_t volume_samples = 10000;
};

MomentLadder moment_ladder(const EnvironmentSpec& env, const RadiusLaw& law, int dim, double lambda, double s, Observable obs,
                           const std::vector<double>& ladder, double margin, std::int64_t replicates, Seed seed,
                           const LadderOptions& opt = {}, const Exec& exec = {});
std::string ladder_verdict(const std::vector<LadderRung>& rungs);

// --- deviation tails ----------------------------------------------------------

struct DeviationRow {
  double alpha = 0.0;
  Proportion tail;
  /// alpha^{-d} log E[exp(beta Lambda(B_alpha))].
  double log_mgf_rate = 0.0;
  /// E[|Lambda(B_alpha) - |B_alpha||^beta].
  double abs_moment = 0.0;
  /// int_1^alpha a^{s-1} P(Lambda(B_a) >= c a^d) da by trapezoids on the grid.
  double integral = 0.0;
};

struct DeviationReport {
  double c = 0.0;
  double s = 1.0;
  double beta = 1.0;
  std::vector<DeviationRow> rows;
  double relative_growth = 0.0;
  std::string verdict;
};

DeviationReport deviation_tail(const EnvironmentSpec& env, int dim, double c, double s, const std::vector<double>& alphas,
                               std::int64_t replicates, Seed seed, double beta = 1.0, const Exec& exec = {});

// --- scaling recursion --------------------------------------------------------

struct RecursionRung {
  GVariant variant = GVariant::point_cluster;
  double alpha = 0.0;
  Proportion g;
  /// P(M >= 9 alpha) for the full-window origin cluster.
  Proportion reach;
  /// Campbell-type tail lambda c int_alpha^inf r^d nu(dr) used by the next rung.
  double radius_tail = 0.0;
  double phi_next = 0.0;
  bool phi_estimated = false;
  // Comparisons for the step alpha/10 -> alpha (absent on the first rung):
  // square_bound = f(alpha/10)^2 + g, scaled_bound = c f(alpha/10)^2 + g.
  std::optional<double> square_bound;
  std::optional<double> scaled_bound;
  bool square_pass = true;
  bool scaled_pass = true;
  /// P(G(o, alpha)) <= c lambda alpha^d within 3 SE.
  bool linear_pass = true;
};

struct RecursionReport {
  double lambda = 0.0;
  std::map<std::string, double> c;
  std::vector<RecursionRung> rungs;
  bool phi_unavailable = false;
  bool pass = true;
};

RecursionReport scaling_recursion(const Model& m, double lambda, const std::vector<double>& alphas, std::int64_t replicates,
                                  Seed seed, const std::vector<GVariant>& variants, const Exec& exec = {});

// --- uniqueness ---------------------------------------------------------------

struct UniquenessRow {
  double half_width = 0.0;
  std::map<int, std::int64_t> histogram;
  Proportion at_least_two;
  Proportion at_least_one;
};

struct UniquenessReport {
  double lambda = 0.0;
  std::vector<UniquenessRow> rows;
  bool nonincreasing = true;
};

UniquenessReport uniqueness_report(const EnvironmentSpec& env, const RadiusLaw& law, int dim, double lambda,
                                   const std::vector<double>& ladder, double margin, std::int64_t replicates, Seed seed,
                                   bool require_supercritical = true, const Exec& exec = {});

// --- one-dimensional triviality -------------------------------------------------

struct OneDimRow {
  double half_width = 0.0;
  Proportion crossing;
  std::optional<double> exact;
};

struct OneDimReport {
  double lambda = 0.0;
  std::vector<OneDimRow> rows;
  bool nonincreasing = true;
  bool strictly_decreasing = true;
};

OneDimReport one_dim_triviality(const RadiusLaw& law, double lambda, const std::vector<double>& ladder, double margin,
                                std::int64_t replicates, Seed seed, double exact_max_half_width = 50.0, const Exec& exec = {});
/// P([-L, L] covered) for exponential radii of the given rate on the whole line.
double exponential_cover_probability(double lambda, double rate, double half_width);

// --- composite experiments ------------------------------------------------------

struct DecayReport {
  CriticalResult critical;
  double fraction = 0.25;
  double lambda = 0.0;
  std::vector<CurveRow> rows;
  bool strictly_decreasing = true;
};

/// Locate lambda_c at critical_half_width, then measure crossing at fraction * lambda_c over a ladder of L.
DecayReport subcritical_decay(const EnvironmentSpec& env, const RadiusLaw& law, int dim, double critical_half_width,
                              double margin, std::int64_t critical_replicates, const CriticalOptions& copt, double fraction,
                              const std::vector<double>& ladder, std::int64_t replicates, Seed seed, const Exec& exec = {});

struct ContrastReport {
  CriticalResult reference_critical;
  double fraction = 0.2;
  double lambda = 0.0;
  CurveRow target;
  CurveRow reference;
};

/// Crossing at fraction * lambda_c(homogeneous) for `env` and for the homogeneous reference.
ContrastReport zero_critical_contrast(const EnvironmentSpec& env, const RadiusLaw& law, int dim, double critical_half_width,
                                      double half_width, double margin, std::int64_t critical_replicates,
                                      const CriticalOptions& copt, double fraction, std::int64_t replicates, Seed seed,
                                      const Exec& exec = {});

}  // namespace coxperc
