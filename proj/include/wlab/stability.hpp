#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wlab/convex.hpp"
#include "wlab/projmeasure.hpp"
#include "wlab/symrep.hpp"

namespace wlab {

struct HusimiWorkspace {
  EmbeddingWorkspace embed;
  Vector coeff;
  Vector overlap;
};

// Evaluates u(z) = sum_j p_j |<symmetric power of z | psi_j>|^2 at chart
// points or directly at unit vectors. Snapshots the spectral data, so
// instances are immutable and safe to share.
class HusimiEvaluator {
 public:
  explicit HusimiEvaluator(const DensityOperator& rho);

  const SpaceSignature& sig() const { return embed_.sig(); }

  double eval(const ChartPoint& p) const;
  double eval(const ChartPoint& p, HusimiWorkspace& ws) const { return eval_sphere(p.lift, ws); }
  double eval_sphere(const Vector& v) const;
  double eval_sphere(const Vector& v, HusimiWorkspace& ws) const;

 private:
  CoherentEmbedding embed_;
  Matrix psi_;        // dim x rank eigenvector columns
  Eigen::VectorXd p_;
};

double husimi(const DensityOperator& rho, const ChartPoint& p);

// u sampled at n nu-distributed chart points; deterministic given seed and
// independent of the thread count.
std::vector<double> husimi_samples(const DensityOperator& rho, std::int64_t n,
                                   std::uint64_t seed, int threads = 1);

EmpiricalDistribution empirical_distribution(const HusimiEvaluator& u, std::int64_t n,
                                             std::uint64_t seed, int threads = 1);
EmpiricalDistribution empirical_distribution(const DensityOperator& rho, std::int64_t n,
                                             std::uint64_t seed, int threads = 1);

struct MeanResult {
  double value = 0.0;
  double mc_error = 0.0;  // standard error of the mean
};

MeanResult phi_mean(const ConvexFunctional& phi, const std::vector<double>& u_values);

// Monte-Carlo estimate of the phase-space average of phi(u).
MeanResult entropy_lhs(const DensityOperator& rho, const ConvexFunctional& phi, std::int64_t n,
                       std::uint64_t seed, int threads = 1);

// rhs_closed_form minus entropy_lhs; nonnegative up to noise.
MeanResult deficit(const DensityOperator& rho, const ConvexFunctional& phi, std::int64_t n,
                   std::uint64_t seed, int threads = 1);

// value of u extended off the sphere: <symmetric power of v | rho | same>
double husimi_value_at(const DensityOperator& rho, const Vector& v);

// Wirtinger gradient d/d(conj v) of the map above. The gradient with respect
// to the 2N real coordinates is twice (Re, Im) of this vector.
Vector husimi_wirtinger_gradient(const DensityOperator& rho, const Vector& v);

struct SupResult {
  double T = 0.0;
  Vector argmax_v;
  int n_starts = 0;
  bool converged = false;
};

// Multi-start projected gradient ascent of v -> u(v) over the unit sphere.
// Starts at the top eigenvector of the one-body reduction (of rho and of its
// dominant eigenvector) plus seeded random directions.
SupResult sup_husimi(const DensityOperator& rho, int n_starts, std::uint64_t seed);

struct TraceDistanceResult {
  double value = 0.0;
  Vector argmin_v;
  bool converged = false;
};

// inf over unit v of the trace norm of rho minus the coherent projector at v.
TraceDistanceResult trace_distance_full(const DensityOperator& rho, int n_starts,
                                        std::uint64_t seed);
double trace_distance(const DensityOperator& rho, int n_starts, std::uint64_t seed);

// integral over [T,1] of (phi'(t) - phi'_-(T)) mu0(t) dt; zero at T = 1.
double stability_lower_bound(double T, const ConvexFunctional& phi, const SpaceSignature& sig,
                             double tol = 1e-10);

struct StabilityReport {
  int N = 0;
  int M = 0;
  std::string phi;
  std::uint64_t seed = 0;
  std::int64_t n_samples = 0;
  double T = 0.0;
  double D = 0.0;
  double deficit = 0.0;
  double mc_error = 0.0;
  double lower_bound = 0.0;
  double ratio = 0.0;  // deficit / D^2, +inf when D vanishes
  bool pass = false;
  std::vector<std::string> failures;  // empty iff pass
};

struct VerifyOptions {
  int n_starts = 16;
  int threads = 1;
  double quad_tol = 1e-10;
};

// Runs the full battery for one state: deficit sign, deficit against the
// tail lower bound at the measured supremum, and the trace-distance cap
// 4(1-T). Violations are flagged in the report, never thrown.
StabilityReport verify_stability(const DensityOperator& rho, const ConvexFunctional& phi,
                               std::int64_t n, std::uint64_t seed,
                               const VerifyOptions& opts = {});

struct ConcentrationFit {
  double t0 = 0.0;
  double T0 = 0.0;     // measured supremum of u
  double C0_hat = 0.0; // smallest constant closing the super-level comparison
  struct Row {
    double t;
    double mu;
    double mu0_scaled;  // mu0(t/T)
  };
  std::vector<Row> grid;
};

// Fits the smallest C0 with mu(t) <= (1 + C0 (1-T)) mu0(t/T) + 3 sigma(t) on a
// grid over [t0, T); the binomial 3-sigma allowance keeps sampling noise from
// inflating the constant when T is close to one. Diagnostic only.
ConcentrationFit fit_concentration(const DensityOperator& rho, double t0, std::int64_t n,
                                   std::uint64_t seed, int n_starts = 16, int threads = 1);

}  // namespace wlab
