#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

#include "wlab/convex.hpp"
#include "wlab/symrep.hpp"

namespace wlab {

// Weighted Bergman space on the unit disk. The p-norm integrates
// |f|^p (1-|z|^2)^alpha against the hyperbolic measure dA/(1-|z|^2)^2; the
// normalizer is fixed by the condition that the constant one has unit norm,
// which pins it to (alpha-1)/pi.
struct BergmanConfig {
  double p;
  double alpha;
  double normalizer;
  BergmanConfig(double p, double alpha);
};

// Either a polynomial in z or a member of the extremal family
// e^{i theta} (1-|w|^2)^{alpha/p} / (1 - conj(w) z)^{2 alpha/p}.
class DiskFunction {
 public:
  static DiskFunction polynomial(std::vector<Complex> coeffs);
  static DiskFunction extremal(Complex w, double theta);

  Complex eval(Complex z, const BergmanConfig& cfg) const;
  bool is_extremal() const { return extremal_; }
  Complex w() const { return w_; }
  DiskFunction scaled(double s) const;  // polynomials only

 private:
  DiskFunction() = default;
  bool extremal_ = false;
  std::vector<Complex> coeffs_;
  Complex w_ = 0.0;
  double theta_ = 0.0;
};

struct MobiusMap {
  Complex w;
  Complex apply(Complex z) const { return (w - z) / (1.0 - std::conj(w) * z); }
};

// absolute difference between 1-|phi_w(z)|^2 and its product form
double mobius_identity_residual(Complex w, Complex z);

// p-norm by radial-angular quadrature; callables receive (z, 1-|z|^2) so the
// boundary weight is formed without cancellation.
double bergman_norm_fn(const std::function<Complex(Complex, double)>& f,
                       const BergmanConfig& cfg, double tol = 1e-10);
double bergman_norm(const DiskFunction& f, const BergmanConfig& cfg, double tol = 1e-10);

struct ContractiveReport {
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;
};

// Compares the phase-space average of phi(|f|^p (1-|z|^2)^alpha) against the
// same average for the constant one, both by quadrature. f must have unit
// norm; phi must vanish at zero so both sides converge.
ContractiveReport contractive_check(const DiskFunction& f, const BergmanConfig& cfg,
                                    const ConvexFunctional& phi, double tol = 1e-6);

struct DiskSupReport {
  double sup = 0.0;
  Complex argmax = 0.0;
  bool pass = false;  // sup <= 1 + 1e-8
};

// sup over the disk of |f(z)|^p (1-|z|^2)^alpha, boundary-refined grid plus
// compass polish.
DiskSupReport pointwise_disk_bound(const DiskFunction& f, const BergmanConfig& cfg);

// Exploratory Monte-Carlo version of the contractive comparison on the unit
// ball of C^n for n >= 2, extremal family only. No pass/fail semantics: the
// inequality is not established there.
struct BallExploreReport {
  int ball_dim = 0;
  double lhs = 0.0;
  double lhs_err = 0.0;
  double rhs = 0.0;
  double rhs_err = 0.0;
};

BallExploreReport ball_explore(int ball_dim, double p, double alpha,
                               const ConvexFunctional& phi, const Vector& w, double theta,
                               std::int64_t samples, std::uint64_t seed);

}  // namespace wlab
