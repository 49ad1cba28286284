#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "wlab/projmeasure.hpp"
#include "wlab/stability.hpp"
#include "wlab/symrep.hpp"

namespace wlab {

// Holomorphic polynomial of degree at most M on the chart C^(N-1), stored as
// sparse (multi-index, coefficient) terms. The map to symmetric states is
// unitary once each coefficient is rescaled by sqrt(M!/alpha!), which gives
// an exact norm alongside the Monte-Carlo one.
class ChartPolynomial {
 public:
  using Term = std::pair<MultiIndex, Complex>;  // exponent vector of length N-1

  ChartPolynomial(SpaceSignature sig, std::vector<Term> terms);

  const SpaceSignature& sig() const { return sig_; }
  const std::vector<Term>& terms() const { return terms_; }

  Complex eval(const Vector& zprime) const;
  // |F(z')|^2 / (1+|z'|^2)^M
  double husimi_value(const ChartPoint& p) const;
  // holomorphic partial derivative in chart slot j
  ChartPolynomial derivative(int j) const;

  // squared norm through the unitary correspondence with symmetric states
  double pm_norm_exact() const;
  ChartPolynomial normalized() const;
  ChartPolynomial scaled(Complex lambda) const;

 private:
  SpaceSignature sig_;
  std::vector<Term> terms_;
};

ChartPolynomial state_to_polynomial(const StateVector& psi);
StateVector polynomial_to_state(const ChartPolynomial& F);

// Monte-Carlo estimate of the squared norm dim * E_nu[|F|^2 (1+|z'|^2)^-M].
MeanResult pm_norm(const ChartPolynomial& F, std::int64_t n, std::uint64_t seed,
                   int threads = 1);

struct PointwiseBoundReport {
  double max_value = 0.0;
  std::int64_t worst_index = -1;
  bool pass = false;  // max <= 1 + 1e-8
};

// Checks |F|^2 (1+|z'|^2)^-M <= 1 at every supplied point (unit-norm F).
PointwiseBoundReport pointwise_bound_check(const ChartPolynomial& F,
                                           const std::vector<ChartPoint>& points);

// integral over [0,s] of (1 - tau^(1/(N-1)))^M, the sharp concentration bound
// for regions of nu-measure s.
QuadratureResult faber_krahn_rhs(double s, const SpaceSignature& sig, double tol = 1e-10);

// Borel region of the chart with a membership test; measures are estimated
// from the same sample stream as the masses they are compared against.
class RegionSpec {
 public:
  static RegionSpec euclidean_ball(Vector center, double radius);
  static RegionSpec superlevel(std::shared_ptr<const HusimiEvaluator> u, double threshold);
  static RegionSpec halfspace(Vector normal, double offset);

  bool contains(const ChartPoint& p) const;
  const std::string& describe() const { return description_; }

 private:
  RegionSpec() = default;
  enum class Kind { Ball, Superlevel, Halfspace } kind_ = Kind::Ball;
  Vector center_or_normal_;
  double scalar_ = 0.0;  // radius, threshold, or offset
  std::shared_ptr<const HusimiEvaluator> level_fn_;
  std::string description_;
};

struct ConcentrationReport {
  double mass = 0.0;      // nu-integral of the Husimi mass over the region
  double bound = 0.0;     // faber_krahn_rhs at the estimated region measure
  double nu = 0.0;        // estimated region measure
  double mc_error = 0.0;  // correlated error of mass - bound
  bool pass = false;
  std::string region;
};

// Mass of |F|^2 (1+|z'|^2)^-M over the region versus the rearranged bound.
// The region measure shares the Monte-Carlo stream of the mass estimate, so
// the pass comparison cancels most of the sampling noise.
ConcentrationReport concentration(const ChartPolynomial& F, const RegionSpec& region,
                                  std::int64_t n, std::uint64_t seed, int threads = 1);

}  // namespace wlab
