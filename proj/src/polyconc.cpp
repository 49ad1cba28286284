#include "wlab/polyconc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace wlab {

namespace {

// basis multi-index (M - |beta|, beta) for a chart exponent beta
MultiIndex lift_exponent(const MultiIndex& beta, const SpaceSignature& sig) {
  const int deg = std::accumulate(beta.begin(), beta.end(), 0);
  MultiIndex alpha(sig.N);
  alpha[0] = sig.M - deg;
  for (int i = 0; i + 1 < sig.N; ++i) alpha[i + 1] = beta[i];
  return alpha;
}

}  // namespace

ChartPolynomial::ChartPolynomial(SpaceSignature sig, std::vector<Term> terms)
    : sig_(sig), terms_(std::move(terms)) {
  for (auto& [beta, coeff] : terms_) {
    if (static_cast<int>(beta.size()) != sig_.N - 1)
      throw std::invalid_argument("chart exponent must have N-1 slots");
    int deg = 0;
    for (int e : beta) {
      if (e < 0) throw std::invalid_argument("chart exponent must be nonnegative");
      deg += e;
    }
    if (deg > sig_.M) throw std::invalid_argument("polynomial degree exceeds M");
  }
  std::sort(terms_.begin(), terms_.end(),
            [](const Term& a, const Term& b) { return a.first < b.first; });
}

Complex ChartPolynomial::eval(const Vector& zprime) const {
  if (zprime.size() != sig_.N - 1)
    throw std::invalid_argument("chart point has wrong dimension");
  Complex acc = 0.0;
  for (const auto& [beta, coeff] : terms_) {
    Complex mono = coeff;
    for (std::size_t i = 0; i < beta.size(); ++i) {
      for (int e = 0; e < beta[i]; ++e) mono *= zprime(i);
    }
    acc += mono;
  }
  return acc;
}

double ChartPolynomial::husimi_value(const ChartPoint& p) const {
  const double f2 = std::norm(eval(p.zprime));
  return f2 * std::exp(-sig_.M * std::log1p(p.zprime.squaredNorm()));
}

ChartPolynomial ChartPolynomial::derivative(int j) const {
  if (j < 0 || j >= sig_.N - 1) throw std::invalid_argument("derivative slot out of range");
  std::vector<Term> out;
  for (const auto& [beta, coeff] : terms_) {
    if (beta[j] == 0) continue;
    MultiIndex b = beta;
    b[j] -= 1;
    out.emplace_back(std::move(b), coeff * static_cast<double>(beta[j]));
  }
  return ChartPolynomial(sig_, std::move(out));
}

double ChartPolynomial::pm_norm_exact() const {
  SymmetricBasis basis(sig_);
  double acc = 0.0;
  for (const auto& [beta, coeff] : terms_) {
    const std::int64_t k = basis.index_of(lift_exponent(beta, sig_));
    const double s = basis.sqrt_multinomial(k);
    acc += std::norm(coeff) / (s * s);
  }
  return acc;
}

ChartPolynomial ChartPolynomial::scaled(Complex lambda) const {
  std::vector<Term> out = terms_;
  for (auto& [beta, coeff] : out) coeff *= lambda;
  return ChartPolynomial(sig_, std::move(out));
}

ChartPolynomial ChartPolynomial::normalized() const {
  const double n2 = pm_norm_exact();
  if (!(n2 > 0.0)) throw std::invalid_argument("cannot normalize the zero polynomial");
  return scaled(1.0 / std::sqrt(n2));
}

ChartPolynomial state_to_polynomial(const StateVector& psi) {
  const auto& sig = psi.sig();
  SymmetricBasis basis(sig);
  std::vector<ChartPolynomial::Term> terms;
  for (std::int64_t k = 0; k < sig.dim; ++k) {
    const Complex c = psi.coeffs()(k);
    if (c == Complex(0.0)) continue;
    const int* a = basis.alpha(k);
    MultiIndex beta(a + 1, a + sig.N);
    terms.emplace_back(std::move(beta), basis.sqrt_multinomial(k) * std::conj(c));
  }
  return ChartPolynomial(sig, std::move(terms));
}

StateVector polynomial_to_state(const ChartPolynomial& F) {
  const auto& sig = F.sig();
  SymmetricBasis basis(sig);
  Vector coeffs = Vector::Zero(sig.dim);
  for (const auto& [beta, coeff] : F.terms()) {
    const std::int64_t k = basis.index_of(lift_exponent(beta, sig));
    coeffs(k) = std::conj(coeff) / basis.sqrt_multinomial(k);
  }
  return StateVector(sig, coeffs);
}

MeanResult pm_norm(const ChartPolynomial& F, std::int64_t n, std::uint64_t seed, int threads) {
  if (n < 10000) throw std::invalid_argument("pm_norm requires n >= 10^4");
  const double dim = static_cast<double>(F.sig().dim);
  std::vector<double> vals(static_cast<std::size_t>(n));
  for_each_chart_point(F.sig(), n, seed, threads, [&](std::int64_t i, const ChartPoint& p) {
    vals[i] = dim * F.husimi_value(p);
  });
  const double nn = static_cast<double>(n);
  const double mean = std::accumulate(vals.begin(), vals.end(), 0.0) / nn;
  double ss = 0.0;
  for (double v : vals) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (nn * (nn - 1.0)))};
}

PointwiseBoundReport pointwise_bound_check(const ChartPolynomial& F,
                                           const std::vector<ChartPoint>& points) {
  PointwiseBoundReport rep;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double u = F.husimi_value(points[i]);
    if (u > rep.max_value) {
      rep.max_value = u;
      rep.worst_index = static_cast<std::int64_t>(i);
    }
  }
  rep.pass = rep.max_value <= 1.0 + 1e-8;
  return rep;
}

QuadratureResult faber_krahn_rhs(double s, const SpaceSignature& sig, double tol) {
  if (s < 0.0 || s > 1.0) throw std::domain_error("faber_krahn_rhs: s must lie in [0, 1]");
  if (s == 0.0) return {0.0, 0.0, 0};
  auto f = [&](double tau) { return u0_star(tau, sig); };
  return integrate(f, 0.0, s, tol);
}

RegionSpec RegionSpec::euclidean_ball(Vector center, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("ball radius must be positive");
  RegionSpec r;
  r.kind_ = Kind::Ball;
  r.center_or_normal_ = std::move(center);
  r.scalar_ = radius;
  std::ostringstream os;
  os << "ball(r=" << radius << ")";
  r.description_ = os.str();
  return r;
}

RegionSpec RegionSpec::superlevel(std::shared_ptr<const HusimiEvaluator> u, double threshold) {
  if (!u) throw std::invalid_argument("superlevel region needs an evaluator");
  RegionSpec r;
  r.kind_ = Kind::Superlevel;
  r.level_fn_ = std::move(u);
  r.scalar_ = threshold;
  std::ostringstream os;
  os << "superlevel(t=" << threshold << ")";
  r.description_ = os.str();
  return r;
}

RegionSpec RegionSpec::halfspace(Vector normal, double offset) {
  RegionSpec r;
  r.kind_ = Kind::Halfspace;
  r.center_or_normal_ = std::move(normal);
  r.scalar_ = offset;
  std::ostringstream os;
  os << "halfspace(c=" << offset << ")";
  r.description_ = os.str();
  return r;
}

bool RegionSpec::contains(const ChartPoint& p) const {
  switch (kind_) {
    case Kind::Ball:
      return (p.zprime - center_or_normal_).norm() < scalar_;
    case Kind::Superlevel:
      return level_fn_->eval(p) > scalar_;
    case Kind::Halfspace:
      return (center_or_normal_.dot(p.zprime)).real() > scalar_;
  }
  return false;
}

ConcentrationReport concentration(const ChartPolynomial& F, const RegionSpec& region,
                                  std::int64_t n, std::uint64_t seed, int threads) {
  if (n < 1000) throw std::invalid_argument("concentration requires n >= 1000");
  std::vector<double> u_in(static_cast<std::size_t>(n), 0.0);
  std::vector<unsigned char> member(static_cast<std::size_t>(n), 0);
  for_each_chart_point(F.sig(), n, seed, threads, [&](std::int64_t i, const ChartPoint& p) {
    if (region.contains(p)) {
      member[i] = 1;
      u_in[i] = F.husimi_value(p);
    }
  });
  const double nn = static_cast<double>(n);
  double mass = 0.0, nu = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    mass += u_in[i];
    nu += member[i];
  }
  mass /= nn;
  nu /= nn;
  if (nu == 0.0) throw std::domain_error("concentration: region has zero empirical measure");

  ConcentrationReport rep;
  rep.mass = mass;
  rep.nu = nu;
  rep.region = region.describe();
  rep.bound = faber_krahn_rhs(nu, F.sig(), 1e-10).value;
  // correlated error of mass - bound through the shared sample: linearize the
  // bound in nu with slope u0_star(nu)
  const double slope = u0_star(nu, F.sig());
  double ss = 0.0;
  const double mean_x = mass - slope * nu;
  for (std::int64_t i = 0; i < n; ++i) {
    const double x = u_in[i] - slope * member[i];
    ss += (x - mean_x) * (x - mean_x);
  }
  rep.mc_error = std::sqrt(ss / (nn * (nn - 1.0)));
  rep.pass = rep.mass <= rep.bound + 3.0 * rep.mc_error + 1e-10;
  return rep;
}

}  // namespace wlab
