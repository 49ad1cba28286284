#include "wlab/projmeasure.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace wlab {

ChartPoint ChartPoint::from_zprime(const Vector& zp) {
  ChartPoint p;
  p.zprime = zp;
  const int N = static_cast<int>(zp.size()) + 1;
  p.lift.resize(N);
  const double inv = 1.0 / std::sqrt(1.0 + zp.squaredNorm());
  p.lift(0) = inv;
  for (int i = 0; i + 1 < N; ++i) p.lift(i + 1) = zp(i) * inv;
  return p;
}

ChartPoint ChartPoint::from_sphere(const Vector& z) {
  if (z(0) == Complex(0.0))
    throw std::invalid_argument("chart point requires a nonzero first homogeneous coordinate");
  const int N = static_cast<int>(z.size());
  Vector zp(N - 1);
  for (int i = 0; i + 1 < N; ++i) zp(i) = z(i + 1) / z(0);
  return from_zprime(zp);
}

ChartMeasure::ChartMeasure(SpaceSignature s) : sig(s) {
  double f = 1.0;
  for (int k = 2; k <= s.N - 1; ++k) f *= k;
  c_N = f / std::pow(std::numbers::pi, s.N - 1);
}

std::vector<ChartPoint> sample_chart(const ChartMeasure& measure, std::int64_t n,
                                     std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_chart requires n >= 1");
  std::vector<ChartPoint> out(static_cast<std::size_t>(n));
  for_each_chart_point(measure.sig, n, seed, 1,
                       [&](std::int64_t i, const ChartPoint& p) { out[i] = p; });
  return out;
}

double mu0(double t, const SpaceSignature& sig) {
  if (t < 0.0 || t > 1.0) throw std::domain_error("mu0: t must lie in [0, 1]");
  if (t == 0.0) return 1.0;
  if (t == 1.0) return 0.0;
  return std::pow(1.0 - std::pow(t, 1.0 / sig.M), sig.N - 1);
}

double u0_star(double s, const SpaceSignature& sig) {
  if (s < 0.0 || s > 1.0) throw std::domain_error("u0_star: s must lie in [0, 1]");
  if (s == 0.0) return 1.0;
  if (s == 1.0) return 0.0;
  return std::pow(1.0 - std::pow(s, 1.0 / (sig.N - 1)), sig.M);
}

QuadratureResult rhs_closed_form(const ConvexFunctional& phi, const SpaceSignature& sig,
                                 double tol) {
  std::vector<double> knots{0.0};
  // kinks of phi sit at s = mu0(t_kink)
  std::vector<double> interior;
  for (double t : phi.kinks()) {
    const double s = mu0(t, sig);
    if (s > 1e-14 && s < 1.0 - 1e-14) interior.push_back(s);
  }
  std::sort(interior.begin(), interior.end());
  for (double s : interior) knots.push_back(s);
  knots.push_back(1.0);
  auto f = [&](double s) { return phi.value(u0_star(s, sig)); };
  return integrate_split(f, knots, tol);
}

EmpiricalDistribution EmpiricalDistribution::from_values(std::vector<double> values,
                                                         std::uint64_t seed) {
  if (values.empty()) throw std::invalid_argument("empirical distribution needs samples");
  for (double v : values) {
    if (!(v >= -1e-10) || !(v <= 1.0 + 1e-10))
      throw std::invalid_argument("observable value outside [0, 1] tolerance band");
  }
  EmpiricalDistribution d;
  d.values_ = std::move(values);
  d.seed_ = seed;
  std::sort(d.values_.begin(), d.values_.end(), std::greater<double>());
  d.prefix_.resize(d.values_.size() + 1, 0.0);
  d.prefix_sq_.resize(d.values_.size() + 1, 0.0);
  for (std::size_t i = 0; i < d.values_.size(); ++i) {
    d.prefix_[i + 1] = d.prefix_[i] + d.values_[i];
    d.prefix_sq_[i + 1] = d.prefix_sq_[i] + d.values_[i] * d.values_[i];
  }
  return d;
}

double EmpiricalDistribution::mu(double t) const {
  // values sorted descending: count of entries strictly greater than t
  auto it = std::lower_bound(values_.begin(), values_.end(), t,
                             [](double a, double b) { return a > b; });
  return static_cast<double>(it - values_.begin()) / static_cast<double>(values_.size());
}

double EmpiricalDistribution::u_star(double s) const {
  if (s < 0.0 || s > 1.0) throw std::domain_error("u_star: s must lie in [0, 1]");
  const std::int64_t n = size();
  std::int64_t rank = static_cast<std::int64_t>(std::ceil(s * static_cast<double>(n)));
  rank = std::max<std::int64_t>(1, std::min(n, rank));
  return values_[rank - 1];
}

double EmpiricalDistribution::majorization_integral(double s) const {
  if (s < 0.0 || s > 1.0) throw std::domain_error("majorization_integral: s must lie in [0, 1]");
  const double n = static_cast<double>(size());
  const double sn = s * n;
  const std::int64_t k = std::min<std::int64_t>(size(), static_cast<std::int64_t>(std::floor(sn)));
  double acc = prefix_[k];
  if (k < size()) acc += (sn - static_cast<double>(k)) * values_[k];
  return acc / n;
}

double EmpiricalDistribution::majorization_error(double s) const {
  // the partial integral equals s*t + mean((u - t)_+) at the empirical
  // quantile t = u_star(s); the plug-in variance of the second term gives the
  // first-order standard error
  if (s <= 0.0) return 0.0;
  const std::int64_t n = size();
  const double t = u_star(s);
  const std::int64_t k = std::min<std::int64_t>(
      n, static_cast<std::int64_t>(std::ceil(s * static_cast<double>(n))));
  const double nn = static_cast<double>(n);
  const double mean = (prefix_[k] - t * static_cast<double>(k)) / nn;
  const double meansq =
      (prefix_sq_[k] - 2.0 * t * prefix_[k] + t * t * static_cast<double>(k)) / nn;
  const double var = std::max(0.0, meansq - mean * mean);
  return std::sqrt(var / nn);
}

void EmpiricalDistribution::write_csv(std::ostream& os) const {
  os << "rank,s,u_star\n";
  char buf[96];
  const double n = static_cast<double>(size());
  for (std::int64_t i = 0; i < size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%lld,%.17g,%.17g\n", static_cast<long long>(i + 1),
                  static_cast<double>(i + 1) / n, values_[i]);
    os << buf;
  }
}

}  // namespace wlab
