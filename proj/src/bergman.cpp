#include "wlab/bergman.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "wlab/quadrature.hpp"
#include "wlab/rng.hpp"

namespace wlab {

namespace {

constexpr double kPi = std::numbers::pi;

// mean over the circle of radius r of g(z, one_minus_r2)
double angular_mean(const std::function<double(Complex, double)>& g, double r, double om,
                    int K) {
  double acc = 0.0;
  for (int k = 0; k < K; ++k) {
    const double th = 2.0 * kPi * k / K;
    acc += g(Complex(r * std::cos(th), r * std::sin(th)), om);
  }
  return acc / K;
}

int choose_angular_nodes(const std::function<double(Complex, double)>& g) {
  const double probes_s[4] = {0.2, 1.0, 2.5, 6.0};
  int K = 32;
  while (K < 8192) {
    double worst = 0.0;
    for (double s : probes_s) {
      const double om = std::exp(-s);
      const double r = std::sqrt(1.0 - om);
      const double a = angular_mean(g, r, om, K);
      const double b = angular_mean(g, r, om, 2 * K);
      worst = std::max(worst, std::abs(a - b) / (1.0 + std::abs(b)));
    }
    if (worst < 1e-13) return 2 * K;
    K *= 2;
  }
  return K;
}

// integral over the unit disk of g(z, 1-|z|^2) dA, with the radial
// substitution 1-|z|^2 = e^{-s}. decay bounds the exponential rate of the
// transformed radial profile and sets the truncation point.
double disk_integral(const std::function<double(Complex, double)>& g, double decay,
                     double tol) {
  if (!(decay > 0.0)) throw std::invalid_argument("disk integral needs a positive decay rate");
  const double smax = 45.0 / decay + 5.0;
  const int K = choose_angular_nodes(g);
  auto h = [&](double s) {
    const double om = std::exp(-s);
    const double r = std::sqrt(std::max(0.0, 1.0 - om));
    return angular_mean(g, r, om, K) * om;
  };
  return kPi * integrate(h, 0.0, smax, tol / kPi, 40000).value;
}

}  // namespace

BergmanConfig::BergmanConfig(double p_, double alpha_) : p(p_), alpha(alpha_) {
  if (!(p > 0.0)) throw std::invalid_argument("Bergman exponent p must be positive");
  if (!(alpha > 1.0)) throw std::invalid_argument("Bergman weight alpha must exceed 1");
  normalizer = (alpha - 1.0) / kPi;
}

DiskFunction DiskFunction::polynomial(std::vector<Complex> coeffs) {
  if (coeffs.empty()) throw std::invalid_argument("polynomial needs coefficients");
  DiskFunction f;
  f.coeffs_ = std::move(coeffs);
  return f;
}

DiskFunction DiskFunction::extremal(Complex w, double theta) {
  if (!(std::abs(w) < 1.0)) throw std::invalid_argument("extremal parameter must lie in the open disk");
  DiskFunction f;
  f.extremal_ = true;
  f.w_ = w;
  f.theta_ = theta;
  return f;
}

Complex DiskFunction::eval(Complex z, const BergmanConfig& cfg) const {
  if (!extremal_) {
    Complex acc = 0.0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * z + *it;
    return acc;
  }
  const double e = 2.0 * cfg.alpha / cfg.p;
  // principal branch; 1 - conj(w) z has positive real part on the disk
  const Complex denom = std::pow(1.0 - std::conj(w_) * z, e);
  const double num = std::pow(1.0 - std::norm(w_), 0.5 * e);
  return std::polar(1.0, theta_) * num / denom;
}

DiskFunction DiskFunction::scaled(double s) const {
  if (extremal_) throw std::invalid_argument("cannot scale an extremal family member");
  DiskFunction f = *this;
  for (auto& c : f.coeffs_) c *= s;
  return f;
}

double mobius_identity_residual(Complex w, Complex z) {
  if (!(std::abs(w) < 1.0 && std::abs(z) < 1.0))
    throw std::invalid_argument("both points must lie in the open disk");
  const MobiusMap phi{w};
  const double left = 1.0 - std::norm(phi.apply(z));
  const double right = (1.0 - std::norm(w)) * (1.0 - std::norm(z)) / std::norm(1.0 - std::conj(w) * z);
  return std::abs(left - right);
}

double bergman_norm_fn(const std::function<Complex(Complex, double)>& f,
                       const BergmanConfig& cfg, double tol) {
  auto g = [&](Complex z, double om) {
    return std::pow(std::abs(f(z, om)), cfg.p) * std::pow(om, cfg.alpha - 2.0);
  };
  const double integral = disk_integral(g, cfg.alpha - 1.0, tol);
  return std::pow(cfg.normalizer * integral, 1.0 / cfg.p);
}

double bergman_norm(const DiskFunction& f, const BergmanConfig& cfg, double tol) {
  return bergman_norm_fn([&](Complex z, double) { return f.eval(z, cfg); }, cfg, tol);
}

ContractiveReport contractive_check(const DiskFunction& f, const BergmanConfig& cfg,
                                    const ConvexFunctional& phi, double tol) {
  if (!phi.vanishes_at_zero())
    throw std::domain_error("contractive_check: phi(0) != 0 makes the right side divergent");
  const double qtol = std::min(1e-9, tol / 20.0);

  auto lhs_g = [&](Complex z, double om) {
    const double x = std::pow(std::abs(f.eval(z, cfg)), cfg.p) * std::pow(om, cfg.alpha);
    return phi.value(std::clamp(x, 0.0, 1.0)) / (om * om);
  };
  const double lhs = disk_integral(lhs_g, cfg.alpha - 1.0, qtol);

  // right side is radial: with 1-t = e^{-s} the weight (1-t)^{-2} dt becomes
  // e^{s} ds, so rhs = pi * integral of phi(e^{-alpha s}) e^{s} ds
  const double smax = 45.0 / (cfg.alpha - 1.0) + 5.0;
  std::vector<double> knots{0.0};
  for (double t : phi.kinks()) {
    if (t <= 0.0 || t >= 1.0) continue;
    const double s = -std::log(t) / cfg.alpha;
    if (s > 1e-12 && s < smax - 1e-12) knots.push_back(s);
  }
  std::sort(knots.begin(), knots.end());
  knots.push_back(smax);
  auto rhs_f = [&](double s) { return phi.value(std::exp(-cfg.alpha * s)) * std::exp(s); };
  const double rhs = kPi * integrate_split(rhs_f, knots, qtol / kPi, 40000).value;

  ContractiveReport rep;
  rep.lhs = lhs;
  rep.rhs = rhs;
  rep.pass = lhs <= rhs + tol;
  return rep;
}

DiskSupReport pointwise_disk_bound(const DiskFunction& f, const BergmanConfig& cfg) {
  auto h = [&](Complex z) {
    const double om = 1.0 - std::norm(z);
    if (om <= 0.0) return 0.0;
    return std::pow(std::abs(f.eval(z, cfg)), cfg.p) * std::pow(om, cfg.alpha);
  };
  DiskSupReport rep;
  // boundary-refined radial grid
  const int nr = 160, nt = 256;
  for (int i = 0; i < nr; ++i) {
    const double s = 30.0 * i / (nr - 1);
    const double r = std::sqrt(1.0 - std::exp(-s));
    for (int k = 0; k < nt; ++k) {
      const double th = 2.0 * kPi * k / nt;
      const Complex z(r * std::cos(th), r * std::sin(th));
      const double v = h(z);
      if (v > rep.sup) {
        rep.sup = v;
        rep.argmax = z;
      }
    }
  }
  // compass polish
  double step = 0.02;
  Complex z = rep.argmax;
  int iters = 0;
  while (step > 1e-9 && iters++ < 2000) {
    bool moved = false;
    const Complex dirs[4] = {Complex(step, 0), Complex(-step, 0), Complex(0, step),
                             Complex(0, -step)};
    for (const Complex& d : dirs) {
      const Complex zn = z + d;
      if (std::norm(zn) >= 1.0) continue;
      const double v = h(zn);
      if (v > rep.sup) {
        rep.sup = v;
        z = zn;
        moved = true;
      }
    }
    if (!moved) step *= 0.5;
  }
  rep.argmax = z;
  rep.pass = rep.sup <= 1.0 + 1e-8;
  return rep;
}

BallExploreReport ball_explore(int ball_dim, double p, double alpha,
                               const ConvexFunctional& phi, const Vector& w, double theta,
                               std::int64_t samples, std::uint64_t seed) {
  if (ball_dim < 1) throw std::invalid_argument("ball dimension must be >= 1");
  if (!(alpha > ball_dim)) throw std::invalid_argument("ball weight requires alpha > n");
  if (w.size() != ball_dim || !(w.norm() < 1.0))
    throw std::invalid_argument("extremal parameter must lie in the open ball");
  if (!phi.vanishes_at_zero())
    throw std::domain_error("ball_explore: phi(0) != 0 makes the comparison divergent");

  const double e = 2.0 * alpha / p;
  const double num = std::pow(1.0 - w.squaredNorm(), 0.5 * e);
  auto f_at = [&](const Vector& z) {
    const Complex inner = w.dot(z);  // conjugate-linear in w
    return std::polar(1.0, theta) * num / std::pow(1.0 - inner, e);
  };

  // uniform sampling on the ball: direction uniform on the sphere, |z|^2
  // distributed as U^(1/n); importance weight = ball volume
  const int n = ball_dim;
  double ball_volume = 1.0;
  for (int k = 1; k <= n; ++k) ball_volume *= kPi / k;

  Rng rng(seed);
  Vector z(n);
  double lhs_sum = 0.0, lhs_sq = 0.0, rhs_sum = 0.0, rhs_sq = 0.0;
  for (std::int64_t i = 0; i < samples; ++i) {
    double norm2 = 0.0;
    do {
      for (int k = 0; k < n; ++k) z(k) = rng.complex_normal();
      norm2 = z.squaredNorm();
    } while (norm2 == 0.0);
    const double t = std::pow(rng.uniform01(), 1.0 / n);
    z *= std::sqrt(t / norm2);
    const double om = 1.0 - t;
    const double hyper = std::pow(om, -(n + 1.0)) * ball_volume;

    const double xf = std::pow(std::abs(f_at(z)), p) * std::pow(om, alpha);
    const double lv = phi.value(std::clamp(xf, 0.0, 1.0)) * hyper;
    const double rv = phi.value(std::clamp(std::pow(om, alpha), 0.0, 1.0)) * hyper;
    lhs_sum += lv;
    lhs_sq += lv * lv;
    rhs_sum += rv;
    rhs_sq += rv * rv;
  }
  const double nn = static_cast<double>(samples);
  BallExploreReport rep;
  rep.ball_dim = n;
  rep.lhs = lhs_sum / nn;
  rep.rhs = rhs_sum / nn;
  rep.lhs_err = std::sqrt(std::max(0.0, lhs_sq / nn - rep.lhs * rep.lhs) / nn);
  rep.rhs_err = std::sqrt(std::max(0.0, rhs_sq / nn - rep.rhs * rep.rhs) / nn);
  return rep;
}

}  // namespace wlab
