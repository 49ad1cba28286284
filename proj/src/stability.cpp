#include "wlab/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace wlab {

namespace {

constexpr double kGradTol = 1e-9;
constexpr double kEigenZero = 1e-12;

Matrix stack_eigenvectors(const DensityOperator& rho) {
  const auto& terms = rho.spectral();
  Matrix psi(rho.sig().dim, terms.size());
  for (std::size_t j = 0; j < terms.size(); ++j) psi.col(j) = terms[j].psi.coeffs();
  return psi;
}

Eigen::VectorXd stack_weights(const DensityOperator& rho) {
  const auto& terms = rho.spectral();
  Eigen::VectorXd p(terms.size());
  for (std::size_t j = 0; j < terms.size(); ++j) p(j) = terms[j].p;
  return p;
}

// one-body reduction r_{ik} = tr(rho a_i^dag a_k) / M; Hermitian, PSD, trace 1
Matrix one_body_reduction(const DensityOperator& rho) {
  const auto& sig = rho.sig();
  SymmetricBasis basis(sig);
  Matrix r = Matrix::Zero(sig.N, sig.N);
  const Matrix& m = rho.matrix();
  MultiIndex shifted(sig.N);
  for (std::int64_t a = 0; a < sig.dim; ++a) {
    const int* alpha = basis.alpha(a);
    for (int k = 0; k < sig.N; ++k) {
      if (alpha[k] == 0) continue;
      for (int i = 0; i < sig.N; ++i) {
        for (int t = 0; t < sig.N; ++t) shifted[t] = alpha[t];
        shifted[k] -= 1;
        shifted[i] += 1;
        const std::int64_t b = basis.index_of(shifted);
        const double amp = std::sqrt(static_cast<double>(alpha[k]) *
                                     static_cast<double>(shifted[i]));
        // accumulate tr(rho a_i^dag a_k) transposed, so that a coherent state
        // at v reduces to the projector onto v itself
        r(k, i) += m(a, b) * amp;
      }
    }
  }
  r /= static_cast<double>(sig.M);
  return 0.5 * (r + r.adjoint().eval());
}

Vector top_eigenvector(const Matrix& h) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  return es.eigenvectors().col(h.rows() - 1);
}

struct AscentResult {
  Vector v;
  double value = 0.0;
  bool converged = false;
};

template <class GradFn>
double tangent_norm(const GradFn& grad_at, const Vector& v, Vector& g) {
  g = grad_at(v);
  const Complex radial = v.dot(g);
  g -= v * radial.real();  // tangent of the real sphere
  return g.norm();
}

// projected gradient ascent on the unit sphere with adaptive step and
// renormalization retraction; once the line search stalls at machine value
// resolution, shifted fixed-point steps v <- (grad + s v)/|..| drive the
// tangent gradient itself below tolerance
template <class ValueFn, class GradFn>
AscentResult sphere_ascend(Vector v, const ValueFn& value_at, const GradFn& grad_at,
                           int max_iter = 4000) {
  v.normalize();
  double f = value_at(v);
  double eta = 0.05;
  AscentResult res;
  Vector g;
  bool stalled = false;
  for (int iter = 0; iter < max_iter; ++iter) {
    const double gnorm = tangent_norm(grad_at, v, g);
    if (gnorm < kGradTol) {
      res.v = v;
      res.value = f;
      res.converged = true;
      return res;
    }
    bool improved = false;
    while (eta > 1e-18) {
      Vector w = v + eta * g;
      w.normalize();
      const double fw = value_at(w);
      if (fw > f) {
        v = w;
        f = fw;
        eta *= 1.6;
        improved = true;
        break;
      }
      eta *= 0.5;
    }
    if (!improved) {
      stalled = true;
      break;
    }
  }
  double gnorm = tangent_norm(grad_at, v, g);
  if (stalled && gnorm >= kGradTol) {
    Vector raw = grad_at(v);
    double shift = std::max(1.0, 2.0 * raw.norm());
    for (int k = 0; k < 2000 && gnorm >= kGradTol && shift < 1e8; ++k) {
      raw = grad_at(v);
      Vector w = raw + shift * v;
      const double wn = w.norm();
      if (wn == 0.0) break;
      w /= wn;
      const double fw = value_at(w);
      if (fw + 1e-14 < f) {
        shift *= 2.0;
        continue;
      }
      v = w;
      f = std::max(f, fw);
      gnorm = tangent_norm(grad_at, v, g);
    }
  }
  res.v = v;
  res.value = f;
  res.converged = gnorm < kGradTol;
  return res;
}

std::vector<Vector> make_starts(const DensityOperator& rho, int n_starts, std::uint64_t seed) {
  std::vector<Vector> starts;
  starts.push_back(top_eigenvector(one_body_reduction(rho)));
  if (rho.rank() > 1) {
    const DensityOperator top = DensityOperator::pure(rho.spectral().front().psi);
    starts.push_back(top_eigenvector(one_body_reduction(top)));
  }
  int k = 0;
  while (static_cast<int>(starts.size()) < n_starts)
    starts.push_back(random_unit_vector(rho.sig().N, derive_seed(seed, 7000 + k++)));
  return starts;
}

}  // namespace

HusimiEvaluator::HusimiEvaluator(const DensityOperator& rho)
    : embed_(rho.sig()), psi_(stack_eigenvectors(rho)), p_(stack_weights(rho)) {}

double HusimiEvaluator::eval_sphere(const Vector& v, HusimiWorkspace& ws) const {
  embed_.coefficients(v, ws.coeff, ws.embed);
  ws.overlap.noalias() = psi_.adjoint() * ws.coeff;
  double u = 0.0;
  for (Eigen::Index j = 0; j < ws.overlap.size(); ++j) u += p_(j) * std::norm(ws.overlap(j));
  return u;
}

double HusimiEvaluator::eval_sphere(const Vector& v) const {
  HusimiWorkspace ws;
  return eval_sphere(v, ws);
}

double HusimiEvaluator::eval(const ChartPoint& p) const { return eval_sphere(p.lift); }

double husimi(const DensityOperator& rho, const ChartPoint& p) {
  return HusimiEvaluator(rho).eval(p);
}

std::vector<double> husimi_samples(const DensityOperator& rho, std::int64_t n,
                                   std::uint64_t seed, int threads) {
  HusimiEvaluator u(rho);
  std::vector<double> out(static_cast<std::size_t>(n));
  if (threads <= 1) {
    HusimiWorkspace ws;
    for_each_chart_point(rho.sig(), n, seed, 1,
                         [&](std::int64_t i, const ChartPoint& p) { out[i] = u.eval(p, ws); });
  } else {
    // one workspace per worker thread
    for_each_chart_point(rho.sig(), n, seed, threads,
                         [&u, &out](std::int64_t i, const ChartPoint& p) {
                           thread_local HusimiWorkspace ws;
                           out[i] = u.eval(p, ws);
                         });
  }
  return out;
}

EmpiricalDistribution empirical_distribution(const HusimiEvaluator& u, std::int64_t n,
                                             std::uint64_t seed, int threads) {
  if (n < 1000) throw std::invalid_argument("empirical_distribution requires n >= 1000");
  std::vector<double> out(static_cast<std::size_t>(n));
  if (threads <= 1) {
    HusimiWorkspace ws;
    for_each_chart_point(u.sig(), n, seed, 1,
                         [&](std::int64_t i, const ChartPoint& p) { out[i] = u.eval(p, ws); });
  } else {
    for_each_chart_point(u.sig(), n, seed, threads,
                         [&u, &out](std::int64_t i, const ChartPoint& p) {
                           thread_local HusimiWorkspace ws;
                           out[i] = u.eval(p, ws);
                         });
  }
  return EmpiricalDistribution::from_values(std::move(out), seed);
}

EmpiricalDistribution empirical_distribution(const DensityOperator& rho, std::int64_t n,
                                             std::uint64_t seed, int threads) {
  return empirical_distribution(HusimiEvaluator(rho), n, seed, threads);
}

MeanResult phi_mean(const ConvexFunctional& phi, const std::vector<double>& u_values) {
  if (u_values.empty()) throw std::invalid_argument("phi_mean needs samples");
  const double n = static_cast<double>(u_values.size());
  double sum = 0.0;
  for (double u : u_values) sum += phi.value(std::clamp(u, 0.0, 1.0));
  const double mean = sum / n;
  double ss = 0.0;
  for (double u : u_values) {
    const double d = phi.value(std::clamp(u, 0.0, 1.0)) - mean;
    ss += d * d;
  }
  MeanResult r;
  r.value = mean;
  r.mc_error = u_values.size() > 1 ? std::sqrt(ss / (n * (n - 1.0))) : 0.0;
  return r;
}

MeanResult entropy_lhs(const DensityOperator& rho, const ConvexFunctional& phi, std::int64_t n,
                       std::uint64_t seed, int threads) {
  if (n < 10000) throw std::invalid_argument("entropy_lhs requires n >= 10^4");
  return phi_mean(phi, husimi_samples(rho, n, seed, threads));
}

MeanResult deficit(const DensityOperator& rho, const ConvexFunctional& phi, std::int64_t n,
                   std::uint64_t seed, int threads) {
  const MeanResult lhs = entropy_lhs(rho, phi, n, seed, threads);
  const QuadratureResult rhs = rhs_closed_form(phi, rho.sig(), 1e-10);
  MeanResult r;
  r.value = rhs.value - lhs.value;
  r.mc_error = lhs.mc_error;
  return r;
}

double husimi_value_at(const DensityOperator& rho, const Vector& v) {
  CoherentEmbedding embed(rho.sig());
  const Vector c = embed.coefficients(v);
  return (c.dot(rho.matrix() * c)).real();
}

Vector husimi_wirtinger_gradient(const DensityOperator& rho, const Vector& v) {
  CoherentEmbedding embed(rho.sig());
  EmbeddingWorkspace ws;
  Vector c, d;
  embed.coefficients(v, c, ws);
  const Vector rc = rho.matrix() * c;
  Vector g(rho.sig().N);
  for (int i = 0; i < rho.sig().N; ++i) {
    embed.derivative(v, i, d, ws);
    g(i) = d.dot(rc);  // conjugates the derivative factor
  }
  return g;
}

SupResult sup_husimi(const DensityOperator& rho, int n_starts, std::uint64_t seed) {
  if (n_starts < 8) throw std::invalid_argument("sup_husimi requires n_starts >= 8");
  const auto& sig = rho.sig();
  CoherentEmbedding embed(sig);
  const Matrix psi = stack_eigenvectors(rho);
  const Eigen::VectorXd p = stack_weights(rho);

  HusimiWorkspace hws;
  auto value_at = [&](const Vector& v) {
    embed.coefficients(v, hws.coeff, hws.embed);
    hws.overlap.noalias() = psi.adjoint() * hws.coeff;
    double u = 0.0;
    for (Eigen::Index j = 0; j < hws.overlap.size(); ++j) u += p(j) * std::norm(hws.overlap(j));
    return u;
  };
  EmbeddingWorkspace gws;
  Vector c, d, rc;
  auto grad_at = [&](const Vector& v) {
    embed.coefficients(v, c, gws);
    rc.noalias() = psi * (p.array() * (psi.adjoint() * c).array()).matrix();
    Vector g(sig.N);
    for (int i = 0; i < sig.N; ++i) {
      embed.derivative(v, i, d, gws);
      g(i) = d.dot(rc);
    }
    return g;
  };

  SupResult best;
  best.T = -1.0;
  best.converged = true;
  const auto starts = make_starts(rho, n_starts, seed);
  best.n_starts = static_cast<int>(starts.size());
  for (const auto& s : starts) {
    AscentResult r = sphere_ascend(s, value_at, grad_at);
    best.converged = best.converged && r.converged;
    if (r.value > best.T) {
      best.T = r.value;
      best.argmax_v = r.v;
    }
  }
  return best;
}

TraceDistanceResult trace_distance_full(const DensityOperator& rho, int n_starts,
                                        std::uint64_t seed) {
  if (n_starts < 8) throw std::invalid_argument("trace_distance requires n_starts >= 8");
  const auto& sig = rho.sig();
  CoherentEmbedding embed(sig);

  EmbeddingWorkspace ws;
  Vector c, d;
  auto trace_norm_at = [&](const Vector& v) {
    embed.coefficients(v, c, ws);
    Matrix h = rho.matrix();
    h.noalias() -= c * c.adjoint();
    Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().sum();
  };
  // maximize the negated objective; subgradient through the eigenvalue signs
  auto value_at = [&](const Vector& v) { return -trace_norm_at(v); };
  auto grad_at = [&](const Vector& v) {
    embed.coefficients(v, c, ws);
    Matrix h = rho.matrix();
    h.noalias() -= c * c.adjoint();
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    Matrix sgn = Matrix::Zero(sig.dim, sig.dim);
    for (Eigen::Index k = 0; k < sig.dim; ++k) {
      const double lam = es.eigenvalues()(k);
      if (std::abs(lam) <= kEigenZero) continue;
      const double sg = lam > 0.0 ? 1.0 : -1.0;
      sgn.noalias() += sg * (es.eigenvectors().col(k) * es.eigenvectors().col(k).adjoint());
    }
    const Vector sc = sgn * c;
    Vector g(sig.N);
    for (int i = 0; i < sig.N; ++i) {
      embed.derivative(v, i, d, ws);
      g(i) = d.dot(sc);  // derivative of -f: the projector term enters with +
    }
    return g;
  };

  TraceDistanceResult best;
  best.value = std::numeric_limits<double>::infinity();
  best.converged = true;
  auto starts = make_starts(rho, n_starts, seed ^ 0x5bf0361c7a1cull);
  for (const auto& s : starts) {
    AscentResult r = sphere_ascend(s, value_at, grad_at);
    best.converged = best.converged && r.converged;
    if (-r.value < best.value) {
      best.value = -r.value;
      best.argmin_v = r.v;
    }
  }
  return best;
}

double trace_distance(const DensityOperator& rho, int n_starts, std::uint64_t seed) {
  return trace_distance_full(rho, n_starts, seed).value;
}

double stability_lower_bound(double T, const ConvexFunctional& phi, const SpaceSignature& sig,
                             double tol) {
  if (!(T > 0.0) || T > 1.0 + 1e-12)
    throw std::domain_error("stability_lower_bound: T must lie in (0, 1]");
  if (T >= 1.0) return 0.0;
  const double slope_at_T = phi.left_derivative(T);
  std::vector<double> knots{T};
  for (double t : phi.kinks())
    if (t > T + 1e-14 && t < 1.0 - 1e-14) knots.push_back(t);
  std::sort(knots.begin(), knots.end());
  knots.push_back(1.0);
  auto f = [&](double t) { return (phi.right_derivative(t) - slope_at_T) * mu0(t, sig); };
  return integrate_split(f, knots, tol).value;
}

StabilityReport verify_stability(const DensityOperator& rho, const ConvexFunctional& phi,
                               std::int64_t n, std::uint64_t seed, const VerifyOptions& opts) {
  StabilityReport rep;
  rep.N = rho.sig().N;
  rep.M = rho.sig().M;
  rep.phi = phi.name();
  rep.seed = seed;
  rep.n_samples = n;

  const std::vector<double> u = husimi_samples(rho, n, derive_seed(seed, 101), opts.threads);
  double umin = 1.0, umax = 0.0;
  for (double x : u) {
    umin = std::min(umin, x);
    umax = std::max(umax, x);
  }
  const MeanResult lhs = phi_mean(phi, u);
  const QuadratureResult rhs = rhs_closed_form(phi, rho.sig(), opts.quad_tol);
  rep.deficit = rhs.value - lhs.value;
  rep.mc_error = lhs.mc_error;

  const SupResult sup = sup_husimi(rho, opts.n_starts, derive_seed(seed, 202));
  rep.T = sup.T;
  const TraceDistanceResult td = trace_distance_full(rho, opts.n_starts, derive_seed(seed, 303));
  rep.D = td.value;
  rep.lower_bound = stability_lower_bound(std::min(sup.T, 1.0), phi, rho.sig(), opts.quad_tol);
  rep.ratio = rep.D > 1e-7 ? rep.deficit / (rep.D * rep.D)
                           : std::numeric_limits<double>::infinity();

  auto flag = [&](const std::string& msg) { rep.failures.push_back(msg); };
  if (umin < -1e-10 || umax > 1.0 + 1e-10) flag("husimi sample outside [0,1] tolerance band");
  if (!(rep.deficit >= -3.0 * rep.mc_error - opts.quad_tol)) {
    std::ostringstream os;
    os << "deficit " << rep.deficit << " below -3*mc_error " << -3.0 * rep.mc_error;
    flag(os.str());
  }
  if (!(rep.deficit >= rep.lower_bound - 3.0 * rep.mc_error - opts.quad_tol)) {
    std::ostringstream os;
    os << "deficit " << rep.deficit << " below tail bound " << rep.lower_bound
       << " minus 3*mc_error";
    flag(os.str());
  }
  if (!(rep.D * rep.D <= 4.0 * (1.0 - rep.T) + 1e-9)) {
    std::ostringstream os;
    os << "D^2 " << rep.D * rep.D << " exceeds 4(1-T) " << 4.0 * (1.0 - rep.T);
    flag(os.str());
  }
  if (!sup.converged) flag("supremum search did not converge on every start");
  rep.pass = rep.failures.empty();
  return rep;
}

ConcentrationFit fit_concentration(const DensityOperator& rho, double t0, std::int64_t n,
                                   std::uint64_t seed, int n_starts, int threads) {
  if (!(t0 > 0.0) || t0 >= 1.0)
    throw std::domain_error("fit_concentration: t0 must lie in (0, 1)");
  const SupResult sup = sup_husimi(rho, n_starts, derive_seed(seed, 404));
  const double T = std::min(sup.T, 1.0);
  if (!(T > t0))
    throw std::domain_error("fit_concentration: supremum T does not exceed t0");
  const EmpiricalDistribution dist =
      empirical_distribution(rho, n, derive_seed(seed, 505), threads);

  ConcentrationFit fit;
  fit.t0 = t0;
  fit.T0 = T;
  const int grid_size = 33;
  const double one_minus_T = std::max(0.0, 1.0 - T);
  const double nn = static_cast<double>(n);
  double c0 = 0.0;
  for (int i = 0; i < grid_size; ++i) {
    const double frac = static_cast<double>(i) / (grid_size - 1);
    const double t = t0 + frac * (T * (1.0 - 1e-9) - t0);
    const double mu_hat = dist.mu(t);
    const double ref = mu0(std::min(t / T, 1.0), rho.sig());
    fit.grid.push_back({t, mu_hat, ref});
    const double sigma = std::sqrt(std::max(mu_hat * (1.0 - mu_hat), 0.0) / nn) + 1.0 / nn;
    const double excess = mu_hat - 3.0 * sigma - ref;
    if (excess <= 0.0) continue;
    if (one_minus_T * ref <= 0.0) {
      c0 = std::numeric_limits<double>::infinity();
      continue;
    }
    c0 = std::max(c0, excess / (one_minus_T * ref));
  }
  fit.C0_hat = c0;
  return fit;
}

}  // namespace wlab
