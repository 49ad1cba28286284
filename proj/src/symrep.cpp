#include "wlab/symrep.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "wlab/rng.hpp"

namespace wlab {

namespace {

constexpr double kNormTol = 1e-12;
constexpr double kGramTol = 1e-10;
constexpr double kReconstructTol = 1e-10;
constexpr std::int64_t kBruteForceGuard = 1000000;

void check_signature_args(int N, int M) {
  if (N < 2) throw std::invalid_argument("ambient dimension N must be >= 2, got " + std::to_string(N));
  if (M < 1) throw std::invalid_argument("tensor power M must be >= 1, got " + std::to_string(M));
}

// colex on equal-weight indices: compare from the last slot down
bool colex_less(const int* a, const int* b, int n) {
  for (int i = n - 1; i >= 0; --i) {
    if (a[i] != b[i]) return a[i] < b[i];
  }
  return false;
}

void enumerate_rec(int slots, int weight, std::vector<int>& scratch, std::vector<int>& out) {
  if (slots == 1) {
    scratch[0] = weight;
    out.insert(out.end(), scratch.begin(), scratch.end());
    return;
  }
  for (int last = 0; last <= weight; ++last) {
    scratch[slots - 1] = last;
    enumerate_rec(slots - 1, weight - last, scratch, out);
  }
}

void require_unit(const Vector& v, const char* what) {
  const double n = v.norm();
  if (std::abs(n - 1.0) > kNormTol)
    throw std::invalid_argument(std::string(what) + " must be normalized within 1e-12 (norm deviation " +
                                std::to_string(std::abs(n - 1.0)) + ")");
}

}  // namespace

std::int64_t dim_symmetric(int N, int M) {
  check_signature_args(N, M);
  const std::int64_t n = static_cast<std::int64_t>(N) + M - 1;
  const std::int64_t k = std::min<std::int64_t>(N - 1, M);
  __int128 r = 1;
  for (std::int64_t i = 1; i <= k; ++i) {
    r = r * (n - k + i);
    r /= i;  // exact: product of i consecutive integers is divisible by i!
    if (r > static_cast<__int128>(std::numeric_limits<std::int64_t>::max()))
      throw std::overflow_error("dim_symmetric overflows 64-bit integer range");
  }
  return static_cast<std::int64_t>(r);
}

SpaceSignature SpaceSignature::create(int N, int M) {
  SpaceSignature s;
  s.N = N;
  s.M = M;
  s.dim = dim_symmetric(N, M);
  return s;
}

std::vector<MultiIndex> enumerate_basis(const SpaceSignature& sig) {
  check_signature_args(sig.N, sig.M);
  std::vector<int> flat;
  flat.reserve(static_cast<std::size_t>(sig.dim) * sig.N);
  std::vector<int> scratch(sig.N, 0);
  enumerate_rec(sig.N, sig.M, scratch, flat);
  std::vector<MultiIndex> out;
  out.reserve(flat.size() / sig.N);
  for (std::size_t k = 0; k * sig.N < flat.size(); ++k)
    out.emplace_back(flat.begin() + k * sig.N, flat.begin() + (k + 1) * sig.N);
  return out;
}

SymmetricBasis::SymmetricBasis(SpaceSignature sig) : sig_(sig) {
  check_signature_args(sig.N, sig.M);
  if (sig.dim != dim_symmetric(sig.N, sig.M))
    throw std::invalid_argument("SpaceSignature carries an inconsistent dim field");
  std::vector<int> scratch(sig.N, 0);
  flat_.reserve(static_cast<std::size_t>(sig.dim) * sig.N);
  enumerate_rec(sig.N, sig.M, scratch, flat_);
  // log-factorial table keeps sqrt(M!/alpha!) representable for large M
  std::vector<double> lfact(sig.M + 1);
  for (int k = 0; k <= sig.M; ++k) lfact[k] = std::lgamma(static_cast<double>(k) + 1.0);
  sqrt_mult_.resize(sig.dim);
  for (std::int64_t k = 0; k < sig.dim; ++k) {
    double logm = lfact[sig.M];
    const int* a = alpha(k);
    for (int i = 0; i < sig.N; ++i) logm -= lfact[a[i]];
    sqrt_mult_[k] = std::exp(0.5 * logm);
  }
}

std::int64_t SymmetricBasis::index_of(const MultiIndex& alpha) const {
  if (static_cast<int>(alpha.size()) != sig_.N)
    throw std::invalid_argument("multi-index has wrong number of slots");
  if (std::accumulate(alpha.begin(), alpha.end(), 0) != sig_.M)
    throw std::invalid_argument("multi-index weight does not match M");
  std::int64_t lo = 0, hi = sig_.dim - 1;
  while (lo < hi) {
    const std::int64_t mid = (lo + hi) / 2;
    if (colex_less(this->alpha(mid), alpha.data(), sig_.N))
      lo = mid + 1;
    else
      hi = mid;
  }
  if (!std::equal(alpha.begin(), alpha.end(), this->alpha(lo)))
    throw std::logic_error("multi-index not found in basis enumeration");
  return lo;
}

std::vector<MultiIndex> SymmetricBasis::indices() const {
  std::vector<MultiIndex> out;
  out.reserve(sig_.dim);
  for (std::int64_t k = 0; k < sig_.dim; ++k)
    out.emplace_back(alpha(k), alpha(k) + sig_.N);
  return out;
}

StateVector::StateVector(SpaceSignature sig, Vector coeffs) : sig_(sig), coeffs_(std::move(coeffs)) {
  if (coeffs_.size() != sig_.dim)
    throw std::invalid_argument("StateVector coefficient length does not match dim");
  require_unit(coeffs_, "StateVector");
}

void CoherentEmbedding::coefficients(const Vector& v, Vector& out, EmbeddingWorkspace& ws) const {
  const auto& s = basis_.sig();
  if (v.size() != s.N) throw std::invalid_argument("direction vector has wrong dimension");
  if (ws.powers.rows() != s.N || ws.powers.cols() != s.M + 1) ws.powers.resize(s.N, s.M + 1);
  for (int i = 0; i < s.N; ++i) {
    ws.powers(i, 0) = 1.0;
    for (int k = 1; k <= s.M; ++k) ws.powers(i, k) = ws.powers(i, k - 1) * v(i);
  }
  out.resize(s.dim);
  for (std::int64_t k = 0; k < s.dim; ++k) {
    const int* a = basis_.alpha(k);
    Complex prod = basis_.sqrt_multinomial(k);
    for (int i = 0; i < s.N; ++i) {
      if (a[i]) prod *= ws.powers(i, a[i]);
    }
    out(k) = prod;
  }
}

Vector CoherentEmbedding::coefficients(const Vector& v) const {
  EmbeddingWorkspace ws;
  Vector out;
  coefficients(v, out, ws);
  return out;
}

void CoherentEmbedding::derivative(const Vector& v, int i, Vector& out, EmbeddingWorkspace& ws) const {
  const auto& s = basis_.sig();
  if (v.size() != s.N) throw std::invalid_argument("direction vector has wrong dimension");
  if (i < 0 || i >= s.N) throw std::invalid_argument("derivative slot out of range");
  if (ws.powers.rows() != s.N || ws.powers.cols() != s.M + 1) ws.powers.resize(s.N, s.M + 1);
  for (int j = 0; j < s.N; ++j) {
    ws.powers(j, 0) = 1.0;
    for (int k = 1; k <= s.M; ++k) ws.powers(j, k) = ws.powers(j, k - 1) * v(j);
  }
  out.resize(s.dim);
  for (std::int64_t k = 0; k < s.dim; ++k) {
    const int* a = basis_.alpha(k);
    if (a[i] == 0) {
      out(k) = 0.0;
      continue;
    }
    Complex prod = basis_.sqrt_multinomial(k) * static_cast<double>(a[i]);
    for (int j = 0; j < s.N; ++j) {
      const int e = (j == i) ? a[j] - 1 : a[j];
      if (e) prod *= ws.powers(j, e);
    }
    out(k) = prod;
  }
}

StateVector coherent_coefficients(const Vector& v, const SpaceSignature& sig) {
  require_unit(v, "coherent direction");
  CoherentEmbedding embed(sig);
  return StateVector(sig, embed.coefficients(v));
}

StateVector brute_force_symmetrize(const Vector& v, const SpaceSignature& sig) {
  require_unit(v, "coherent direction");
  if (v.size() != sig.N) throw std::invalid_argument("direction vector has wrong dimension");
  std::int64_t total = 1;
  for (int m = 0; m < sig.M; ++m) {
    total *= sig.N;
    if (total > kBruteForceGuard)
      throw std::invalid_argument("brute_force_symmetrize: N^M exceeds the 10^6 guard");
  }

  // full tensor power, index digits little-endian in the factor slots
  std::vector<Complex> tensor(total);
  std::vector<int> digits(sig.M, 0);
  for (std::int64_t s = 0; s < total; ++s) {
    Complex prod = 1.0;
    for (int m = 0; m < sig.M; ++m) prod *= v(digits[m]);
    tensor[s] = prod;
    for (int m = 0; m < sig.M; ++m) {
      if (++digits[m] < sig.N) break;
      digits[m] = 0;
    }
  }

  // orbit sums over occupation classes; the symmetrizer replaces every entry
  // by (alpha!/M!) times its orbit sum
  SymmetricBasis basis(sig);
  std::vector<Complex> orbit_sum(sig.dim, Complex(0.0));
  std::vector<std::int64_t> orbit_count(sig.dim, 0);
  std::vector<std::int64_t> class_of(total);
  std::fill(digits.begin(), digits.end(), 0);
  MultiIndex occ(sig.N);
  for (std::int64_t s = 0; s < total; ++s) {
    std::fill(occ.begin(), occ.end(), 0);
    for (int m = 0; m < sig.M; ++m) ++occ[digits[m]];
    const std::int64_t k = basis.index_of(occ);
    class_of[s] = k;
    orbit_sum[k] += tensor[s];
    ++orbit_count[k];
    for (int m = 0; m < sig.M; ++m) {
      if (++digits[m] < sig.N) break;
      digits[m] = 0;
    }
  }

  // factorials kept exact in long double (M <= 19 under the guard)
  std::vector<long double> fact(sig.M + 1);
  fact[0] = 1.0L;
  for (int k = 1; k <= sig.M; ++k) fact[k] = fact[k - 1] * k;
  const long double mfact = fact[sig.M];

  std::vector<long double> afact(sig.dim);
  for (std::int64_t k = 0; k < sig.dim; ++k) {
    long double af = 1.0L;
    const int* a = basis.alpha(k);
    for (int i = 0; i < sig.N; ++i) af *= fact[a[i]];
    afact[k] = af;
  }

  for (std::int64_t s = 0; s < total; ++s) {
    const std::int64_t k = class_of[s];
    tensor[s] = orbit_sum[k] * static_cast<double>(afact[k] / mfact);
  }

  // project onto the orthonormal symmetric basis: e_k has value sqrt(alpha!/M!)
  // on each of the M!/alpha! sequences in its occupation class
  Vector coeffs(sig.dim);
  std::vector<Complex> proj(sig.dim, Complex(0.0));
  for (std::int64_t s = 0; s < total; ++s) proj[class_of[s]] += tensor[s];
  for (std::int64_t k = 0; k < sig.dim; ++k) {
    const double root = static_cast<double>(std::sqrt(afact[k] / mfact));
    coeffs(k) = root * proj[k];
  }
  return StateVector(sig, coeffs);
}

Complex overlap_with_coherent(const Vector& w, const StateVector& psi) {
  if (w.size() != psi.sig().N)
    throw std::invalid_argument("overlap_with_coherent: dimension mismatch");
  require_unit(w, "coherent direction");
  CoherentEmbedding embed(psi.sig());
  const Vector c = embed.coefficients(w);
  return c.dot(psi.coeffs());  // conjugates the first argument
}

DensityOperator DensityOperator::from_spectral(SpaceSignature sig, std::vector<SpectralTerm> terms) {
  DensityOperator rho;
  rho.sig_ = sig;
  std::stable_sort(terms.begin(), terms.end(),
                   [](const SpectralTerm& a, const SpectralTerm& b) { return a.p > b.p; });
  rho.spectral_ = std::move(terms);
  rho.matrix_ = Matrix::Zero(sig.dim, sig.dim);
  for (const auto& t : rho.spectral_)
    rho.matrix_.noalias() += t.p * (t.psi.coeffs() * t.psi.coeffs().adjoint());
  rho.matrix_ = 0.5 * (rho.matrix_ + rho.matrix_.adjoint().eval());
  rho.validate();
  return rho;
}

DensityOperator DensityOperator::from_matrix(SpaceSignature sig, const Matrix& m) {
  if (m.rows() != sig.dim || m.cols() != sig.dim)
    throw std::invalid_argument("density matrix has wrong shape");
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() > kGramTol)
    throw std::invalid_argument("density matrix is not Hermitian within tolerance");
  const Matrix h = 0.5 * (m + m.adjoint().eval());
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
  std::vector<SpectralTerm> terms;
  for (std::int64_t j = sig.dim - 1; j >= 0; --j) {
    const double p = es.eigenvalues()(j);
    if (p < -1e-12) throw std::invalid_argument("density matrix has a negative eigenvalue");
    if (p > 1.0 + 1e-12) throw std::invalid_argument("density matrix has an eigenvalue above one");
    if (p > 5e-13) terms.push_back({p, StateVector(sig, es.eigenvectors().col(j))});
  }
  DensityOperator rho;
  rho.sig_ = sig;
  rho.matrix_ = h;
  std::stable_sort(terms.begin(), terms.end(),
                   [](const SpectralTerm& a, const SpectralTerm& b) { return a.p > b.p; });
  rho.spectral_ = std::move(terms);
  rho.validate();
  return rho;
}

DensityOperator DensityOperator::pure(StateVector psi) {
  SpaceSignature sig = psi.sig();
  std::vector<SpectralTerm> terms;
  terms.push_back({1.0, std::move(psi)});
  return from_spectral(sig, std::move(terms));
}

DensityOperator DensityOperator::coherent(const Vector& v, const SpaceSignature& sig) {
  return pure(coherent_coefficients(v, sig));
}

DensityOperator DensityOperator::maximally_mixed(SpaceSignature sig) {
  std::vector<SpectralTerm> terms;
  const double p = 1.0 / static_cast<double>(sig.dim);
  for (std::int64_t j = 0; j < sig.dim; ++j) {
    Vector e = Vector::Zero(sig.dim);
    e(j) = 1.0;
    terms.push_back({p, StateVector(sig, e)});
  }
  return from_spectral(sig, std::move(terms));
}

void DensityOperator::validate() const {
  if (spectral_.empty()) throw std::invalid_argument("density operator needs at least one term");
  double psum = 0.0;
  for (const auto& t : spectral_) {
    if (!(t.p > 0.0) || t.p > 1.0 + 1e-12)
      throw std::invalid_argument("spectral weight outside (0, 1]");
    if (t.psi.sig() != sig_) throw std::invalid_argument("spectral term signature mismatch");
    psum += t.p;
  }
  if (std::abs(psum - 1.0) > kNormTol)
    throw std::invalid_argument("spectral weights must sum to one within 1e-12");
  for (std::size_t j = 0; j < spectral_.size(); ++j) {
    for (std::size_t k = j; k < spectral_.size(); ++k) {
      const Complex g = spectral_[j].psi.coeffs().dot(spectral_[k].psi.coeffs());
      const double target = (j == k) ? 1.0 : 0.0;
      if (std::abs(g - target) > kGramTol)
        throw std::invalid_argument("spectral vectors are not orthonormal within 1e-10");
    }
  }
  Matrix recon = Matrix::Zero(sig_.dim, sig_.dim);
  for (const auto& t : spectral_)
    recon.noalias() += t.p * (t.psi.coeffs() * t.psi.coeffs().adjoint());
  if ((recon - matrix_).cwiseAbs().maxCoeff() > kReconstructTol)
    throw std::invalid_argument("matrix does not match its spectral form within 1e-10");
  if ((matrix_ - matrix_.adjoint().eval()).cwiseAbs().maxCoeff() > kGramTol)
    throw std::invalid_argument("density matrix is not Hermitian within tolerance");
}

Vector random_unit_vector(int k, std::uint64_t seed) {
  Rng rng(seed);
  Vector v(k);
  double norm2 = 0.0;
  do {
    for (int i = 0; i < k; ++i) v(i) = rng.complex_normal();
    norm2 = v.squaredNorm();
  } while (norm2 == 0.0);
  return v / std::sqrt(norm2);
}

DensityOperator random_density(const SpaceSignature& sig, int rank, std::uint64_t seed,
                               bool uniform_weights) {
  if (rank < 1 || rank > sig.dim)
    throw std::invalid_argument("random_density rank must lie in [1, dim]");
  Rng rng(seed);
  Matrix g(sig.dim, rank);
  for (int c = 0; c < rank; ++c)
    for (std::int64_t r = 0; r < sig.dim; ++r) g(r, c) = rng.complex_normal();
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(sig.dim, rank);
  const Matrix r = qr.matrixQR().topRows(rank).triangularView<Eigen::Upper>();
  for (int c = 0; c < rank; ++c) {
    const Complex d = r(c, c);
    const double a = std::abs(d);
    if (a > 0.0) q.col(c) *= std::conj(d) / a;  // Haar phase fix
  }
  std::vector<double> p(rank, 1.0 / rank);
  if (!uniform_weights) {
    double sum = 0.0;
    for (int j = 0; j < rank; ++j) {
      p[j] = rng.exponential();
      sum += p[j];
    }
    for (int j = 0; j < rank; ++j) p[j] /= sum;
    // guard the p in (0,1] contract against pathological draws
    for (int j = 0; j < rank; ++j) p[j] = std::max(p[j], 1e-15);
    double s2 = std::accumulate(p.begin(), p.end(), 0.0);
    for (int j = 0; j < rank; ++j) p[j] /= s2;
  }
  std::vector<SpectralTerm> terms;
  for (int j = 0; j < rank; ++j) terms.push_back({p[j], StateVector(sig, q.col(j))});
  return DensityOperator::from_spectral(sig, std::move(terms));
}

}  // namespace wlab
