#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <vector>

namespace wlab {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;

// dim of the totally symmetric M-fold tensor power of C^N, binomial(N+M-1, N-1).
// Overflow-checked; throws std::overflow_error when the result does not fit.
std::int64_t dim_symmetric(int N, int M);

struct SpaceSignature {
  int N = 0;          // ambient dimension, >= 2
  int M = 0;          // tensor power, >= 1
  std::int64_t dim = 0;
  static SpaceSignature create(int N, int M);
  friend bool operator==(const SpaceSignature&, const SpaceSignature&) = default;
};

using MultiIndex = std::vector<int>;

// All weight-M multi-indices in N slots, graded colexicographic order.
std::vector<MultiIndex> enumerate_basis(const SpaceSignature& sig);

// Orthonormal basis of the symmetric subspace indexed by weight-M multi-indices
// in graded colexicographic order, together with the sqrt(M!/alpha!) monomial
// prefactors used by the coherent embedding.
class SymmetricBasis {
 public:
  explicit SymmetricBasis(SpaceSignature sig);

  const SpaceSignature& sig() const { return sig_; }
  std::int64_t size() const { return sig_.dim; }
  // exponent vector of basis element k (length N)
  const int* alpha(std::int64_t k) const { return flat_.data() + k * sig_.N; }
  double sqrt_multinomial(std::int64_t k) const { return sqrt_mult_[k]; }
  std::int64_t index_of(const MultiIndex& alpha) const;  // throws when |alpha| != M
  std::vector<MultiIndex> indices() const;

 private:
  SpaceSignature sig_;
  std::vector<int> flat_;        // dim x N, row-major
  std::vector<double> sqrt_mult_;
};

class StateVector {
 public:
  // coeffs must have length sig.dim and unit norm within 1e-12; anything else
  // is rejected rather than renormalized.
  StateVector(SpaceSignature sig, Vector coeffs);

  const SpaceSignature& sig() const { return sig_; }
  const Vector& coeffs() const { return coeffs_; }

 private:
  SpaceSignature sig_;
  Vector coeffs_;
};

struct SpectralTerm {
  double p;
  StateVector psi;
};

// Hermitian, PSD, trace-one operator kept in both matrix and spectral form.
// All invariants are validated at construction.
class DensityOperator {
 public:
  static DensityOperator from_spectral(SpaceSignature sig, std::vector<SpectralTerm> terms);
  static DensityOperator from_matrix(SpaceSignature sig, const Matrix& m);
  static DensityOperator pure(StateVector psi);
  static DensityOperator coherent(const Vector& v, const SpaceSignature& sig);
  static DensityOperator maximally_mixed(SpaceSignature sig);

  const SpaceSignature& sig() const { return sig_; }
  const Matrix& matrix() const { return matrix_; }
  const std::vector<SpectralTerm>& spectral() const { return spectral_; }
  int rank() const { return static_cast<int>(spectral_.size()); }

 private:
  DensityOperator() = default;
  void validate() const;
  SpaceSignature sig_;
  Matrix matrix_;
  std::vector<SpectralTerm> spectral_;
};

struct EmbeddingWorkspace {
  Matrix powers;  // N x (M+1) power table of the current direction
};

// The coherent embedding v -> coordinates of the M-fold symmetric power of v,
// with holomorphic directional derivatives. Coefficient k is
// sqrt_multinomial(k) * prod_i v_i^{alpha_i}.
class CoherentEmbedding {
 public:
  explicit CoherentEmbedding(SpaceSignature sig) : basis_(sig) {}
  const SymmetricBasis& basis() const { return basis_; }
  const SpaceSignature& sig() const { return basis_.sig(); }

  void coefficients(const Vector& v, Vector& out, EmbeddingWorkspace& ws) const;
  Vector coefficients(const Vector& v) const;
  // d(coefficients)/d(v_i), holomorphic derivative
  void derivative(const Vector& v, int i, Vector& out, EmbeddingWorkspace& ws) const;

 private:
  SymmetricBasis basis_;
};

// Coordinates of the symmetric power of a unit vector v in the orthonormal
// basis. v must be normalized within 1e-12.
StateVector coherent_coefficients(const Vector& v, const SpaceSignature& sig);

// Independent oracle: builds the full N^M tensor power, symmetrizes it by
// orbit averaging, and projects onto the orthonormal symmetric basis built
// from explicit occupation sets. Guarded to N^M <= 10^6.
StateVector brute_force_symmetrize(const Vector& v, const SpaceSignature& sig);

// <symmetric power of w | psi>, conjugate-linear in w, linear in psi.
Complex overlap_with_coherent(const Vector& w, const StateVector& psi);

// Random density operator: Haar-orthonormal eigenvectors (QR of a seeded
// complex Gaussian matrix with phase-fixed R diagonal) and Dirichlet-uniform
// weights; uniform_weights forces p_j = 1/rank. Deterministic given seed.
DensityOperator random_density(const SpaceSignature& sig, int rank, std::uint64_t seed,
                               bool uniform_weights = false);

// Haar-random unit vector in C^k.
Vector random_unit_vector(int k, std::uint64_t seed);

}  // namespace wlab
