#pragma once

#include <atomic>
#include <cstdint>
#include <iosfwd>
#include <thread>
#include <vector>

#include "wlab/convex.hpp"
#include "wlab/quadrature.hpp"
#include "wlab/rng.hpp"
#include "wlab/symrep.hpp"

namespace wlab {

// Point of the affine chart z' = (z_2/z_1, ..., z_N/z_1), together with its
// canonical unit lift (1, z')/|(1, z')|.
struct ChartPoint {
  Vector zprime;  // C^(N-1)
  Vector lift;    // unit vector in C^N, first component real positive

  static ChartPoint from_zprime(const Vector& zp);
  static ChartPoint from_sphere(const Vector& z);  // unit z with z_1 != 0
};

// The probability measure c_N (1+|z'|^2)^(-N) dA on the chart.
struct ChartMeasure {
  SpaceSignature sig;
  double c_N;
  explicit ChartMeasure(SpaceSignature s);
};

constexpr std::int64_t kSampleChunk = 8192;

namespace detail {

// Fills the chart point with sample index i of the stream. Points are a pure
// function of (seed, index): chunk c uses its own derived generator, so the
// stream does not depend on how work is divided among threads.
class ChartSampler {
 public:
  ChartSampler(int N, std::uint64_t seed) : N_(N), seed_(seed), rng_(0), chunk_(-1) {}

  void point_at(std::int64_t index, ChartPoint& out) {
    const std::int64_t chunk = index / kSampleChunk;
    if (chunk != chunk_ || index != next_) {
      chunk_ = chunk;
      rng_ = Rng(derive_seed(seed_, static_cast<std::uint64_t>(chunk)));
      next_ = chunk * kSampleChunk;
      skip_to(index);
    }
    draw(out);
    ++next_;
  }

 private:
  void skip_to(std::int64_t index) {
    ChartPoint dump;
    while (next_ < index) {
      draw(dump);
      ++next_;
    }
  }
  void draw(ChartPoint& out) {
    if (out.zprime.size() != N_ - 1) out.zprime.resize(N_ - 1);
    if (out.lift.size() != N_) out.lift.resize(N_);
    Vector& z = out.lift;
    while (true) {
      double norm2 = 0.0;
      for (int i = 0; i < N_; ++i) {
        z(i) = rng_.complex_normal();
        norm2 += std::norm(z(i));
      }
      if (norm2 == 0.0 || z(0) == Complex(0.0)) continue;  // resample, probability zero
      const double inv = 1.0 / std::sqrt(norm2);
      for (int i = 0; i < N_; ++i) z(i) *= inv;
      break;
    }
    const Complex z1 = z(0);
    for (int i = 0; i + 1 < N_; ++i) out.zprime(i) = z(i + 1) / z1;
    // canonical lift: (1, z') normalized, first component real positive
    double lift_norm2 = 1.0 + out.zprime.squaredNorm();
    const double inv = 1.0 / std::sqrt(lift_norm2);
    out.lift(0) = inv;
    for (int i = 0; i + 1 < N_; ++i) out.lift(i + 1) = out.zprime(i) * inv;
  }

  int N_;
  std::uint64_t seed_;
  Rng rng_;
  std::int64_t chunk_;
  std::int64_t next_ = 0;
};

}  // namespace detail

// Applies fn(index, point) to n i.i.d. chart points with law nu. The point
// reference is only valid during the call. Results are identical for every
// thread count; fn must tolerate concurrent calls on distinct indices.
template <class Fn>
void for_each_chart_point(const SpaceSignature& sig, std::int64_t n, std::uint64_t seed,
                          int threads, Fn&& fn) {
  if (n < 0) throw std::invalid_argument("sample count must be nonnegative");
  const std::int64_t n_chunks = (n + kSampleChunk - 1) / kSampleChunk;
  if (threads <= 1 || n_chunks <= 1) {
    detail::ChartSampler sampler(sig.N, seed);
    ChartPoint p;
    for (std::int64_t i = 0; i < n; ++i) {
      sampler.point_at(i, p);
      fn(i, p);
    }
    return;
  }
  std::atomic<std::int64_t> next_chunk{0};
  auto worker = [&]() {
    detail::ChartSampler sampler(sig.N, seed);
    ChartPoint p;
    while (true) {
      const std::int64_t c = next_chunk.fetch_add(1);
      if (c >= n_chunks) break;
      const std::int64_t begin = c * kSampleChunk;
      const std::int64_t end = std::min(n, begin + kSampleChunk);
      for (std::int64_t i = begin; i < end; ++i) {
        sampler.point_at(i, p);
        fn(i, p);
      }
    }
  };
  std::vector<std::thread> pool;
  const int nw = std::min<int>(threads, static_cast<int>(n_chunks));
  pool.reserve(nw);
  for (int t = 0; t < nw; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
}

// Materialized sample list; prefer for_each_chart_point in hot loops.
std::vector<ChartPoint> sample_chart(const ChartMeasure& measure, std::int64_t n,
                                     std::uint64_t seed);

// Distribution function of the coherent Husimi function: (1 - t^(1/M))^(N-1).
double mu0(double t, const SpaceSignature& sig);

// Decreasing rearrangement of the coherent Husimi function: (1 - s^(1/(N-1)))^M.
double u0_star(double s, const SpaceSignature& sig);

// integral over [0,1] of phi(u0_star(s)) ds by adaptive quadrature, with the
// partition pinned at the images of phi's kinks.
QuadratureResult rhs_closed_form(const ConvexFunctional& phi, const SpaceSignature& sig,
                                 double tol = 1e-10);

// Sorted Monte-Carlo sample of a [0,1]-valued observable under nu, exposing
// the empirical distribution function, the decreasing rearrangement, and
// partial-mass integrals.
class EmpiricalDistribution {
 public:
  static EmpiricalDistribution from_values(std::vector<double> values, std::uint64_t seed);

  std::int64_t size() const { return static_cast<std::int64_t>(values_.size()); }
  std::uint64_t seed() const { return seed_; }
  const std::vector<double>& values() const { return values_; }  // sorted descending

  double mu(double t) const;      // fraction of values strictly above t
  double u_star(double s) const;  // value at rank ceil(s*n)

  // integral over [0,s] of the empirical rearrangement
  double majorization_integral(double s) const;
  // standard error of that integral (tail-statistic asymptotics)
  double majorization_error(double s) const;

  void write_csv(std::ostream& os) const;  // columns rank,s,u_star

 private:
  EmpiricalDistribution() = default;
  std::vector<double> values_;
  std::vector<double> prefix_, prefix_sq_;
  std::uint64_t seed_ = 0;
};

}  // namespace wlab
