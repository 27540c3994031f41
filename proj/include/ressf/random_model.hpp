#pragma once

// Seeded random framed models for oracle agreement runs. The engine is mt19937_64 and
// every variate is derived from its raw output by hand, so a seed gives the same model
// on every standard library.

#include "ressf/model.hpp"

#include <cstdint>
#include <random>

namespace ressf {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [lo, hi].
  int integer(int lo, int hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(gen_() % span);
  }

  /// Standard normal by Box-Muller (one variate per call).
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * pi * u2);
  }

  cplx complex_normal() { return {normal() * std::sqrt(0.5), normal() * std::sqrt(0.5)}; }

  bool coin() { return (gen_() >> 63) != 0; }

 private:
  std::mt19937_64 gen_;
};

struct RandomModelSpec {
  int dim_min = 4;
  int dim_max = 12;
  int rank_min = 1;
  int rank_max = 3;
};

/// A random model with a working lambda (midway between two eigenvalues of H0) and an
/// interval [a, b] of couplings whose endpoints are regular at lambda.
struct RandomCase {
  FramedModel model;
  double lambda = 0.0;
  double a = 0.0;
  double b = 0.0;
  int rank = 0;
};

inline CMatrix random_hermitian(Rng& rng, Eigen::Index n) {
  CMatrix g(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) g(i, j) = rng.complex_normal();
  return symmetrized(g);
}

/// Haar-like unitary from the QR factor of a complex Gaussian matrix.
inline CMatrix random_unitary(Rng& rng, Eigen::Index n) {
  CMatrix g(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) g(i, j) = rng.complex_normal();
  Eigen::HouseholderQR<CMatrix> qr(g);
  CMatrix q = qr.householderQ();
  const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index k = 0; k < n; ++k) {
    const cplx d = r(k, k);
    if (std::abs(d) > 0.0) q.col(k) *= d / std::abs(d);
  }
  return q;
}

/// k x k direction with eigenvalues of random sign and magnitude in [0.5, 1.5].
inline HermitianMatrix random_direction(Rng& rng, Eigen::Index k) {
  const CMatrix q = random_unitary(rng, k);
  CVector d(k);
  for (Eigen::Index i = 0; i < k; ++i) d(i) = (rng.coin() ? 1.0 : -1.0) * rng.uniform(0.5, 1.5);
  return HermitianMatrix(symmetrized(q * d.asDiagonal() * q.adjoint()), "J");
}

/// k x n frame of full rank with singular values bounded away from zero.
inline Frame random_frame(Rng& rng, Eigen::Index k, Eigen::Index n) {
  for (;;) {
    CMatrix f(k, n);
    for (Eigen::Index i = 0; i < k; ++i)
      for (Eigen::Index j = 0; j < n; ++j) f(i, j) = rng.complex_normal();
    Eigen::JacobiSVD<CMatrix> svd(f);
    const RVector& sv = svd.singularValues();
    if (sv(sv.size() - 1) > 0.1 * sv(0)) return Frame(f);
  }
}

inline RandomCase random_case(Rng& rng, const RandomModelSpec& spec = {}) {
  const int n = rng.integer(spec.dim_min, spec.dim_max);
  const int k = rng.integer(spec.rank_min, std::min(spec.rank_max, n));
  const HermitianMatrix h0(random_hermitian(rng, n), "H0");
  FramedModel model(h0, random_frame(rng, k, n), Direction{random_direction(rng, k)});
  const RVector ev = h0.eigenvalues();
  const int gap = rng.integer(0, n - 2);
  const double lambda = 0.5 * (ev(gap) + ev(gap + 1));
  const double vnorm = spectral_norm(model.v().matrix());
  const double reach = 2.0 * (1.0 + (ev.maxCoeff() - ev.minCoeff())) / vnorm;
  double a = -reach * rng.uniform(0.5, 1.0);
  double b = reach * rng.uniform(0.5, 1.0);
  while (!is_regular_point(model, a, lambda)) a -= 1e-3 * reach;
  while (!is_regular_point(model, b, lambda)) b += 1e-3 * reach;
  return RandomCase{std::move(model), lambda, a, b, k};
}

}  // namespace ressf
