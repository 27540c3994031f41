#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <vector>

namespace ressf {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

inline constexpr double pi = std::numbers::pi;
inline constexpr cplx two_pi_i{0.0, 2.0 * std::numbers::pi};

namespace detail {

template <typename T>
T pairwise_sum_impl(std::span<const T> xs) {
  if (xs.size() <= 8) {
    T acc{};
    for (const T& x : xs) acc += x;
    return acc;
  }
  const std::size_t half = xs.size() / 2;
  return pairwise_sum_impl(xs.first(half)) + pairwise_sum_impl(xs.subspan(half));
}

}  // namespace detail

/// Deterministic pairwise summation; the result depends only on the order of `xs`.
template <typename T>
T pairwise_sum(std::span<const T> xs) {
  return detail::pairwise_sum_impl(xs);
}

template <typename T>
T pairwise_sum(const std::vector<T>& xs) {
  return pairwise_sum(std::span<const T>(xs.data(), xs.size()));
}

inline double max_hermitian_defect(const CMatrix& m) {
  if (m.rows() != m.cols()) return INFINITY;
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

inline CMatrix symmetrized(const CMatrix& m) { return 0.5 * (m + m.adjoint()); }

inline RVector hermitian_eigenvalues(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

inline std::vector<cplx> eigenvalues(const CMatrix& m) {
  if (m.size() == 0) return {};
  if (m.rows() == 1) return {m(0, 0)};
  Eigen::ComplexEigenSolver<CMatrix> es(m, false);
  const CVector& ev = es.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

inline double spectral_norm(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<CMatrix> svd(m);
  return svd.singularValues()(0);
}

/// Canonical ordering of complex numbers (real part, then imaginary part).
inline bool complex_less(cplx a, cplx b) {
  if (a.real() != b.real()) return a.real() < b.real();
  return a.imag() < b.imag();
}

/// A set of numerically coincident values and its centroid.
struct Cluster {
  cplx center;
  std::vector<cplx> members;
  int size() const { return static_cast<int>(members.size()); }
};

/// Single-linkage clustering: two values join when |a - b| <= abs_gap.
inline std::vector<Cluster> cluster_values(std::vector<cplx> values, double abs_gap) {
  std::sort(values.begin(), values.end(), complex_less);
  const std::size_t n = values.size();
  std::vector<std::size_t> parent(n);
  for (std::size_t i = 0; i < n; ++i) parent[i] = i;
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(values[i] - values[j]) <= abs_gap) parent[find(j)] = find(i);

  std::vector<Cluster> out;
  std::vector<long> slot(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t root = find(i);
    if (slot[root] < 0) {
      slot[root] = static_cast<long>(out.size());
      out.push_back({});
    }
    out[static_cast<std::size_t>(slot[root])].members.push_back(values[i]);
  }
  for (auto& c : out) c.center = pairwise_sum(c.members) / static_cast<double>(c.members.size());
  return out;
}

}  // namespace ressf
