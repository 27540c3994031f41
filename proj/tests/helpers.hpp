#pragma once

// Test-side oracles. These are deliberately simple and do not call into the library's
// quadrature or pole machinery.

#include "ressf/ressf.hpp"

#include <cmath>
#include <functional>

namespace testing_support {

using ressf::cplx;
using ressf::CMatrix;

inline ressf::HermitianMatrix herm(std::initializer_list<std::initializer_list<cplx>> rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  CMatrix m(n, n);
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    Eigen::Index j = 0;
    for (cplx x : row) m(i, j++) = x;
    ++i;
  }
  return ressf::HermitianMatrix(m);
}

inline ressf::HermitianMatrix diag(std::initializer_list<double> d) {
  ressf::RVector v(static_cast<Eigen::Index>(d.size()));
  Eigen::Index i = 0;
  for (double x : d) v(i++) = x;
  return ressf::HermitianMatrix::diagonal(v);
}

/// 1x1 model H0 = 0, F = 1, J = 1.
inline ressf::FramedModel scalar_model() {
  return ressf::FramedModel::with_identity_frame(diag({0.0}), diag({1.0}));
}

/// H0 = diag(0, 2), V = diag(1, 0).
inline ressf::FramedModel diag2_model() {
  return ressf::FramedModel::with_identity_frame(diag({0.0, 2.0}), diag({1.0, 0.0}));
}

/// H0 = 0 (2x2), V = I: a double resonance.
inline ressf::FramedModel double_model() {
  return ressf::FramedModel::with_identity_frame(diag({0.0, 0.0}), diag({1.0, 1.0}));
}

/// Adaptive Simpson for real integrands.
inline double simpson(const std::function<double(double)>& f, double a, double b, double tol, int depth = 50) {
  auto rule = [&](double lo, double hi, double flo, double fmid, double fhi) {
    return (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
  };
  std::function<double(double, double, double, double, double, double, double, int)> rec =
      [&](double lo, double hi, double flo, double fmid, double fhi, double whole, double eps, int d) {
        const double mid = 0.5 * (lo + hi);
        const double lm = 0.5 * (lo + mid), rm = 0.5 * (mid + hi);
        const double flm = f(lm), frm = f(rm);
        const double left = rule(lo, mid, flo, flm, fmid), right = rule(mid, hi, fmid, frm, fhi);
        if (d <= 0 || std::abs(left + right - whole) <= 15.0 * eps)
          return left + right + (left + right - whole) / 15.0;
        return rec(lo, mid, flo, flm, fmid, left, 0.5 * eps, d - 1) + rec(mid, hi, fmid, frm, fhi, right, 0.5 * eps, d - 1);
      };
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  return rec(a, b, fa, fm, fb, rule(a, b, fa, fm, fb), tol, depth);
}

/// Smoothed spectral shift of the scalar model: (1/pi)[atan((b - l)/y) - atan((a - l)/y)].
inline double poisson_xi(double lambda, double y, double a, double b) {
  return (std::atan((b - lambda) / y) - std::atan((a - lambda) / y)) / ressf::pi;
}

inline int count_below(const CMatrix& h, double lambda) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
  return static_cast<int>((es.eigenvalues().array() < lambda).count());
}

}  // namespace testing_support
