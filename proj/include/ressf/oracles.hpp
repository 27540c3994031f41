#pragma once

// Brute-force verifiers. Nothing here goes through the pole machinery: they work
// from Hermitian eigenvalue counts, determinants, and contour integrals of
// log-derivatives, so they can check the resonance-index routines independently.

#include "ressf/transfer.hpp"

namespace ressf::oracles {

/// Number of eigenvalues of h strictly below lambda.
inline int count_below(const HermitianMatrix& h, double lambda) {
  const RVector ev = h.eigenvalues();
  return static_cast<int>((ev.array() < lambda).count());
}

/// Sign of det(h - lambda) from an LU factorisation (0 when singular to round-off).
inline int det_sign(const HermitianMatrix& h, double lambda) {
  const Eigen::Index n = h.dim();
  const cplx det = Eigen::PartialPivLU<CMatrix>(h.matrix() - lambda * CMatrix::Identity(n, n)).determinant();
  if (det.real() > 0) return 1;
  if (det.real() < 0) return -1;
  return 0;
}

struct Crossing {
  double r = 0.0;
  int direction = 0;          // +1: an eigenvalue passes lambda upwards as r increases
  int eigenvalue_branch = 0;  // index, in ascending order at the right of the crossing
};

/// Zero-net contact of the spectrum with lambda (tangency or opposite crossings).
struct Touch {
  double r = 0.0;
  int multiplicity = 0;
};

struct FlowRecord {
  double lambda = 0.0;
  std::vector<Crossing> crossings;
  std::vector<Touch> touches;
  int net_flow = 0;
  bool degenerate_warning = false;

  /// Net signed crossings located within `tol` of r.
  int net_at(double r, double tol) const {
    int net = 0;
    for (const auto& c : crossings)
      if (std::abs(c.r - r) <= tol) net += c.direction;
    return net;
  }
};

namespace detail {

inline int near_kernel_dim(const HermitianMatrix& h, double lambda, double tol) {
  const RVector ev = h.eigenvalues();
  return static_cast<int>(((ev.array() - lambda).abs() <= tol).count());
}

}  // namespace detail

/// Signed count of eigenvalue branches of H_r crossing lambda for r in (a, b).
///
/// Cells of a uniform grid where det(H_r - lambda) changes sign, or where the
/// eigenvalue count below lambda changes, are bisected to width < 1e-10. The signed
/// multiplicity of a crossing is the drop of the count across the final bracket.
/// Local minima of dist(lambda, spec H_r) that come within round-off of zero without a
/// count change are reported as touches and raise the degenerate warning.
inline FlowRecord spectral_flow(const FramedModel& m, double lambda, double a, double b, int grid = 2000) {
  if (grid < 2) throw Error(ErrorCode::InvalidInput, "spectral flow grid needs at least 2 cells");
  if (!(a < b)) throw Error(ErrorCode::InvalidInput, "spectral flow needs a < b");
  for (double r : {a, b})
    if (!is_regular_point(m, r, lambda))
      throw Error(ErrorCode::InvalidInput, "lambda is an eigenvalue of H at an interval endpoint");

  FlowRecord rec;
  rec.lambda = lambda;
  const double scale = 1.0 + std::max(spectral_norm(m.h0().matrix()), spectral_norm(m.v().matrix()) *
                                                                             std::max(std::abs(a), std::abs(b)));
  const double kernel_tol = 1e-6 * scale;

  auto count_at = [&](double r) { return count_below(path_at(m, r), lambda); };

  std::vector<double> rs(static_cast<std::size_t>(grid) + 1);
  std::vector<int> counts(rs.size()), signs(rs.size());
  std::vector<double> dists(rs.size());
  for (std::size_t i = 0; i < rs.size(); ++i) {
    rs[i] = i + 1 == rs.size() ? b : a + (b - a) * static_cast<double>(i) / grid;
    const HermitianMatrix h = path_at(m, rs[i]);
    counts[i] = count_below(h, lambda);
    signs[i] = det_sign(h, lambda);
    dists[i] = distance_to_spectrum(h, lambda);
  }

  auto record = [&](double lo, double hi, int c_lo, int c_hi) {
    const int net = c_lo - c_hi;
    const double r = 0.5 * (lo + hi);
    const int mult = detail::near_kernel_dim(path_at(m, r), lambda, kernel_tol);
    if (mult > std::abs(net)) rec.degenerate_warning = true;
    for (int k = 0; k < std::abs(net); ++k) {
      const int branch = net > 0 ? c_hi + k : c_hi - std::abs(net) + k;
      rec.crossings.push_back({r, net > 0 ? 1 : -1, branch});
    }
  };

  auto locate = [&](auto&& self, double lo, double hi, int c_lo, int c_hi) -> void {
    if (hi - lo < 1e-10) {
      record(lo, hi, c_lo, c_hi);
      return;
    }
    const double mid = 0.5 * (lo + hi);
    const int c_mid = count_at(mid);
    if (c_mid != c_lo) self(self, lo, mid, c_lo, c_mid);
    if (c_mid != c_hi) self(self, mid, hi, c_mid, c_hi);
  };

  for (std::size_t i = 0; i + 1 < rs.size(); ++i) {
    if (counts[i] != counts[i + 1] || signs[i] != signs[i + 1])
      locate(locate, rs[i], rs[i + 1], counts[i], counts[i + 1]);
  }

  // Zero-net contacts: golden-section refinement of interior distance minima.
  const double touch_tol = 1e-7 * scale;
  for (std::size_t i = 1; i + 1 < rs.size(); ++i) {
    if (!(dists[i] <= dists[i - 1] && dists[i] <= dists[i + 1])) continue;
    if (counts[i - 1] != counts[i] || counts[i] != counts[i + 1]) continue;
    double lo = rs[i - 1], hi = rs[i + 1];
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    auto dist = [&](double r) { return distance_to_spectrum(path_at(m, r), lambda); };
    double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    double f1 = dist(x1), f2 = dist(x2);
    for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
      if (f1 < f2) {
        hi = x2; x2 = x1; f2 = f1; x1 = hi - g * (hi - lo); f1 = dist(x1);
      } else {
        lo = x1; x1 = x2; f1 = f2; x2 = lo + g * (hi - lo); f2 = dist(x2);
      }
    }
    const double r = 0.5 * (lo + hi);
    if (dist(r) < touch_tol) {
      rec.touches.push_back({r, detail::near_kernel_dim(path_at(m, r), lambda, kernel_tol)});
      rec.degenerate_warning = true;
    }
  }

  for (const auto& c : rec.crossings) rec.net_flow += c.direction;
  return rec;
}

/// N_{H_a}(lambda) - N_{H_b}(lambda), with N counting eigenvalues below lambda.
inline int counting_xi(const HermitianMatrix& h_a, const HermitianMatrix& h_b, double lambda) {
  for (const auto* h : {&h_a, &h_b})
    if (distance_to_spectrum(*h, lambda) <= 1e-10)
      throw Error(ErrorCode::AmbiguousCount, "lambda is within 1e-10 of an eigenvalue");
  return count_below(h_a, lambda) - count_below(h_b, lambda);
}

struct HalfPlaneCounts {
  int n_plus = 0;
  int n_minus = 0;
  int n_real_nonzero = 0;
  bool classification_warning = false;
};

/// Eigenvalue counts of R_z(H) V in the upper and lower half-planes and on the real
/// line away from zero. The non-zero spectrum is taken from the compression
/// D U* R_z(H) U over the eigenbasis U of range(V), which shares it with R_z(H) V.
inline HalfPlaneCounts halfplane_counts(const HermitianMatrix& h, const HermitianMatrix& v, SpectralParameter z) {
  if (!(z.y > 0.0)) throw Error(ErrorCode::InvalidInput, "half-plane counts need y > 0");
  if (h.dim() != v.dim()) throw Error(ErrorCode::DimensionMismatch, "H and V dimensions differ");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(v.matrix());
  const RVector& d = es.eigenvalues();
  const double vnorm = d.cwiseAbs().maxCoeff();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < d.size(); ++i)
    if (std::abs(d(i)) > 1e-12 * std::max(vnorm, 1e-300)) keep.push_back(i);
  HalfPlaneCounts out;
  if (keep.empty()) return out;
  const auto mdim = static_cast<Eigen::Index>(keep.size());
  CMatrix u(h.dim(), mdim);
  CMatrix dm = CMatrix::Zero(mdim, mdim);
  for (Eigen::Index k = 0; k < mdim; ++k) {
    u.col(k) = es.eigenvectors().col(keep[static_cast<std::size_t>(k)]);
    dm(k, k) = d(keep[static_cast<std::size_t>(k)]);
  }
  const CMatrix r = resolvent(h, z);
  const CMatrix comp = dm * u.adjoint() * r * u;
  for (cplx mu : ressf::eigenvalues(comp)) {
    if (std::abs(mu.imag()) <= 1e-10) {
      out.classification_warning = true;
      ++out.n_real_nonzero;
    } else if (mu.imag() > 0) {
      ++out.n_plus;
    } else {
      ++out.n_minus;
    }
  }
  return out;
}

/// (multiplicity of -1/s0 in R_z(H) V) - (multiplicity of -1/s0 in R_zbar(H) V), from the
/// full n x n eigenvalues. Eigenvalues count as equal within rel_tol * |1/s0|.
inline int rv_multiplicity_difference(const HermitianMatrix& h, const HermitianMatrix& v, SpectralParameter z,
                                      cplx s0, double rel_tol = 1e-6) {
  if (s0 == cplx(0.0)) throw Error(ErrorCode::InvalidInput, "s0 must be non-zero");
  const CMatrix r = resolvent(h, z);
  const cplx target = -1.0 / s0;
  const double tol = rel_tol * std::abs(target);
  auto count = [&](const CMatrix& m) {
    int c = 0;
    for (cplx mu : ressf::eigenvalues(m))
      if (std::abs(mu - target) <= tol) ++c;
    return c;
  };
  return count(r * v.matrix()) - count(r.adjoint() * v.matrix());
}

struct ArgumentPrincipleResult {
  int count = 0;
  double raw = 0.0;       // real part before rounding
  double residual = 0.0;  // |raw - count| together with the imaginary part
};

/// (1/2 pi i) * contour integral of d/ds log det(1 + s T_z(H0) J), evaluated as
/// Tr[(1 + s TJ)^(-1) TJ] by direct inversion and rounded to the nearest integer.
template <PoleSource S>
ArgumentPrincipleResult argument_principle_multiplicity(const S& src, SpectralParameter z, const Contour& contour) {
  const CMatrix tj = base_transfer_j(src, z);
  const Eigen::Index k = tj.rows();
  const CMatrix id = CMatrix::Identity(k, k);
  auto log_derivative = [&](cplx s) {
    Eigen::PartialPivLU<CMatrix> lu(id + s * tj);
    const auto diag = lu.matrixLU().diagonal().cwiseAbs();
    if (diag.minCoeff() < 1e-14 * std::max(1.0, diag.maxCoeff()))
      throw Error(ErrorCode::ContourCollision, "perturbation determinant vanishes on the contour");
    return cplx(lu.solve(tj).trace());
  };
  auto evaluate = [&](int n) {
    const ContourQuadrature q = contour.discretize(n);
    std::vector<cplx> terms(q.nodes.size());
    for (std::size_t i = 0; i < q.nodes.size(); ++i) terms[i] = q.weights[i] * log_derivative(q.nodes[i]);
    return pairwise_sum(terms) / two_pi_i;
  };
  int n = 64;
  cplx value = evaluate(n);
  while (n < (1 << 14)) {
    n *= 2;
    const cplx next = evaluate(n);
    const double diff = std::abs(next - value);
    value = next;
    if (diff < 1e-10) break;
  }
  ArgumentPrincipleResult out;
  out.raw = value.real();
  out.count = static_cast<int>(std::lround(value.real()));
  out.residual = std::abs(value - cplx(out.count, 0.0));
  if (out.residual >= 1e-6)
    throw Error(ErrorCode::ContourCollision,
                "argument principle residual " + std::to_string(out.residual) + " (contour too close to a zero)");
  return out;
}

}  // namespace ressf::oracles
