#pragma once

#include "ressf/contour.hpp"
#include "ressf/model.hpp"

#include <concepts>
#include <limits>

namespace ressf {

/// A model whose base transfer product T_z(H0) J can be formed. Everything that
/// only needs the poles of f_z(s) = (1 + s T_z(H0) J)^(-1) is generic over this.
template <typename S>
concept PoleSource = requires(const S& src, SpectralParameter z, double lambda) {
  { base_transfer_j(src, z) } -> std::convertible_to<CMatrix>;
  { is_regular_at(src, lambda) } -> std::convertible_to<bool>;
  { perturbation_signature(src) } -> std::convertible_to<int>;
};

/// R_z(H) = (H - z)^(-1) by LU with partial pivoting.
inline CMatrix resolvent(const HermitianMatrix& h, SpectralParameter z, double gap_tol) {
  if (z.y == 0.0 && distance_to_spectrum(h, z.lambda) <= gap_tol)
    throw Error(ErrorCode::SingularResolvent,
                "lambda = " + std::to_string(z.lambda) + " lies within gap_tol of the spectrum");
  const Eigen::Index n = h.dim();
  CMatrix shifted = h.matrix() - z.z() * CMatrix::Identity(n, n);
  return Eigen::PartialPivLU<CMatrix>(shifted).inverse();
}

inline CMatrix resolvent(const HermitianMatrix& h, SpectralParameter z) {
  return resolvent(h, z, default_gap_tol(h));
}

/// F R_z(H_r) F* (or A^(r)_z = that product times J) on the auxiliary space.
struct TransferMatrix {
  SpectralParameter z;
  double r = 0.0;
  CMatrix entries;
};

inline TransferMatrix transfer_matrix(const FramedModel& m, double r, SpectralParameter z) {
  const CMatrix& f = m.frame().matrix();
  return {z, r, f * resolvent(path_at(m, r), z) * f.adjoint()};
}

/// A^(r)_z = T_z(H_r) J.
inline TransferMatrix a_matrix(const FramedModel& m, double r, SpectralParameter z) {
  TransferMatrix t = transfer_matrix(m, r, z);
  t.entries = t.entries * m.j().matrix();
  return t;
}

inline CMatrix base_transfer_j(const FramedModel& m, SpectralParameter z) { return a_matrix(m, 0.0, z).entries; }
inline bool is_regular_at(const FramedModel& m, double lambda) { return is_regular_point(m, 0.0, lambda); }
inline int perturbation_signature(const FramedModel& m) { return signature(m.v()).value; }

/// Trace function F_z(s) in its meromorphic (eigenvalue) form
///
///   F_z(s) = (1/2 pi i) sum_j [ mu_j / (1 + s mu_j) - conj(mu_j) / (1 + s conj(mu_j)) ],
///
/// where mu_j are the non-zero eigenvalues of T_z(H0) J. Equivalently
/// (1/2 pi i) sum_j [1/(s - s_j) - 1/(s - conj(s_j))] with poles s_j = -1/mu_j.
/// The form is regular at s = 0, where it equals (1/pi) Tr Im T_z(H0) J.
class TraceFunction {
 public:
  static constexpr double zero_eigenvalue_rel_tol = 1e-12;

  TraceFunction(const CMatrix& tj, SpectralParameter z) : z_(z) {
    const double scale = spectral_norm(tj);
    for (cplx mu : ressf::eigenvalues(tj))
      if (std::abs(mu) > zero_eigenvalue_rel_tol * scale) mu_.push_back(mu);
    std::sort(mu_.begin(), mu_.end(), complex_less);
  }

  SpectralParameter z() const { return z_; }

  /// Non-zero eigenvalues of T_z(H0) J (canonically ordered).
  const std::vector<cplx>& eigenvalues() const { return mu_; }

  /// Poles s_j = -1/mu_j of f_z(s).
  std::vector<cplx> eigen_poles() const {
    std::vector<cplx> out;
    out.reserve(mu_.size());
    for (cplx mu : mu_) out.push_back(-1.0 / mu);
    return out;
  }

  /// All poles of F_z: the s_j and their conjugates.
  std::vector<cplx> poles() const {
    std::vector<cplx> out = eigen_poles();
    for (cplx mu : mu_) out.push_back(std::conj(-1.0 / mu));
    return out;
  }

  cplx operator()(cplx s) const {
    std::vector<cplx> terms;
    terms.reserve(2 * mu_.size());
    for (cplx mu : mu_) {
      const cplx d1 = 1.0 + s * mu, d2 = 1.0 + s * std::conj(mu);
      if (std::abs(d1) < pole_tol || std::abs(d2) < pole_tol) {
        const cplx pole = std::abs(d1) < pole_tol ? -1.0 / mu : std::conj(-1.0 / mu);
        throw PoleEvaluationError(pole, "trace function evaluated at a pole");
      }
      terms.push_back(mu / d1);
      terms.push_back(-std::conj(mu) / d2);
    }
    return pairwise_sum(terms) / two_pi_i;
  }

 private:
  static constexpr double pole_tol = 1e-13;
  SpectralParameter z_;
  std::vector<cplx> mu_;
};

template <PoleSource S>
TraceFunction trace_function(const S& src, SpectralParameter z) {
  return TraceFunction(base_transfer_j(src, z), z);
}

enum class TraceMethod {
  Direct,               // (1/pi) Tr(Im R_z(H_s) V), real s only
  Meromorphic,          // eigenvalue form of T_z(H0) J
  MeromorphicInverse,   // (1/(2 pi i s)) Tr[(1 + s R_zbar V)^(-1) - (1 + s R_z V)^(-1)]
};

namespace detail {

inline cplx nearest_pole(const FramedModel& m, SpectralParameter z, cplx s) {
  const TraceFunction tf = trace_function(m, z);
  cplx best = std::numeric_limits<double>::infinity();
  for (cplx p : tf.poles())
    if (std::abs(p - s) < std::abs(best - s)) best = p;
  return best;
}

// (1/pi) Tr(Im(R) V) with Im R = (R - R*)/(2i) for the operator imaginary part.
inline cplx im_trace(const CMatrix& r, const CMatrix& r_conj, const CMatrix& v) {
  return ((r - r_conj) * v).trace() / two_pi_i;
}

}  // namespace detail

inline cplx f_trace(const FramedModel& m, cplx s, SpectralParameter z, TraceMethod method = TraceMethod::Meromorphic) {
  const CMatrix& v = m.v().matrix();
  switch (method) {
    case TraceMethod::Direct: {
      if (s.imag() != 0.0) throw Error(ErrorCode::InvalidInput, "direct trace formula needs real s");
      const HermitianMatrix hs = path_at(m, s.real());
      CMatrix r;
      try {
        r = resolvent(hs, z);
      } catch (const Error&) {
        throw PoleEvaluationError(s, "H_s is resonant at lambda");
      }
      return detail::im_trace(r, r.adjoint(), v);
    }
    case TraceMethod::Meromorphic:
      return trace_function(m, z)(s);
    case TraceMethod::MeromorphicInverse: {
      const CMatrix r = resolvent(m.h0(), z);
      // R_{conj z}(H0) = R_z(H0)* for self-adjoint H0.
      const CMatrix r_conj = r.adjoint();
      if (s == cplx(0.0)) return detail::im_trace(r, r_conj, v);
      const Eigen::Index n = m.dim();
      const CMatrix id = CMatrix::Identity(n, n);
      Eigen::PartialPivLU<CMatrix> lu_z(id + s * r * v), lu_zbar(id + s * r_conj * v);
      const double cond_guard = 1e-13;
      auto rcond = [](const Eigen::PartialPivLU<CMatrix>& lu) {
        const auto d = lu.matrixLU().diagonal().cwiseAbs();
        return d.minCoeff() / std::max(d.maxCoeff(), 1e-300);
      };
      if (rcond(lu_z) < cond_guard || rcond(lu_zbar) < cond_guard)
        throw PoleEvaluationError(detail::nearest_pole(m, z, s), "1 + s R V is singular");
      const cplx tr = (lu_zbar.inverse() - lu_z.inverse()).trace();
      return tr / (two_pi_i * s);
    }
  }
  return {};
}

/// sum_j s (s_j - conj s_j) / ((s - s_j)(s - conj s_j)); equals 2 pi i s F_z(s).
template <PoleSource S>
cplx pole_sum_trace(const S& src, cplx s, SpectralParameter z) {
  const TraceFunction tf = trace_function(src, z);
  std::vector<cplx> terms;
  for (cplx sj : tf.eigen_poles()) {
    const cplx d1 = s - sj, d2 = s - std::conj(sj);
    if (std::abs(d1) < 1e-13 * std::max(1.0, std::abs(sj)) || std::abs(d2) < 1e-13 * std::max(1.0, std::abs(sj)))
      throw PoleEvaluationError(sj, "pole sum evaluated at a pole");
    terms.push_back(s * (sj - std::conj(sj)) / (d1 * d2));
  }
  return pairwise_sum(terms);
}

/// Contour integral of F_z(s) ds with breakpoints seeded at the poles of F_z.
inline quad::AdaptiveResult trace_contour_integral(const TraceFunction& tf, const Contour& contour,
                                                   const quad::AdaptiveOptions& opt = {}) {
  return integrate(contour, tf, tf.poles(), opt);
}

}  // namespace ressf
