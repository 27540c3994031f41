#pragma once

#include "ressf/poles.hpp"

#include <optional>
#include <sstream>

namespace ressf {

struct ExtrapolationOptions {
  int max_levels = 40;
  int order = 5;            // highest Richardson column used
  int min_levels = 4;
  double agreement_tol = 1e-7;
};

/// Limit y -> 0+ of a quantity sampled on y0, y0/2, y0/4, ...
struct Extrapolation {
  double value = 0.0;
  double error = INFINITY;
  bool converged = false;
  std::vector<double> ys;
  std::vector<double> samples;
  std::vector<double> extrapolants;
};

/// Richardson extrapolation for a quantity with an expansion in integer powers of y.
/// Converged once three consecutive extrapolants agree within the tolerance.
template <typename G>
Extrapolation extrapolate_to_zero(G&& sample, double y0, const ExtrapolationOptions& opt = {}) {
  if (!(y0 > 0.0)) throw Error(ErrorCode::InvalidInput, "extrapolation needs y0 > 0");
  Extrapolation out;
  std::vector<double> prev, row;
  for (int k = 0; k < opt.max_levels; ++k) {
    const double y = std::ldexp(y0, -k);
    const double g = sample(y);
    out.ys.push_back(y);
    out.samples.push_back(g);
    const int cols = std::min(k, opt.order);
    row.assign(static_cast<std::size_t>(cols) + 1, 0.0);
    row[0] = g;
    for (int j = 1; j <= cols; ++j) {
      const auto ju = static_cast<std::size_t>(j);
      row[ju] = row[ju - 1] + (row[ju - 1] - prev[ju - 1]) / (std::ldexp(1.0, j) - 1.0);
    }
    out.extrapolants.push_back(row.back());
    prev = row;
    const std::size_t n = out.extrapolants.size();
    out.value = out.extrapolants.back();
    if (n >= 3) {
      const double d1 = std::abs(out.extrapolants[n - 1] - out.extrapolants[n - 2]);
      const double d2 = std::abs(out.extrapolants[n - 2] - out.extrapolants[n - 3]);
      out.error = std::max(d1, d2);
      if (k + 1 >= opt.min_levels && out.error <= opt.agreement_tol) {
        out.converged = true;
        return out;
      }
    }
  }
  return out;
}

struct SsfOptions {
  double y0 = 0.0;  // 0: derived from the pole geometry at y = 0
  ExtrapolationOptions extrapolation{};
  quad::AdaptiveOptions quadrature{};
  IndexOptions index{};
};

/// Integral of F_{lambda+iy}(s) over the real segment from a to b (complex value).
template <PoleSource S>
quad::AdaptiveResult smoothed_integral(const S& src, double lambda, double y, double a, double b,
                                       const quad::AdaptiveOptions& opt = {}) {
  if (!(y > 0.0)) throw Error(ErrorCode::InvalidInput, "smoothed integral needs y > 0");
  if (a == b) return {};
  const TraceFunction tf = trace_function(src, SpectralParameter{lambda, y});
  return trace_contour_integral(tf, Contour({Straight{a, b}}), opt);
}

/// Smoothed spectral shift: the real part of the integral of F_{lambda+iy} over [a, b].
template <PoleSource S>
double xi_smoothed(const S& src, double lambda, double y, double a, double b, const quad::AdaptiveOptions& opt = {}) {
  return smoothed_integral(src, lambda, y, a, b, opt).value.real();
}

namespace detail {

inline double resonance_match_tol(double r0) { return 1e-7 * std::max(1.0, std::abs(r0)); }

template <PoleSource S>
std::vector<double> interior_resonances(const S& src, double lambda, double a, double b) {
  std::vector<double> out;
  for (const auto& p : real_poles(src, lambda)) {
    const double tol = resonance_match_tol(p.r0);
    if (std::abs(p.r0 - a) <= tol || std::abs(p.r0 - b) <= tol) {
      std::ostringstream msg;
      msg << "interval endpoint is resonant at lambda (resonance point " << p.r0 << ")";
      throw Error(ErrorCode::InvalidInput, msg.str());
    }
    if (p.r0 > a && p.r0 < b) out.push_back(p.r0);
  }
  return out;
}

}  // namespace detail

/// Starting y for the extrapolation schedule: 1e-2 of the smallest distance among
/// resonance points, interval endpoints, and non-real poles hovering over [a, b].
template <PoleSource S>
double auto_y0(const S& src, double lambda, double a, double b) {
  double d = 1.0;
  const PoleSet ps = eigen_poles(src, SpectralParameter{lambda, 0.0}, PoleOptions{.verify_clusters = false});
  std::vector<double> reals;
  for (const auto& p : ps.poles) {
    const cplx s = p.location;
    if (detail::is_real_pole(p)) {
      reals.push_back(s.real());
      if (s.real() > a && s.real() < b) d = std::min({d, s.real() - a, b - s.real()});
    } else {
      const double along = std::clamp(s.real(), a, b);
      d = std::min(d, std::abs(s - cplx(along, 0.0)));
    }
  }
  std::sort(reals.begin(), reals.end());
  for (std::size_t i = 1; i < reals.size(); ++i)
    if (reals[i] - reals[i - 1] > 0.0) d = std::min(d, reals[i] - reals[i - 1]);
  return 1e-2 * d;
}

/// Limit of xi_smoothed as y -> 0+, by Richardson extrapolation.
template <PoleSource S>
Extrapolation xi_limit(const S& src, double lambda, double a, double b, double y0, const SsfOptions& opt = {}) {
  return extrapolate_to_zero([&](double y) { return xi_smoothed(src, lambda, y, a, b, opt.quadrature); }, y0,
                             opt.extrapolation);
}

struct XiAResult {
  double value = 0.0;
  double imag_residual = 0.0;
  double error_estimate = 0.0;
  std::vector<double> detour_centers;
  std::vector<double> detour_radii;
};

/// Integral of F_{lambda+iy} from a to b along the real axis with upper semicircular
/// detours around every resonance point. At y = 0 this is the absolutely continuous
/// part of the spectral shift; at y > 0 each detour passes above the whole pole group.
/// `radius_scale` shrinks every detour (the value must not change).
template <PoleSource S>
XiAResult xi_a_contour(const S& src, double lambda, double a, double b, double y = 0.0, double radius_scale = 1.0,
                       const quad::AdaptiveOptions& opt = {}) {
  if (!(a < b)) throw Error(ErrorCode::InvalidInput, "xi_a contour needs a < b");
  if (!(y >= 0.0)) throw Error(ErrorCode::InvalidInput, "xi_a contour needs y >= 0");
  if (!(radius_scale > 0.0 && radius_scale <= 1.0))
    throw Error(ErrorCode::InvalidInput, "radius_scale must lie in (0, 1]");
  const std::vector<double> centers = detail::interior_resonances(src, lambda, a, b);
  const TraceFunction tf = trace_function(src, SpectralParameter{lambda, y});
  const std::vector<cplx> poles = tf.poles();

  XiAResult out;
  std::vector<Segment> segs;
  double cursor = a;
  for (std::size_t i = 0; i < centers.size(); ++i) {
    const double r0 = centers[i];
    const double group_radius =
        y > 0.0 ? group_geometry(src, lambda, r0).radius : detail::resonance_match_tol(r0);
    double member_reach = 0.0, nearest_other = INFINITY;
    for (cplx p : poles) {
      const double d = std::abs(p - cplx(r0, 0.0));
      if (d < group_radius) member_reach = std::max(member_reach, d);
      else nearest_other = std::min(nearest_other, d);
    }
    double rho = 0.5 * std::min({nearest_other, r0 - a, b - r0});
    if (i > 0) rho = std::min(rho, 0.45 * (r0 - centers[i - 1]));
    if (i + 1 < centers.size()) rho = std::min(rho, 0.45 * (centers[i + 1] - r0));
    rho *= radius_scale;
    if (!(rho > 1.02 * member_reach) || rho < 1e-13 * std::max(1.0, std::abs(r0))) {
      std::ostringstream msg;
      msg << "no feasible detour radius at r0 = " << r0 << " (group reach " << member_reach << ", nearest other pole "
          << nearest_other << ")";
      throw Error(ErrorCode::Geometry, msg.str());
    }
    if (r0 - rho > cursor) segs.emplace_back(Straight{cursor, r0 - rho});
    segs.emplace_back(Arc{r0, rho, pi, 0.0});
    cursor = r0 + rho;
    out.detour_centers.push_back(r0);
    out.detour_radii.push_back(rho);
  }
  if (b > cursor) segs.emplace_back(Straight{cursor, b});
  // Arcs start at r0 - rho up to rounding; snap straight ends onto them.
  for (std::size_t i = 0; i + 1 < segs.size(); ++i)
    if (auto* s = std::get_if<Straight>(&segs[i])) s->to = segment_start(segs[i + 1]);
  for (std::size_t i = 1; i < segs.size(); ++i)
    if (auto* s = std::get_if<Straight>(&segs[i])) s->from = segment_end(segs[i - 1]);

  const auto r = integrate(Contour(std::move(segs)), tf, poles, opt);
  out.value = r.value.real();
  out.imag_residual = std::abs(r.value.imag());
  out.error_estimate = r.error_estimate;
  return out;
}

/// Measured jump of the singular part at one resonance point, next to its index.
struct Jump {
  double r0 = 0.0;
  int jump = 0;
  double raw = 0.0;       // local xi - local xi_a before rounding
  double residual = 0.0;  // |raw - jump|
  int index = 0;
  int n_plus = 0;
  int n_minus = 0;
  int multiplicity = 0;
};

struct SsfDecomposition {
  double lambda = 0.0;
  double a = 0.0;
  double b = 0.0;
  double xi = 0.0;
  double xi_a = 0.0;
  double xi_s = 0.0;
  std::vector<Jump> jumps;
  double y_extrapolation_error = 0.0;
  double xi_a_imag_residual = 0.0;
  double y0 = 0.0;
  int levels = 0;
  bool converged = false;

  int jump_sum() const {
    int s = 0;
    for (const auto& j : jumps) s += j.jump;
    return s;
  }
};

/// xi = lim xi_smoothed, xi_a from the detour contour, xi_s = xi - xi_a. Each jump is
/// measured separately on the window between the midpoints to the neighbouring
/// resonance points and paired with the pole-count resonance index.
template <PoleSource S>
SsfDecomposition ssf_decompose(const S& src, double lambda, double a, double b, const SsfOptions& opt = {}) {
  if (!(a < b)) throw Error(ErrorCode::InvalidInput, "ssf_decompose needs a < b");
  const std::vector<double> centers = detail::interior_resonances(src, lambda, a, b);
  SsfDecomposition d;
  d.lambda = lambda;
  d.a = a;
  d.b = b;
  d.y0 = opt.y0 > 0.0 ? opt.y0 : auto_y0(src, lambda, a, b);

  auto limit = [&](double lo, double hi) {
    Extrapolation e = xi_limit(src, lambda, lo, hi, d.y0, opt);
    if (!e.converged) {
      std::ostringstream msg;
      msg << "y-extrapolation on [" << lo << ", " << hi << "] did not converge after " << e.ys.size()
          << " levels (last value " << e.value << ", spread " << e.error << ")";
      throw Error(ErrorCode::Convergence, msg.str());
    }
    return e;
  };

  const Extrapolation whole = limit(a, b);
  d.xi = whole.value;
  d.y_extrapolation_error = whole.error;
  d.levels = static_cast<int>(whole.ys.size());
  const XiAResult xa = xi_a_contour(src, lambda, a, b, 0.0, 1.0, opt.quadrature);
  d.xi_a = xa.value;
  d.xi_a_imag_residual = xa.imag_residual;
  d.xi_s = d.xi - d.xi_a;

  std::vector<double> cuts{a};
  for (std::size_t i = 0; i + 1 < centers.size(); ++i) cuts.push_back(0.5 * (centers[i] + centers[i + 1]));
  cuts.push_back(b);
  for (std::size_t i = 0; i < centers.size(); ++i) {
    const Extrapolation local = limit(cuts[i], cuts[i + 1]);
    const XiAResult local_a = xi_a_contour(src, lambda, cuts[i], cuts[i + 1], 0.0, 1.0, opt.quadrature);
    Jump j;
    j.r0 = centers[i];
    j.raw = local.value - local_a.value;
    j.jump = static_cast<int>(std::lround(j.raw));
    j.residual = std::abs(j.raw - j.jump);
    const ResonanceIndexResult idx = resonance_index(src, lambda, centers[i], opt.index);
    j.index = idx.index;
    j.n_plus = idx.n_plus;
    j.n_minus = idx.n_minus;
    j.multiplicity = idx.multiplicity;
    d.y_extrapolation_error = std::max(d.y_extrapolation_error, local.error);
    d.jumps.push_back(j);
  }
  d.converged = true;
  return d;
}

struct LargeCouplingResult {
  double xi_limit = 0.0;
  int signature = 0;
  bool converged = false;
  int index_sum = 0;  // sum of resonance indices over every real resonance point
  std::vector<double> radii;
  std::vector<double> values;
};

/// xi(lambda; H_R, H_{-R}) along an increasing schedule of R, stopping once it matches
/// the signature of V within 1e-6. A schedule value that is itself resonant is
/// pushed outwards by a relative 1e-6.
template <PoleSource S>
LargeCouplingResult large_coupling_limit(const S& src, double lambda, const std::vector<double>& schedule,
                                         const SsfOptions& opt = {}) {
  if (schedule.empty()) throw Error(ErrorCode::InvalidInput, "empty coupling schedule");
  for (std::size_t i = 0; i < schedule.size(); ++i)
    if (!(schedule[i] > 0.0) || (i > 0 && !(schedule[i] > schedule[i - 1])))
      throw Error(ErrorCode::InvalidInput, "coupling schedule must be positive and increasing");
  LargeCouplingResult out;
  out.signature = perturbation_signature(src);
  const std::vector<ResonancePoint> all = real_poles(src, lambda);
  for (const auto& p : all) out.index_sum += resonance_index(src, lambda, p.r0, opt.index).index;
  for (double radius : schedule) {
    double r = radius;
    for (int guard = 0; guard < 8; ++guard) {
      bool hit = false;
      for (const auto& p : all)
        if (std::abs(std::abs(p.r0) - r) <= detail::resonance_match_tol(r)) hit = true;
      if (!hit) break;
      r *= 1.0 + 1e-6;
    }
    const double y0 = opt.y0 > 0.0 ? opt.y0 : auto_y0(src, lambda, -r, r);
    const Extrapolation e = xi_limit(src, lambda, -r, r, y0, opt);
    out.radii.push_back(r);
    out.values.push_back(e.value);
    out.xi_limit = e.value;
    if (e.converged && std::abs(e.value - out.signature) < 1e-6) {
      out.converged = true;
      break;
    }
  }
  return out;
}

// Concrete models: re-base the path when H0 is itself resonant at lambda and use the
// spectral gaps at the endpoints to pick the starting y.

inline double auto_y0(const FramedModel& m, double lambda, double a, double b) {
  double y0 = auto_y0<FramedModel>(m, lambda, a, b);
  for (double r : {0.0, a, b}) {
    const double gap = distance_to_spectrum(path_at(m, r), lambda);
    if (gap > 0.0) y0 = std::min(y0, 1e-2 * gap);
  }
  return y0;
}

inline void require_regular_endpoints(const FramedModel& m, double lambda, double a, double b) {
  for (double r : {a, b})
    if (!is_regular_point(m, r, lambda)) {
      std::ostringstream msg;
      msg << "lambda = " << lambda << " is an eigenvalue of H_r at the endpoint r = " << r;
      throw Error(ErrorCode::InvalidInput, msg.str());
    }
}

inline SsfDecomposition ssf_decompose(const FramedModel& m, double lambda, double a, double b,
                                      const SsfOptions& opt = {}) {
  require_regular_endpoints(m, lambda, a, b);
  const double c = regular_base_shift(m, lambda);
  const FramedModel base = c == 0.0 ? m : m.rebased(c);
  SsfOptions local = opt;
  if (!(local.y0 > 0.0)) local.y0 = auto_y0(base, lambda, a - c, b - c);
  SsfDecomposition d = ssf_decompose<FramedModel>(base, lambda, a - c, b - c, local);
  d.a = a;
  d.b = b;
  for (auto& j : d.jumps) j.r0 += c;
  return d;
}

inline XiAResult xi_a_contour(const FramedModel& m, double lambda, double a, double b, double y = 0.0,
                              double radius_scale = 1.0, const quad::AdaptiveOptions& opt = {}) {
  require_regular_endpoints(m, lambda, a, b);
  const double c = regular_base_shift(m, lambda);
  if (c == 0.0) return xi_a_contour<FramedModel>(m, lambda, a, b, y, radius_scale, opt);
  XiAResult out = xi_a_contour<FramedModel>(m.rebased(c), lambda, a - c, b - c, y, radius_scale, opt);
  for (double& r : out.detour_centers) r += c;
  return out;
}

inline double xi_smoothed(const FramedModel& m, double lambda, double y, double a, double b,
                          const quad::AdaptiveOptions& opt = {}) {
  return smoothed_integral(m, lambda, y, a, b, opt).value.real();
}

/// Coupling scale (1 + ||H0||) / ||V|| used to build default large-coupling schedules.
inline double coupling_scale(const FramedModel& m) {
  const double vnorm = spectral_norm(m.v().matrix());
  if (vnorm == 0.0) throw Error(ErrorCode::InvalidInput, "V = 0 has no coupling scale");
  return (1.0 + spectral_norm(m.h0().matrix())) / vnorm;
}

inline std::vector<double> default_coupling_schedule(const FramedModel& m) {
  const double s = coupling_scale(m);
  return {10.0 * s, 100.0 * s, 1000.0 * s};
}

inline LargeCouplingResult large_coupling_limit(const FramedModel& m, double lambda,
                                                const std::vector<double>& schedule, const SsfOptions& opt = {}) {
  const double c = regular_base_shift(m, lambda);
  if (c == 0.0) return large_coupling_limit<FramedModel>(m, lambda, schedule, opt);
  // Only the limit matters, so evaluate on the re-based line with the same radii.
  return large_coupling_limit<FramedModel>(m.rebased(c), lambda, schedule, opt);
}

}  // namespace ressf
