#pragma once

#include "ressf/oracles.hpp"
#include "ressf/residue.hpp"

#include <optional>
#include <sstream>

namespace ressf {

/// Pole of f_z(s) = (1 + s T_z(H0) J)^(-1); location * source_eigenvalue = -1.
struct Pole {
  cplx location;
  int algebraic_multiplicity = 1;
  cplx source_eigenvalue;
};

struct PoleSet {
  SpectralParameter z;
  std::vector<Pole> poles;
  bool defective_warning = false;
  std::string diagnostics;

  int total_multiplicity() const {
    int n = 0;
    for (const auto& p : poles) n += p.algebraic_multiplicity;
    return n;
  }
};

struct PoleOptions {
  double cluster_rel_gap = 1e-6;    // relative to max |eigenvalue|
  double ambiguity_rel_gap = 1e-4;  // distinct clusters closer than this raise the warning
  bool verify_clusters = true;      // argument-principle check of multi-member clusters
};

/// Poles s = -1/mu over the non-zero eigenvalues mu of T_z(H0) J, clustered into
/// algebraic multiplicities.
template <PoleSource S>
PoleSet eigen_poles(const S& src, SpectralParameter z, const PoleOptions& opt = {}) {
  PoleSet out;
  out.z = z;
  const CMatrix tj = base_transfer_j(src, z);
  const TraceFunction tf(tj, z);
  const auto& mu = tf.eigenvalues();
  if (mu.empty()) return out;
  double scale = 0.0;
  for (cplx m : mu) scale = std::max(scale, std::abs(m));
  const auto clusters = cluster_values(mu, opt.cluster_rel_gap * scale);
  for (const auto& c : clusters) out.poles.push_back({-1.0 / c.center, c.size(), c.center});

  std::ostringstream diag;
  for (std::size_t i = 0; i < clusters.size(); ++i)
    for (std::size_t j = i + 1; j < clusters.size(); ++j)
      if (std::abs(clusters[i].center - clusters[j].center) < opt.ambiguity_rel_gap * scale) {
        out.defective_warning = true;
        diag << "eigenvalue clusters " << i << " and " << j << " are nearly coincident; ";
      }

  if (opt.verify_clusters) {
    for (std::size_t i = 0; i < out.poles.size(); ++i) {
      if (out.poles[i].algebraic_multiplicity < 2) continue;
      const cplx loc = out.poles[i].location;
      double gap = std::abs(loc);  // keep s = 0 (where det = 1) outside the circle
      for (std::size_t j = 0; j < out.poles.size(); ++j)
        if (j != i) gap = std::min(gap, std::abs(out.poles[j].location - loc));
      try {
        const auto ap = oracles::argument_principle_multiplicity(src, z, Contour::circle(loc, 0.5 * gap));
        if (ap.count != out.poles[i].algebraic_multiplicity) {
          out.defective_warning = true;
          diag << "cluster at " << loc << " has multiplicity " << out.poles[i].algebraic_multiplicity
               << " but the argument principle counts " << ap.count << "; ";
        }
      } catch (const Error& e) {
        out.defective_warning = true;
        diag << "cluster at " << loc << " could not be verified (" << e.what() << "); ";
      }
    }
  }
  out.diagnostics = diag.str();
  std::sort(out.poles.begin(), out.poles.end(),
            [](const Pole& a, const Pole& b) { return complex_less(a.location, b.location); });
  return out;
}

/// Real pole of f_{lambda+i0}: a coupling r0 at which H_r0 has lambda as an eigenvalue.
struct ResonancePoint {
  double r0 = 0.0;
  int multiplicity = 0;
};

namespace detail {

inline constexpr double real_pole_rel_tol = 1e-9;

inline bool is_real_pole(const Pole& p) {
  return std::abs(p.source_eigenvalue.imag()) <= real_pole_rel_tol * std::abs(p.source_eigenvalue);
}

}  // namespace detail

/// All real poles of f_{lambda+i0}(s) for a source regular at lambda.
template <PoleSource S>
std::vector<ResonancePoint> real_poles(const S& src, double lambda) {
  if (!is_regular_at(src, lambda))
    throw Error(ErrorCode::DegeneratePath, "base operator is resonant at lambda; re-base the path first");
  const PoleSet ps = eigen_poles(src, SpectralParameter{lambda, 0.0}, PoleOptions{.verify_clusters = false});
  std::vector<ResonancePoint> out;
  for (const auto& p : ps.poles)
    if (detail::is_real_pole(p)) out.push_back({p.location.real(), p.algebraic_multiplicity});
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.r0 < b.r0; });
  return out;
}

/// Shift s such that H_s is regular at lambda (0 when H0 already is).
inline double regular_base_shift(const FramedModel& m, double lambda) {
  if (is_regular_point(m, 0.0, lambda)) return 0.0;
  const double vnorm = spectral_norm(m.v().matrix());
  if (vnorm == 0.0) throw Error(ErrorCode::DegeneratePath, "V = 0 and H0 is resonant at lambda");
  const double unit = (1.0 + spectral_norm(m.h0().matrix())) / vnorm;
  for (double c : {0.0137, -0.0213, 0.0531, -0.0771, 0.113, -0.173, 0.311, -0.457, 0.71, -1.13}) {
    if (is_regular_point(m, c * unit, lambda)) return c * unit;
  }
  throw Error(ErrorCode::DegeneratePath, "the line H0 + rV is resonant at lambda for every tested r");
}

inline std::vector<ResonancePoint> real_poles(const FramedModel& m, double lambda) {
  const double shift = regular_base_shift(m, lambda);
  if (shift == 0.0) return real_poles<FramedModel>(m, lambda);
  auto pts = real_poles<FramedModel>(m.rebased(shift), lambda);
  for (auto& p : pts) p.r0 += shift;
  return pts;
}

/// Resonance points r in [a, b] at lambda, with multiplicity.
template <typename S>
std::vector<ResonancePoint> resonance_points(const S& src, double lambda, double a, double b) {
  std::vector<ResonancePoint> out;
  for (const auto& p : real_poles(src, lambda))
    if (p.r0 >= a && p.r0 <= b) out.push_back(p);
  return out;
}

template <typename S>
std::vector<double> real_resonance_points(const S& src, double lambda, double a, double b) {
  std::vector<double> out;
  for (const auto& p : resonance_points(src, lambda, a, b)) out.push_back(p.r0);
  return out;
}

/// The group of poles of f_{lambda+iy} that emanate from the real pole r0.
struct PoleGroup {
  double resonance_point = 0.0;
  double y = 0.0;
  std::vector<Pole> ups;
  std::vector<Pole> downs;
  double radius = 0.0;
  int multiplicity = 0;  // N, the multiplicity of r0 at y = 0

  int n_plus() const {
    int n = 0;
    for (const auto& p : ups) n += p.algebraic_multiplicity;
    return n;
  }
  int n_minus() const {
    int n = 0;
    for (const auto& p : downs) n += p.algebraic_multiplicity;
    return n;
  }
};

/// y-independent data of a pole group: multiplicity and clustering radius.
struct GroupGeometry {
  double r0 = 0.0;
  int multiplicity = 0;
  double radius = 0.0;
  double nearest_other_resonance = INFINITY;  // distance to the closest other real pole
};

template <PoleSource S>
GroupGeometry group_geometry(const S& src, double lambda, double r0) {
  const PoleSet ps = eigen_poles(src, SpectralParameter{lambda, 0.0}, PoleOptions{.verify_clusters = false});
  GroupGeometry g;
  g.r0 = r0;
  const double match = 1e-7 * std::max(1.0, std::abs(r0));
  double nearest_other = INFINITY;
  for (const auto& p : ps.poles) {
    const double d = std::abs(p.location - cplx(r0, 0.0));
    if (d <= match && detail::is_real_pole(p)) {
      g.multiplicity += p.algebraic_multiplicity;
    } else {
      nearest_other = std::min(nearest_other, d);
      if (detail::is_real_pole(p)) g.nearest_other_resonance = std::min(g.nearest_other_resonance, d);
    }
  }
  if (g.multiplicity == 0)
    throw Error(ErrorCode::InvalidInput, "r0 = " + std::to_string(r0) + " is not a resonance point at lambda");
  g.radius = std::min(0.5 * nearest_other, 0.1 * std::abs(r0) + 0.1);
  return g;
}

/// Partition the poles of f_{lambda+iy} within the group radius of r0 by half-plane.
/// Throws GroupOverlap when the group is not yet separated (y too large).
template <PoleSource S>
PoleGroup classify_group(const S& src, const GroupGeometry& g, double lambda, double y) {
  if (!(y > 0.0)) throw Error(ErrorCode::InvalidInput, "group classification needs y > 0");
  const PoleSet ps = eigen_poles(src, SpectralParameter{lambda, y}, PoleOptions{.verify_clusters = false});
  PoleGroup grp;
  grp.resonance_point = g.r0;
  grp.y = y;
  grp.radius = g.radius;
  grp.multiplicity = g.multiplicity;
  int members = 0;
  for (const auto& p : ps.poles) {
    if (std::abs(p.location - cplx(g.r0, 0.0)) >= g.radius) continue;
    members += p.algebraic_multiplicity;
    if (p.location.imag() > 0.0) grp.ups.push_back(p);
    else if (p.location.imag() < 0.0) grp.downs.push_back(p);
    else throw Error(ErrorCode::Instability, "pole on the real axis for y > 0");
  }
  if (members != g.multiplicity) {
    std::ostringstream msg;
    msg << "group of r0 = " << g.r0 << " holds " << members << " poles at y = " << y << ", expected "
        << g.multiplicity;
    throw Error(ErrorCode::GroupOverlap, msg.str());
  }
  return grp;
}

template <PoleSource S>
PoleGroup group_and_classify(const S& src, double lambda, double r0, double y) {
  return classify_group(src, group_geometry(src, lambda, r0), lambda, y);
}

struct IndexOptions {
  double y0 = 0.0;  // 0: 1e-2 times the minimum gap between resonance points
  int max_halvings = 40;
  int stable_required = 3;
};

struct ResonanceIndexResult {
  double lambda = 0.0;
  double r0 = 0.0;
  int n_plus = 0;
  int n_minus = 0;
  int index = 0;
  int multiplicity = 0;
  double y_used = 0.0;
  double y0 = 0.0;
  int halvings = 0;
  /// Sum of residues of F_{lambda+i y_used} over the group's members in the upper half-plane.
  cplx residue_check{};
};

namespace detail {

/// Sum of residues of F over the distinct upper-half-plane points of the group
/// (up-poles and conjugates of down-poles).
inline cplx group_upper_residue(const TraceFunction& tf, const PoleGroup& grp) {
  std::vector<cplx> pts;
  for (const auto& p : grp.ups) pts.push_back(p.location);
  for (const auto& p : grp.downs) pts.push_back(std::conj(p.location));
  const double scale = std::max(1.0, std::abs(grp.resonance_point));
  std::vector<cplx> parts;
  for (const auto& c : cluster_values(pts, 1e-9 * scale)) parts.push_back(residue_at(tf, c.center, isolation_radius(tf, c.center)));
  return pairwise_sum(parts);
}

}  // namespace detail

/// N+ - N- for the group of r0, over a geometric y-schedule halted once the
/// partition is identical for `stable_required` consecutive values of y.
template <PoleSource S>
ResonanceIndexResult resonance_index(const S& src, double lambda, double r0, const IndexOptions& opt = {}) {
  const GroupGeometry g = group_geometry(src, lambda, r0);
  double y0 = opt.y0;
  if (!(y0 > 0.0)) {
    const double gap = std::isfinite(g.nearest_other_resonance) ? g.nearest_other_resonance : 1.0 + std::abs(r0);
    y0 = 1e-2 * gap;
  }
  ResonanceIndexResult res;
  res.lambda = lambda;
  res.r0 = r0;
  res.multiplicity = g.multiplicity;
  res.y0 = y0;
  std::optional<std::pair<int, int>> last;
  int stable = 0;
  std::string last_error;
  for (int k = 0; k <= opt.max_halvings; ++k) {
    const double y = std::ldexp(y0, -k);
    try {
      const PoleGroup grp = classify_group(src, g, lambda, y);
      const std::pair<int, int> part{grp.n_plus(), grp.n_minus()};
      stable = (last && *last == part) ? stable + 1 : 1;
      last = part;
      if (stable >= opt.stable_required) {
        res.n_plus = part.first;
        res.n_minus = part.second;
        res.index = part.first - part.second;
        res.y_used = y;
        res.halvings = k;
        res.residue_check = detail::group_upper_residue(trace_function(src, SpectralParameter{lambda, y}), grp);
        return res;
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::GroupOverlap) throw;
      last.reset();
      stable = 0;
      last_error = e.what();
    }
  }
  throw Error(ErrorCode::Instability, "pole partition of r0 = " + std::to_string(r0) + " did not stabilise after " +
                                          std::to_string(opt.max_halvings) + " halvings of y0 = " +
                                          std::to_string(y0) + (last_error.empty() ? "" : "; last: " + last_error));
}

/// Re-bases the path first when H0 itself is resonant at lambda.
inline ResonanceIndexResult resonance_index(const FramedModel& m, double lambda, double r0,
                                            const IndexOptions& opt = {}) {
  const double shift = regular_base_shift(m, lambda);
  if (shift == 0.0) return resonance_index<FramedModel>(m, lambda, r0, opt);
  ResonanceIndexResult res = resonance_index<FramedModel>(m.rebased(shift), lambda, r0 - shift, opt);
  res.r0 += shift;
  return res;
}

/// Half the distance from `target` to the nearest eigenvalue of `a` outside its own cluster.
inline double riesz_isolation_radius(const CMatrix& a, cplx target) {
  const double same = 1e-5 * std::max(1.0, std::abs(target));
  double best = INFINITY;
  for (cplx mu : eigenvalues(a)) {
    const double d = std::abs(mu - target);
    if (d > same) best = std::min(best, d);
  }
  if (!std::isfinite(best)) best = std::max(1.0, std::abs(target));
  return 0.5 * best;
}

/// Riesz idempotent onto the root space of the eigenvalue 1/s of A = T_z(H_{r+s}) J,
/// where H_r is the resonant operator and H_{r+s} a regular point of the line.
/// Trapezoidal rule on the circle |t - 1/s| = circle_radius, doubling from 64 nodes
/// until successive projectors differ by less than 1e-10.
inline CMatrix riesz_projector(const FramedModel& m, double r, SpectralParameter z, double s, double circle_radius) {
  if (s == 0.0) throw Error(ErrorCode::InvalidInput, "riesz projector needs s != 0");
  if (!(circle_radius > 0.0)) throw Error(ErrorCode::InvalidInput, "circle radius must be positive");
  const CMatrix a = a_matrix(m, r + s, z).entries;
  const cplx target = 1.0 / s;
  int inside = 0;
  for (cplx mu : eigenvalues(a)) {
    const double d = std::abs(mu - target);
    if (std::abs(d - circle_radius) < 0.05 * circle_radius)
      throw Error(ErrorCode::ContourCollision, "an eigenvalue of A lies near the projector contour");
    if (d < circle_radius) ++inside;
  }
  if (inside == 0) throw Error(ErrorCode::InvalidInput, "1/s is not an eigenvalue of T(H_{r+s}) J");
  const Eigen::Index k = a.rows();
  const CMatrix id = CMatrix::Identity(k, k);
  auto trapezoid = [&](int n) {
    CMatrix acc = CMatrix::Zero(k, k);
    for (int j = 0; j < n; ++j) {
      const cplx w = std::polar(1.0, 2.0 * pi * j / n);
      const cplx t = target + circle_radius * w;
      acc += (circle_radius * w) * Eigen::PartialPivLU<CMatrix>(t * id - a).inverse();
    }
    return CMatrix(acc / static_cast<double>(n));
  };
  int n = 64;
  CMatrix p = trapezoid(n);
  while (n < (1 << 14)) {
    n *= 2;
    CMatrix next = trapezoid(n);
    const double change = (next - p).cwiseAbs().maxCoeff();
    p = std::move(next);
    if (change < 1e-10) break;
  }
  return p;
}

inline CMatrix riesz_projector(const FramedModel& m, double r, SpectralParameter z, double s) {
  const CMatrix a = a_matrix(m, r + s, z).entries;
  return riesz_projector(m, r, z, s, riesz_isolation_radius(a, 1.0 / s));
}

struct RootSpace {
  int dimension = 0;
  std::vector<CVector> basis;  // orthonormal
  CMatrix projector;
};

/// Root space of the resonance at H_{r0} in direction V, obtained as the range of
/// the Riesz idempotent built at the regular point H_{r0+s}.
inline RootSpace root_space(const FramedModel& m, double lambda, double r0, double s) {
  RootSpace out;
  out.projector = riesz_projector(m, r0, SpectralParameter{lambda, 0.0}, s);
  out.dimension = static_cast<int>(std::lround(out.projector.trace().real()));
  Eigen::ColPivHouseholderQR<CMatrix> qr(out.projector);
  const CMatrix q = qr.householderQ();
  for (int i = 0; i < out.dimension; ++i) out.basis.push_back(q.col(i));
  return out;
}

}  // namespace ressf
