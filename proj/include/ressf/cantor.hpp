#pragma once

// Symmetric fat Cantor set K in [-1, 1] of measure 1, the measure dF = chi_U dx on the
// removed set U, and the rank-one model "multiplication by x on L2(dF) plus <1, .>1".

#include "ressf/ssf.hpp"

#include <optional>

namespace ressf {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const { return hi - lo; }
};

struct FatCantorSet {
  int depth = 0;
  std::vector<Interval> removed;  // ascending, pairwise disjoint
  std::vector<Interval> kept;     // closed pieces of K_depth, ascending
  double removed_length = 0.0;

  double shortest_removed() const {
    double m = INFINITY;
    for (const auto& iv : removed) m = std::min(m, iv.length());
    return m;
  }
};

/// Smith-Volterra-Cantor schedule: stage n removes the open middle interval of length
/// 2 * 4^-n from each of the 2^(n-1) remaining pieces. Endpoints are dyadic and exact.
inline FatCantorSet build_svc(int depth) {
  if (depth < 1) throw Error(ErrorCode::InvalidInput, "fat Cantor depth must be at least 1");
  if (depth > 24) throw Error(ErrorCode::InvalidInput, "fat Cantor depth above 24 exceeds exact dyadic range");
  FatCantorSet set;
  set.depth = depth;
  std::vector<Interval> pieces{{-1.0, 1.0}};
  for (int n = 1; n <= depth; ++n) {
    const double half_gap = std::ldexp(1.0, -2 * n);
    std::vector<Interval> next;
    next.reserve(2 * pieces.size());
    for (const auto& p : pieces) {
      const double c = 0.5 * (p.lo + p.hi);
      set.removed.push_back({c - half_gap, c + half_gap});
      next.push_back({p.lo, c - half_gap});
      next.push_back({c + half_gap, p.hi});
    }
    pieces = std::move(next);
  }
  std::sort(set.removed.begin(), set.removed.end(), [](const auto& x, const auto& y) { return x.lo < y.lo; });
  set.kept = std::move(pieces);
  std::vector<double> lengths;
  for (const auto& iv : set.removed) lengths.push_back(iv.length());
  set.removed_length = pairwise_sum(lengths);
  return set;
}

/// F(x) = signed measure of U intersected with [0, x].
inline double F_eval(const FatCantorSet& set, double x) {
  if (!(x >= -1.0 && x <= 1.0)) throw Error(ErrorCode::InvalidInput, "F is defined on [-1, 1]");
  const double lo = std::min(0.0, x), hi = std::max(0.0, x);
  std::vector<double> parts;
  for (const auto& iv : set.removed) {
    const double l = std::max(iv.lo, lo), h = std::min(iv.hi, hi);
    if (h > l) parts.push_back(h - l);
  }
  const double m = pairwise_sum(parts);
  return x < 0.0 ? -m : m;
}

/// Default endpoint guard: 1e-3 of the shortest removed interval.
inline double default_guard(const FatCantorSet& set) { return 1e-3 * set.shortest_removed(); }

inline void require_guard(const FatCantorSet& set, double lambda, double guard) {
  if (!(guard > 0.0)) throw Error(ErrorCode::InvalidInput, "guard must be positive");
  if (!(lambda >= -1.0 && lambda <= 1.0)) throw Error(ErrorCode::InvalidInput, "lambda must lie in [-1, 1]");
  for (const auto& iv : set.removed)
    if (std::abs(lambda - iv.lo) <= guard || std::abs(lambda - iv.hi) <= guard)
      throw Error(ErrorCode::EndpointProximity,
                  "lambda = " + std::to_string(lambda) + " is within the guard of a removed-interval endpoint");
}

/// p.v. integral of dF(x) / (x - lambda) = sum over removed intervals of ln|(b - lambda)/(a - lambda)|.
inline double pv_integral(const FatCantorSet& set, double lambda, double guard) {
  require_guard(set, lambda, guard);
  std::vector<double> terms;
  terms.reserve(set.removed.size());
  for (const auto& iv : set.removed) terms.push_back(std::log(std::abs((iv.hi - lambda) / (iv.lo - lambda))));
  return pairwise_sum(terms);
}

inline double pv_integral(const FatCantorSet& set, double lambda) { return pv_integral(set, lambda, default_guard(set)); }

/// Coupling -1/pv at which H_r is resonant at lambda; empty when the p.v. integral
/// vanishes to round-off (no finite resonance point).
inline std::optional<double> resonance_curve(const FatCantorSet& set, double lambda, double guard) {
  require_guard(set, lambda, guard);
  std::vector<double> terms;
  double magnitude = 0.0;
  for (const auto& iv : set.removed) {
    terms.push_back(std::log(std::abs((iv.hi - lambda) / (iv.lo - lambda))));
    magnitude += std::abs(terms.back());
  }
  const double pv = pairwise_sum(terms);
  if (std::abs(pv) <= 1e-13 * std::max(1.0, magnitude)) return std::nullopt;
  return -1.0 / pv;
}

inline std::optional<double> resonance_curve(const FatCantorSet& set, double lambda) {
  return resonance_curve(set, lambda, default_guard(set));
}

/// Exact Cauchy transform of dF: sum over removed intervals of Log((b - z)/(a - z)).
inline cplx cauchy_transform(const FatCantorSet& set, cplx z) {
  std::vector<cplx> terms;
  terms.reserve(set.removed.size());
  for (const auto& iv : set.removed) terms.push_back(std::log((iv.hi - z) / (iv.lo - z)));
  return pairwise_sum(terms);
}

/// Gauss-Legendre discretisation of L2([-1, 1], dF): H0 = diag(nodes), v_i = sqrt(w_i).
/// Treated as a 1x1 pole source with frame <v, .> and J = 1.
class CantorModel {
 public:
  CantorModel(FatCantorSet set, int nodes_per_interval) : set_(std::move(set)), per_interval_(nodes_per_interval) {
    if (nodes_per_interval < 2) throw Error(ErrorCode::InvalidInput, "nodes_per_interval must be at least 2");
    const quad::Rule& rule = quad::cached_gauss_legendre(nodes_per_interval);
    for (const auto& iv : set_.removed) {
      const double half = 0.5 * iv.length(), mid = 0.5 * (iv.lo + iv.hi);
      for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
        nodes_.push_back(mid + half * rule.nodes[k]);
        weights_.push_back(half * rule.weights[k]);
      }
    }
    sorted_nodes_ = nodes_;
    std::sort(sorted_nodes_.begin(), sorted_nodes_.end());
  }

  const FatCantorSet& set() const { return set_; }
  int nodes_per_interval() const { return per_interval_; }
  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& weights() const { return weights_; }

  RVector v() const {
    RVector out(static_cast<Eigen::Index>(weights_.size()));
    for (std::size_t i = 0; i < weights_.size(); ++i) out(static_cast<Eigen::Index>(i)) = std::sqrt(weights_[i]);
    return out;
  }

  /// <v, R_z(H0) v> = sum_i w_i / (x_i - z).
  cplx transfer(cplx z) const {
    std::vector<cplx> terms(nodes_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i) terms[i] = weights_[i] / (nodes_[i] - z);
    return pairwise_sum(terms);
  }

  double distance_to_nodes(double lambda) const {
    auto it = std::lower_bound(sorted_nodes_.begin(), sorted_nodes_.end(), lambda);
    double d = INFINITY;
    if (it != sorted_nodes_.end()) d = std::min(d, *it - lambda);
    if (it != sorted_nodes_.begin()) d = std::min(d, lambda - *std::prev(it));
    return d;
  }

 private:
  FatCantorSet set_;
  int per_interval_;
  std::vector<double> nodes_;
  std::vector<double> weights_;
  std::vector<double> sorted_nodes_;
};

inline CantorModel discretize(const FatCantorSet& set, int nodes_per_interval) {
  return CantorModel(set, nodes_per_interval);
}

inline CMatrix base_transfer_j(const CantorModel& m, SpectralParameter z) {
  if (z.y == 0.0 && !(m.distance_to_nodes(z.lambda) > 1e-8 * 2.0))
    throw Error(ErrorCode::SingularResolvent, "lambda coincides with a quadrature node");
  CMatrix t(1, 1);
  t(0, 0) = m.transfer(z.z());
  return t;
}
inline bool is_regular_at(const CantorModel& m, double lambda) { return m.distance_to_nodes(lambda) > 1e-8 * 2.0; }
inline int perturbation_signature(const CantorModel&) { return 1; }

/// Symmetric sample of K_depth: n/2 points spread over the interior of the positive
/// pieces (fractions (k+1)/(m+1) of each piece) and their mirror images.
inline std::vector<double> sample_kept(const FatCantorSet& set, int count) {
  if (count < 2 || count % 2 != 0) throw Error(ErrorCode::InvalidInput, "sample count must be even and >= 2");
  std::vector<Interval> positive;
  for (const auto& p : set.kept)
    if (p.lo > 0.0) positive.push_back(p);
  const int half = count / 2;
  const int pieces = static_cast<int>(positive.size());
  const int per_piece = (half + pieces - 1) / pieces;
  std::vector<double> pos;
  for (int i = 0; i < half; ++i) {
    const auto& p = positive[static_cast<std::size_t>(i % pieces)];
    const double t = static_cast<double>(i / pieces + 1) / (per_piece + 1);
    pos.push_back(p.lo + t * p.length());
  }
  std::sort(pos.begin(), pos.end());
  std::vector<double> out;
  for (auto it = pos.rbegin(); it != pos.rend(); ++it) out.push_back(-*it);
  out.insert(out.end(), pos.begin(), pos.end());
  return out;
}

struct CantorRow {
  double lambda = 0.0;
  double pv = 0.0;
  std::optional<double> r0_closed_form;
  double r0_discrete = NAN;  // real pole of the discretised model at y = 0
  double r0_at_y = NAN;      // Re s(y) at the working y
  double r0_tracked = NAN;   // pole followed along y, y/2, y/4, ... and extrapolated to y = 0
  int tracking_levels = 0;
  int n_plus = 0;
  int n_minus = 0;
  int index = 0;
  std::string error;
};

/// Resonance index of the discretised model at each sample of K_depth.
inline CantorRow index_at(const CantorModel& model, double lambda, double y) {
  CantorRow row;
  row.lambda = lambda;
  const double guard = default_guard(model.set());
  row.pv = pv_integral(model.set(), lambda, guard);
  row.r0_closed_form = resonance_curve(model.set(), lambda, guard);
  if (!row.r0_closed_form) {
    row.error = "infinite-resonance";
    return row;
  }
  const auto pts = real_poles(model, lambda);
  if (pts.size() != 1) throw Error(ErrorCode::Instability, "rank-one model must have exactly one real pole");
  row.r0_discrete = pts.front().r0;
  auto pole_at = [&](double yy) { return -1.0 / model.transfer(cplx(lambda, yy)); };
  row.r0_at_y = pole_at(y).real();
  const Extrapolation e = extrapolate_to_zero([&](double yy) { return pole_at(yy).real(); }, y);
  if (!e.converged) throw Error(ErrorCode::Convergence, "pole tracking in y did not settle");
  row.r0_tracked = e.value;
  row.tracking_levels = static_cast<int>(e.ys.size());
  const ResonanceIndexResult idx = resonance_index(model, lambda, row.r0_discrete, IndexOptions{.y0 = y});
  row.n_plus = idx.n_plus;
  row.n_minus = idx.n_minus;
  row.index = idx.index;
  return row;
}

inline std::vector<CantorRow> index_on_K(const CantorModel& model, const std::vector<double>& samples, double y) {
  std::vector<CantorRow> rows;
  rows.reserve(samples.size());
  for (double lambda : samples) rows.push_back(index_at(model, lambda, y));
  return rows;
}

}  // namespace ressf
