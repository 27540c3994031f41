#pragma once

#include "ressf/errors.hpp"
#include "ressf/quadrature.hpp"

#include <string>
#include <variant>
#include <vector>

namespace ressf {

struct Straight {
  cplx from;
  cplx to;
};

/// Circular arc center + radius*exp(i*theta), theta running from theta_from to theta_to.
struct Arc {
  cplx center;
  double radius;
  double theta_from;
  double theta_to;
};

using Segment = std::variant<Straight, Arc>;

inline cplx segment_start(const Segment& seg) {
  if (const auto* s = std::get_if<Straight>(&seg)) return s->from;
  const auto& a = std::get<Arc>(seg);
  return a.center + std::polar(a.radius, a.theta_from);
}

inline cplx segment_end(const Segment& seg) {
  if (const auto* s = std::get_if<Straight>(&seg)) return s->to;
  const auto& a = std::get<Arc>(seg);
  return a.center + std::polar(a.radius, a.theta_to);
}

/// Point and derivative of the segment parametrised over t in [0, 1].
inline std::pair<cplx, cplx> segment_point(const Segment& seg, double t) {
  if (const auto* s = std::get_if<Straight>(&seg)) return {s->from + t * (s->to - s->from), s->to - s->from};
  const auto& a = std::get<Arc>(seg);
  const double span = a.theta_to - a.theta_from;
  const cplx w = std::polar(a.radius, a.theta_from + t * span);
  return {a.center + w, cplx(0.0, span) * w};
}

/// Fixed discretisation of a contour: integral ~ sum(weights[k] * f(nodes[k])).
struct ContourQuadrature {
  std::vector<cplx> nodes;
  std::vector<cplx> weights;  // include the path derivative ds/dt
};

/// Ordered, end-to-end connected chain of straight segments and arcs.
class Contour {
 public:
  static constexpr double continuity_tol = 1e-14;

  Contour() = default;

  explicit Contour(std::vector<Segment> segments) : segments_(std::move(segments)) {
    for (std::size_t i = 1; i < segments_.size(); ++i) {
      const cplx gap = segment_start(segments_[i]) - segment_end(segments_[i - 1]);
      const double scale = std::max(1.0, std::abs(segment_end(segments_[i - 1])));
      if (std::abs(gap) > continuity_tol * scale)
        throw Error(ErrorCode::Geometry, "contour segments " + std::to_string(i - 1) + " and " +
                                             std::to_string(i) + " are not connected");
    }
  }

  static Contour circle(cplx center, double radius) {
    return Contour({Arc{center, radius, 0.0, 2.0 * pi}});
  }

  const std::vector<Segment>& segments() const { return segments_; }
  bool empty() const { return segments_.empty(); }
  cplx start() const { return segment_start(segments_.front()); }
  cplx end() const { return segment_end(segments_.back()); }

  /// Gauss-Legendre on every segment, except full circles which get the trapezoid rule.
  ContourQuadrature discretize(int nodes_per_segment) const {
    ContourQuadrature q;
    const quad::Rule& gl = quad::cached_gauss_legendre(nodes_per_segment);
    for (const auto& seg : segments_) {
      const auto* arc = std::get_if<Arc>(&seg);
      if (arc && std::abs(std::abs(arc->theta_to - arc->theta_from) - 2.0 * pi) < 1e-15) {
        for (int k = 0; k < nodes_per_segment; ++k) {
          const double t = static_cast<double>(k) / nodes_per_segment;
          auto [p, dp] = segment_point(seg, t);
          q.nodes.push_back(p);
          q.weights.push_back(dp / static_cast<double>(nodes_per_segment));
        }
        continue;
      }
      for (std::size_t k = 0; k < gl.nodes.size(); ++k) {
        const double t = 0.5 * (gl.nodes[k] + 1.0);
        auto [p, dp] = segment_point(seg, t);
        q.nodes.push_back(p);
        q.weights.push_back(0.5 * gl.weights[k] * dp);
      }
    }
    return q;
  }

  /// Smallest distance between the contour (sampled densely) and any of `points`.
  double clearance(const std::vector<cplx>& points, int samples_per_segment = 2048) const {
    double best = INFINITY;
    for (const auto& seg : segments_)
      for (int k = 0; k <= samples_per_segment; ++k) {
        const cplx p = segment_point(seg, static_cast<double>(k) / samples_per_segment).first;
        for (cplx q : points) best = std::min(best, std::abs(p - q));
      }
    return best;
  }

  /// Throws when a known pole lies within `exclusion_tol` of the path.
  void require_clearance(const std::vector<cplx>& poles, double exclusion_tol) const {
    for (cplx q : poles) {
      if (clearance({q}) < exclusion_tol)
        throw PoleEvaluationError(q, "contour passes within exclusion tolerance of a pole");
    }
  }

 private:
  std::vector<Segment> segments_;
};

/// Adaptive contour integral of f(s) ds. Poles near a segment induce breakpoints at
/// their projection so that near-singular peaks are resolved.
template <typename F>
quad::AdaptiveResult integrate(const Contour& contour, const F& f, const std::vector<cplx>& poles = {},
                               const quad::AdaptiveOptions& opt = {}) {
  quad::AdaptiveResult total;
  std::vector<cplx> parts;
  for (const auto& seg : contour.segments()) {
    std::vector<double> cuts;
    if (const auto* s = std::get_if<Straight>(&seg)) {
      const cplx dir = s->to - s->from;
      const double len2 = std::norm(dir);
      for (cplx q : poles) {
        const double t = std::real((q - s->from) * std::conj(dir)) / len2;
        const double dist = std::abs(q - (s->from + t * dir)) / std::sqrt(len2);
        if (t > -0.5 && t < 1.5 && dist < 0.25) {
          for (double m : {0.0, -1.0, 1.0, -4.0, 4.0, -16.0, 16.0}) cuts.push_back(t + m * dist);
        }
      }
    } else {
      const auto& a = std::get<Arc>(seg);
      const double span = a.theta_to - a.theta_from;
      for (cplx q : poles) {
        const cplx rel = q - a.center;
        const double dist = std::abs(std::abs(rel) - a.radius);
        if (dist > 0.25 * a.radius) continue;
        const double theta = std::arg(rel);
        // The pole angle may sit on any 2*pi branch of the arc's parameter range.
        for (int wrap = -2; wrap <= 2; ++wrap) {
          const double tw = (theta + 2.0 * pi * wrap - a.theta_from) / span;
          if (tw > -0.1 && tw < 1.1) {
            const double dt = dist / (a.radius * std::abs(span));
            for (double m : {0.0, -1.0, 1.0, -4.0, 4.0}) cuts.push_back(tw + m * dt);
          }
        }
      }
    }
    auto integrand = [&](double t) {
      auto [p, dp] = segment_point(seg, t);
      return f(p) * dp;
    };
    auto r = quad::integrate(integrand, 0.0, 1.0, std::move(cuts), opt);
    parts.push_back(r.value);
    total.error_estimate += r.error_estimate;
    total.evaluations += r.evaluations;
    total.converged = total.converged && r.converged;
  }
  total.value = pairwise_sum(parts);
  return total;
}

}  // namespace ressf
