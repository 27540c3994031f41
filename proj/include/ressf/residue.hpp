#pragma once

#include "ressf/transfer.hpp"

namespace ressf {

/// Residue of F_z at s0 as (1/2 pi i) times its integral over the circle |s - s0| = radius.
/// Throws ContourCollision when a pole of F_z lies within 2% of the radius from the circle.
inline cplx residue_at(const TraceFunction& tf, cplx s0, double radius) {
  if (!(radius > 0.0)) throw Error(ErrorCode::InvalidInput, "residue radius must be positive");
  for (cplx p : tf.poles()) {
    if (std::abs(std::abs(p - s0) - radius) < 0.02 * radius)
      throw Error(ErrorCode::ContourCollision, "a pole lies on the residue circle");
  }
  const auto r = quad::circle_integral(tf, s0, radius, 64, 1e-13);
  return r.value / two_pi_i;
}

template <PoleSource S>
cplx residue_at(const S& src, SpectralParameter z, cplx s0, double radius) {
  return residue_at(trace_function(src, z), s0, radius);
}

/// A third of the distance from s0 to the nearest pole of F_z that is not s0 itself.
inline double isolation_radius(const TraceFunction& tf, cplx s0) {
  const double same = 1e-9 * std::max(1.0, std::abs(s0));
  double best = INFINITY;
  for (cplx p : tf.poles()) {
    const double d = std::abs(p - s0);
    if (d > same) best = std::min(best, d);
  }
  if (!std::isfinite(best)) best = 3.0 * std::max(1.0, std::abs(s0));
  return best / 3.0;
}

}  // namespace ressf
