#pragma once

#include "ressf/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <vector>

namespace ressf::quad {

/// Nodes and weights of a quadrature rule.
struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre rule on [-1, 1] via Golub-Welsch (eigenpairs of the Jacobi matrix).
inline Rule gauss_legendre(int n) {
  Rule rule;
  if (n <= 0) return rule;
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    jacobi(k - 1, k) = b;
    jacobi(k, k - 1) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const double v0 = es.eigenvectors()(0, k);
    rule.nodes[static_cast<std::size_t>(k)] = es.eigenvalues()(k);
    rule.weights[static_cast<std::size_t>(k)] = 2.0 * v0 * v0;
  }
  // Enforce exact mirror symmetry of the rule.
  for (int k = 0; k < n / 2; ++k) {
    const auto lo = static_cast<std::size_t>(k), hi = static_cast<std::size_t>(n - 1 - k);
    const double x = 0.5 * (rule.nodes[hi] - rule.nodes[lo]);
    const double w = 0.5 * (rule.weights[hi] + rule.weights[lo]);
    rule.nodes[lo] = -x;
    rule.nodes[hi] = x;
    rule.weights[lo] = rule.weights[hi] = w;
  }
  if (n % 2 == 1) rule.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
  return rule;
}

/// Cached rule; safe to call from several threads.
inline const Rule& cached_gauss_legendre(int n) {
  static std::mutex mutex;
  static std::map<int, Rule> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, gauss_legendre(n)).first;
  return it->second;
}

struct AdaptiveOptions {
  double abs_tol = 1e-10;  // local acceptance threshold per panel
  double rel_tol = 1e-13;
  int order = 10;          // Gauss-Legendre points per panel
  int max_depth = 60;
  long max_evaluations = 4'000'000;
};

struct AdaptiveResult {
  cplx value{};
  double error_estimate = 0.0;
  long evaluations = 0;
  bool converged = true;
};

namespace detail {

template <typename F>
cplx gl_panel(const F& f, double a, double b, const Rule& rule) {
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  std::vector<cplx> terms(rule.nodes.size());
  for (std::size_t k = 0; k < rule.nodes.size(); ++k)
    terms[k] = rule.weights[k] * f(mid + half * rule.nodes[k]);
  return half * pairwise_sum(terms);
}

template <typename F>
void adaptive_panel(const F& f, double a, double b, cplx whole, int depth, const Rule& rule,
                    const AdaptiveOptions& opt, AdaptiveResult& out, std::vector<cplx>& accepted) {
  const double mid = 0.5 * (a + b);
  const cplx left = gl_panel(f, a, mid, rule);
  const cplx right = gl_panel(f, mid, b, rule);
  out.evaluations += 2 * static_cast<long>(rule.nodes.size());
  const cplx refined = left + right;
  const double diff = std::abs(refined - whole);
  const bool ok = diff <= std::max(opt.abs_tol, opt.rel_tol * std::abs(refined));
  if (ok || depth >= opt.max_depth || out.evaluations >= opt.max_evaluations || mid <= a || mid >= b) {
    if (!ok) out.converged = false;
    out.error_estimate += diff;
    accepted.push_back(refined);
    return;
  }
  adaptive_panel(f, a, mid, left, depth + 1, rule, opt, out, accepted);
  adaptive_panel(f, mid, b, right, depth + 1, rule, opt, out, accepted);
}

}  // namespace detail

/// Adaptive Gauss-Legendre integration of a complex-valued f over [a, b]. Interior
/// breakpoints split the interval first, so narrow features at known places are resolved.
template <typename F>
AdaptiveResult integrate(const F& f, double a, double b, std::vector<double> breakpoints = {},
                         const AdaptiveOptions& opt = {}) {
  AdaptiveResult out;
  if (a == b) return out;
  const double sign = b > a ? 1.0 : -1.0;
  const double lo = std::min(a, b), hi = std::max(a, b);
  std::vector<double> cuts{lo};
  std::sort(breakpoints.begin(), breakpoints.end());
  for (double x : breakpoints)
    if (x > lo && x < hi && x > cuts.back()) cuts.push_back(x);
  cuts.push_back(hi);
  const Rule& rule = cached_gauss_legendre(opt.order);
  std::vector<cplx> accepted;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double pa = cuts[i], pb = cuts[i + 1];
    if (pb <= pa) continue;
    const cplx whole = detail::gl_panel(f, pa, pb, rule);
    out.evaluations += static_cast<long>(rule.nodes.size());
    detail::adaptive_panel(f, pa, pb, whole, 0, rule, opt, out, accepted);
  }
  out.value = sign * pairwise_sum(accepted);
  return out;
}

/// Trapezoidal rule for a closed circle: returns the contour integral of f(s) ds,
/// doubling the node count from `start_nodes` until two successive values agree to `tol`.
template <typename F>
AdaptiveResult circle_integral(const F& f, cplx center, double radius, int start_nodes = 64,
                               double tol = 1e-12, int max_nodes = 1 << 16) {
  AdaptiveResult out;
  auto trapezoid = [&](int n) {
    std::vector<cplx> terms(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
      const cplx w = std::polar(1.0, 2.0 * pi * k / n);
      terms[static_cast<std::size_t>(k)] = f(center + radius * w) * (cplx(0.0, 1.0) * radius * w);
    }
    out.evaluations += n;
    return pairwise_sum(terms) * (2.0 * pi / n);
  };
  int n = start_nodes;
  cplx prev = trapezoid(n);
  while (true) {
    n *= 2;
    const cplx next = trapezoid(n);
    const double diff = std::abs(next - prev);
    prev = next;
    if (diff <= tol * std::max(1.0, std::abs(next))) {
      out.error_estimate = diff;
      break;
    }
    if (n >= max_nodes) {
      out.error_estimate = diff;
      out.converged = false;
      break;
    }
  }
  out.value = prev;
  return out;
}

}  // namespace ressf::quad
