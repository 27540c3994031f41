// Two crossings of opposite direction: xi, xi_a, xi_s and the per-point jumps.

#include "ressf/ssf.hpp"

#include <cstdio>

int main() {
  using namespace ressf;
  CMatrix h0 = CMatrix::Zero(2, 2), j = CMatrix::Zero(2, 2);
  h0(0, 0) = 0.0;
  h0(1, 1) = 2.0;
  j(0, 0) = 1.0;
  j(1, 1) = -1.0;
  const FramedModel model = FramedModel::with_identity_frame(HermitianMatrix(h0), HermitianMatrix(j));

  const SsfDecomposition d = ssf_decompose(model, 0.5, -2.0, 2.0);
  std::printf("xi = %.10f  xi_a = %.3e  xi_s = %.10f\n", d.xi, d.xi_a, d.xi_s);
  for (const auto& jump : d.jumps)
    std::printf("  r0 = %+.6f  jump = %+d  index = %+d  (N+ = %d, N- = %d)\n", jump.r0, jump.jump, jump.index,
                jump.n_plus, jump.n_minus);

  const LargeCouplingResult lc = large_coupling_limit(model, 0.5, default_coupling_schedule(model));
  std::printf("large coupling: xi -> %.10f, signature %d, sum of indices %d\n", lc.xi_limit, lc.signature,
              lc.index_sum);
}
