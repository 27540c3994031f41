// Resonance index of the rank-one fat Cantor model at a few points of K.

#include "ressf/cantor.hpp"

#include <cstdio>

int main() {
  const ressf::FatCantorSet set = ressf::build_svc(6);
  const ressf::CantorModel model = ressf::discretize(set, 64);
  std::printf("depth %d, |U| = %.10f, %zu nodes\n", set.depth, set.removed_length, model.nodes().size());
  std::printf("%12s %14s %14s %14s %6s\n", "lambda", "pv", "r0 (closed)", "r0 (tracked)", "index");
  for (const auto& row : ressf::index_on_K(model, ressf::sample_kept(set, 8), 1e-4)) {
    std::printf("%12.6f %14.8f %14.8f %14.8f %6d\n", row.lambda, row.pv, row.r0_closed_form.value_or(NAN),
                row.r0_tracked, row.index);
  }
}
