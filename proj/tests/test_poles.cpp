#include "helpers.hpp"

#include <gtest/gtest.h>

using namespace ressf;
using namespace testing_support;

namespace {

std::vector<RandomCase> resonant_cases(std::uint64_t seed, int count) {
  Rng rng(seed);
  std::vector<RandomCase> out;
  while (static_cast<int>(out.size()) < count) {
    RandomCase rc = random_case(rng);
    if (!real_resonance_points(rc.model, rc.lambda, rc.a, rc.b).empty()) out.push_back(std::move(rc));
  }
  return out;
}

}  // namespace

TEST(EigenPoles, ScalarPoleAtZ) {
  const SpectralParameter z(0.5, 0.1);
  const PoleSet ps = eigen_poles(scalar_model(), z);
  ASSERT_EQ(ps.poles.size(), 1u);
  EXPECT_LT(std::abs(ps.poles[0].location - z.z()), 1e-14);
  EXPECT_EQ(ps.poles[0].algebraic_multiplicity, 1);
}

TEST(EigenPoles, DoublePole) {
  const SpectralParameter z(1.0, 0.1);
  const PoleSet ps = eigen_poles(double_model(), z);
  ASSERT_EQ(ps.poles.size(), 1u);
  EXPECT_LT(std::abs(ps.poles[0].location - z.z()), 1e-12);
  EXPECT_EQ(ps.poles[0].algebraic_multiplicity, 2);
  EXPECT_FALSE(ps.defective_warning);
}

TEST(EigenPoles, ZeroDirectionHasNoPoles) {
  const FramedModel m = FramedModel::with_identity_frame(diag({0.0, 1.0}), diag({0.0, 0.0}));
  EXPECT_TRUE(eigen_poles(m, SpectralParameter(0.5, 0.1)).poles.empty());
}

TEST(EigenPoles, ReciprocalEigenvalueDuality) {
  Rng rng(31);
  for (int i = 0; i < 20; ++i) {
    const RandomCase rc = random_case(rng);
    const SpectralParameter z(rc.lambda, rng.uniform(0.0, 0.2));
    const CMatrix tj = base_transfer_j(rc.model, z);
    const PoleSet ps = eigen_poles(rc.model, z);
    int total = 0;
    for (const auto& p : ps.poles) {
      EXPECT_LT(std::abs(p.location * p.source_eigenvalue + 1.0), 1e-10);
      const CMatrix shifted = tj + (1.0 / p.location) * CMatrix::Identity(tj.rows(), tj.cols());
      Eigen::JacobiSVD<CMatrix> svd(shifted);
      EXPECT_LT(svd.singularValues().minCoeff(), 1e-9 * std::max(1.0, spectral_norm(tj)));
      total += p.algebraic_multiplicity;
    }
    EXPECT_EQ(total, ps.total_multiplicity());
    EXPECT_LE(total, rc.rank);
  }
}

TEST(RealResonancePoints, Examples) {
  const auto scalar = real_resonance_points(scalar_model(), 0.5, -2.0, 2.0);
  ASSERT_EQ(scalar.size(), 1u);
  EXPECT_NEAR(scalar[0], 0.5, 1e-14);
  const auto d2 = real_resonance_points(diag2_model(), 1.0, 0.0, 2.0);
  ASSERT_EQ(d2.size(), 1u);
  EXPECT_NEAR(d2[0], 1.0, 1e-14);
  EXPECT_TRUE(real_resonance_points(diag2_model(), 10.0, -2.0, 2.0).empty());
}

TEST(RealResonancePoints, RebasesWhenBaseIsResonant) {
  const auto pts = real_resonance_points(diag2_model(), 0.0, -2.0, 2.0);
  ASSERT_EQ(pts.size(), 1u);
  EXPECT_NEAR(pts[0], 0.0, 1e-12);
}

TEST(RealResonancePoints, MatchEigenvalueCrossings) {
  for (const auto& rc : resonant_cases(32, 10)) {
    for (double r0 : real_resonance_points(rc.model, rc.lambda, rc.a, rc.b))
      EXPECT_LT(distance_to_spectrum(path_at(rc.model, r0), rc.lambda), 1e-8);
  }
}

TEST(GroupAndClassify, ScalarSingleUpPole) {
  const PoleGroup g = group_and_classify(scalar_model(), 0.5, 0.5, 1e-3);
  ASSERT_EQ(g.ups.size(), 1u);
  EXPECT_TRUE(g.downs.empty());
  EXPECT_LT(std::abs(g.ups[0].location - cplx(0.5, 1e-3)), 1e-14);
}

TEST(GroupAndClassify, DoubleModelTwoUpPoles) {
  for (double y : {1e-2, 5e-3, 2.5e-3}) {
    const PoleGroup g = group_and_classify(double_model(), 1.0, 1.0, y);
    EXPECT_EQ(g.n_plus(), 2);
    EXPECT_EQ(g.n_minus(), 0);
  }
}

TEST(GroupAndClassify, MultiplicityConservedAcrossY) {
  for (const auto& rc : resonant_cases(33, 10)) {
    for (const auto& p : resonance_points(rc.model, rc.lambda, rc.a, rc.b)) {
      const double c = regular_base_shift(rc.model, rc.lambda);
      const FramedModel base = c == 0.0 ? rc.model : rc.model.rebased(c);
      const ResonanceIndexResult idx = resonance_index(rc.model, rc.lambda, p.r0);
      for (int k = 0; k < 4; ++k) {
        const PoleGroup g = group_and_classify(base, rc.lambda, p.r0 - c, std::ldexp(idx.y_used, -k));
        EXPECT_EQ(g.n_plus() + g.n_minus(), p.multiplicity);
        EXPECT_EQ(g.n_plus(), idx.n_plus);
      }
    }
  }
}

TEST(GroupAndClassify, RejectsNonResonantPoint) {
  EXPECT_THROW(group_and_classify(scalar_model(), 0.5, 0.7, 1e-3), Error);
}

TEST(ResonanceIndex, PositiveRankOneIsPlusOne) {
  Rng rng(34);
  for (int i = 0; i < 10; ++i) {
    const int n = rng.integer(3, 8);
    CVector v(n);
    for (int k = 0; k < n; ++k) v(k) = rng.complex_normal();
    const FramedModel m(HermitianMatrix(random_hermitian(rng, n)), Frame(v.adjoint()), Direction{diag({1.0})});
    const RVector ev = m.h0().eigenvalues();
    const double lambda = 0.5 * (ev(0) + ev(1));
    for (const auto& p : real_poles(m, lambda)) {
      EXPECT_EQ(resonance_index(m, lambda, p.r0).index, 1);
      EXPECT_EQ(resonance_index(m.reversed(), lambda, -p.r0).index, -1);
    }
  }
}

TEST(ResonanceIndex, DiagonalMatchesFlow) {
  const ResonanceIndexResult r = resonance_index(diag2_model(), 1.0, 1.0);
  EXPECT_EQ(r.index, 1);
  EXPECT_EQ(r.n_plus, 1);
  EXPECT_EQ(r.n_minus, 0);
  EXPECT_EQ(r.index, oracles::spectral_flow(diag2_model(), 1.0, 0.0, 2.0).net_flow);
  EXPECT_LT(std::abs(two_pi_i * r.residue_check - cplx(r.index)), 1e-8);
}

TEST(ResonanceIndex, ResultInvariants) {
  for (const auto& rc : resonant_cases(35, 15)) {
    for (const auto& p : resonance_points(rc.model, rc.lambda, rc.a, rc.b)) {
      const ResonanceIndexResult r = resonance_index(rc.model, rc.lambda, p.r0);
      EXPECT_EQ(r.index, r.n_plus - r.n_minus);
      EXPECT_EQ(r.n_plus + r.n_minus, r.multiplicity);
      EXPECT_GT(r.y_used, 0.0);
      EXPECT_LT(std::abs(two_pi_i * r.residue_check - cplx(r.index)), 1e-6);
    }
  }
}

TEST(ResonanceIndex, Antisymmetric) {
  for (const auto& rc : resonant_cases(36, 15)) {
    for (double r0 : real_resonance_points(rc.model, rc.lambda, rc.a, rc.b))
      EXPECT_EQ(resonance_index(rc.model, rc.lambda, r0).index,
                -resonance_index(rc.model.reversed(), rc.lambda, -r0).index);
  }
}

TEST(ResonanceIndex, IndependentOfBasePoint) {
  for (const auto& rc : resonant_cases(37, 10)) {
    for (double r0 : real_resonance_points(rc.model, rc.lambda, rc.a, rc.b)) {
      const ResonanceIndexResult base = resonance_index(rc.model, rc.lambda, r0);
      for (double shift : {0.37 * (rc.b - rc.a), -0.21 * (rc.b - rc.a)}) {
        if (!is_regular_point(rc.model, shift, rc.lambda)) continue;
        const ResonanceIndexResult moved = resonance_index(rc.model.rebased(shift), rc.lambda, r0 - shift);
        EXPECT_EQ(moved.n_plus, base.n_plus);
        EXPECT_EQ(moved.n_minus, base.n_minus);
      }
    }
  }
}

TEST(EigenvectorInvariance, RelationHoldsAtOtherCouplings) {
  Rng rng(38);
  for (int i = 0; i < 10; ++i) {
    const RandomCase rc = random_case(rng);
    const SpectralParameter z(rc.lambda, 0.1);
    const double r = rng.uniform(-1, 1);
    const CMatrix ar = a_matrix(rc.model, r, z).entries;
    Eigen::ComplexEigenSolver<CMatrix> es(ar);
    for (Eigen::Index j = 0; j < ar.rows(); ++j) {
      const cplx mu = es.eigenvalues()(j);
      if (std::abs(mu) < 1e-8) continue;
      const CVector psi = es.eigenvectors().col(j);
      const cplx alpha = 1.0 / mu - r;
      for (int t = 0; t < 5; ++t) {
        const double s = rng.uniform(-3, 3);
        const CVector lhs = a_matrix(rc.model, s, z).entries * psi;
        EXPECT_LT((lhs - psi / (s + alpha)).norm(), 1e-8 * std::max(1.0, std::abs(1.0 / (s + alpha))));
      }
    }
  }
}

TEST(RieszProjector, ScalarIsOne) {
  const CMatrix p = riesz_projector(scalar_model(), 0.5, SpectralParameter(0.5, 0.0), 0.3);
  EXPECT_LT(std::abs(p(0, 0) - 1.0), 1e-10);
}

TEST(RieszProjector, IndependentOfRegularisingOffset) {
  for (const auto& rc : resonant_cases(39, 10)) {
    for (const auto& pt : resonance_points(rc.model, rc.lambda, rc.a, rc.b)) {
      const SpectralParameter z(rc.lambda, 0.0);
      const double unit = 0.05 * (rc.b - rc.a);
      const CMatrix p1 = riesz_projector(rc.model, pt.r0, z, unit);
      const CMatrix p2 = riesz_projector(rc.model, pt.r0, z, -1.7 * unit);
      EXPECT_LT((p1 - p2).norm(), 1e-8);
      EXPECT_LT((p1 * p1 - p1).norm(), 1e-8);
      EXPECT_NEAR(p1.trace().real(), pt.multiplicity, 1e-8);
    }
  }
}

TEST(RieszProjector, CollisionDetected) {
  const double s = 0.3;
  // Eigenvalue 1/s sits at distance 0 from the centre; a radius hitting another eigenvalue must throw.
  const FramedModel m = FramedModel::with_identity_frame(diag({0.0, 1.0}), diag({1.0, 1.0}));
  const CMatrix a = a_matrix(m, 0.5 + s, SpectralParameter(0.5, 0.0)).entries;
  const auto ev = eigenvalues(a);
  double other = INFINITY;
  for (cplx mu : ev)
    if (std::abs(mu - 1.0 / s) > 1e-6) other = std::min(other, std::abs(mu - 1.0 / s));
  EXPECT_THROW(riesz_projector(m, 0.5, SpectralParameter(0.5, 0.0), s, other), Error);
}

TEST(RootSpace, Examples) {
  const RootSpace scalar = root_space(scalar_model(), 0.5, 0.5, 0.3);
  EXPECT_EQ(scalar.dimension, 1);
  ASSERT_EQ(scalar.basis.size(), 1u);
  EXPECT_NEAR(std::abs(scalar.basis[0](0)), 1.0, 1e-10);
  EXPECT_EQ(root_space(double_model(), 1.0, 1.0, 0.4).dimension, 2);
}

TEST(RootSpace, VectorsInvariantUnderRegularisingOffset) {
  for (const auto& rc : resonant_cases(40, 10)) {
    for (double r0 : real_resonance_points(rc.model, rc.lambda, rc.a, rc.b)) {
      const double unit = 0.05 * (rc.b - rc.a);
      const RootSpace rs = root_space(rc.model, rc.lambda, r0, unit);
      for (double t : {-1.3, 0.6, 2.1}) {
        const double s2 = t * unit;
        const CMatrix a = a_matrix(rc.model, r0 + s2, SpectralParameter(rc.lambda, 0.0)).entries;
        const CMatrix step = CMatrix::Identity(a.rows(), a.cols()) - s2 * a;
        CMatrix power = CMatrix::Identity(a.rows(), a.cols());
        for (int k = 0; k < rs.dimension; ++k) power = step * power;
        for (const CVector& psi : rs.basis) EXPECT_LT((power * psi).norm(), 1e-7);
        EXPECT_EQ(root_space(rc.model, rc.lambda, r0, s2).dimension, rs.dimension);
      }
    }
  }
}
