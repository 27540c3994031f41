#include "helpers.hpp"

#include <gtest/gtest.h>

using namespace ressf;
using namespace testing_support;

namespace {

FramedModel random_model(Rng& rng, int n, int k) {
  const HermitianMatrix h0(random_hermitian(rng, n));
  return FramedModel(h0, random_frame(rng, k, n), Direction{random_direction(rng, k)});
}

}  // namespace

TEST(Resolvent, ScalarAtI) {
  const CMatrix r = resolvent(diag({0.0}), SpectralParameter(0.0, 1.0));
  EXPECT_LT(std::abs(r(0, 0) - cplx(0.0, 1.0)), 1e-15);
}

TEST(Resolvent, DiagonalRealPoint) {
  const CMatrix r = resolvent(diag({0.0, 2.0}), SpectralParameter(1.0, 0.0));
  EXPECT_LT((r - diag({-1.0, 1.0}).matrix()).norm(), 1e-15);
}

TEST(Resolvent, ResidualOnRandomMatrices) {
  Rng rng(21);
  for (int i = 0; i < 20; ++i) {
    const int n = rng.integer(2, 12);
    const HermitianMatrix h(random_hermitian(rng, n));
    const SpectralParameter z(rng.uniform(-3, 3), rng.uniform(1e-3, 1.0));
    const CMatrix shifted = h.matrix() - z.z() * CMatrix::Identity(n, n);
    EXPECT_LT((shifted * resolvent(h, z) - CMatrix::Identity(n, n)).norm(), 1e-10);
  }
}

TEST(Resolvent, SingularOnSpectrum) {
  try {
    resolvent(diag({0.0, 2.0}), SpectralParameter(2.0, 0.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SingularResolvent);
  }
}

TEST(TransferMatrix, IdentityFrameIsResolvent) {
  const FramedModel m = diag2_model();
  const SpectralParameter z(0.5, 0.2);
  EXPECT_LT((transfer_matrix(m, 0.3, z).entries - resolvent(path_at(m, 0.3), z)).norm(), 1e-14);
}

TEST(TransferMatrix, ScalarIsMinusInverseZ) {
  const SpectralParameter z(0.4, 0.3);
  EXPECT_LT(std::abs(transfer_matrix(scalar_model(), 0.0, z).entries(0, 0) + 1.0 / z.z()), 1e-15);
}

TEST(TransferMatrix, ImaginaryPartPositiveInUpperHalfPlane) {
  Rng rng(22);
  for (int i = 0; i < 20; ++i) {
    const FramedModel m = random_model(rng, rng.integer(3, 10), rng.integer(1, 3));
    const SpectralParameter z(rng.uniform(-2, 2), rng.uniform(1e-3, 1.0));
    const CMatrix t = transfer_matrix(m, rng.uniform(-1, 1), z).entries;
    const CMatrix im = (t - t.adjoint()) / cplx(0.0, 2.0);
    EXPECT_GE(hermitian_eigenvalues(symmetrized(im)).minCoeff(), -1e-12);
  }
}

TEST(AMatrix, BaseIsTransferTimesJ) {
  Rng rng(23);
  const FramedModel m = random_model(rng, 6, 2);
  const SpectralParameter z(0.1, 0.2);
  const CMatrix expected = transfer_matrix(m, 0.0, z).entries * m.j().matrix();
  EXPECT_LT((a_matrix(m, 0.0, z).entries - expected).norm(), 1e-14);
}

TEST(AMatrix, ZeroDirection) {
  const FramedModel m = FramedModel::with_identity_frame(diag({0.0, 1.0}), diag({0.0, 0.0}));
  EXPECT_EQ(a_matrix(m, 0.0, SpectralParameter(0.5, 0.1)).entries.norm(), 0.0);
}

TEST(AMatrix, SecondResolventConsistency) {
  Rng rng(24);
  for (int i = 0; i < 20; ++i) {
    const FramedModel m = random_model(rng, rng.integer(3, 10), rng.integer(1, 3));
    const SpectralParameter z(rng.uniform(-1, 1), 0.1);
    const double r = i == 0 ? 0.3 : rng.uniform(-2, 2), s = i == 0 ? 0.7 : rng.uniform(-2, 2);
    const CMatrix ar = a_matrix(m, r, z).entries;
    const Eigen::Index k = ar.rows();
    const CMatrix predicted = (CMatrix::Identity(k, k) + (s - r) * ar).partialPivLu().solve(ar);
    EXPECT_LT((a_matrix(m, s, z).entries - predicted).norm(), 1e-9);
  }
}

TEST(FTrace, ScalarPoissonKernel) {
  const FramedModel m = scalar_model();
  const SpectralParameter z(0.4, 0.05);
  for (double s : {-1.0, 0.0, 0.2, 0.4, 0.9, 3.0}) {
    const double poisson = z.y / (pi * ((s - z.lambda) * (s - z.lambda) + z.y * z.y));
    for (auto method : {TraceMethod::Direct, TraceMethod::Meromorphic, TraceMethod::MeromorphicInverse})
      EXPECT_NEAR(f_trace(m, s, z, method).real(), poisson, 1e-12 * std::max(1.0, poisson));
  }
  EXPECT_NEAR(f_trace(m, z.lambda, z).real(), 1.0 / (pi * z.y), 1e-10);
}

TEST(FTrace, DirectMatchesMeromorphicOnRandomModels) {
  Rng rng(25);
  for (int i = 0; i < 5; ++i) {
    const FramedModel m = random_model(rng, 6, rng.integer(1, 3));
    const SpectralParameter z(rng.uniform(-1, 1), 0.05);
    for (int k = 0; k < 20; ++k) {
      const double s = rng.uniform(-3, 3);
      const cplx direct = f_trace(m, s, z, TraceMethod::Direct);
      EXPECT_LT(std::abs(direct - f_trace(m, s, z, TraceMethod::Meromorphic)), 1e-9);
      EXPECT_LT(std::abs(direct - f_trace(m, s, z, TraceMethod::MeromorphicInverse)), 1e-9);
    }
  }
}

TEST(FTrace, ConjugateSymmetryAndRealOnAxis) {
  Rng rng(26);
  for (int i = 0; i < 10; ++i) {
    const FramedModel m = random_model(rng, rng.integer(3, 8), rng.integer(1, 3));
    const SpectralParameter z(rng.uniform(-1, 1), 0.1);
    const cplx s(rng.uniform(-2, 2), rng.uniform(-2, 2));
    EXPECT_LT(std::abs(f_trace(m, std::conj(s), z) - std::conj(f_trace(m, s, z))), 1e-10);
    EXPECT_LT(std::abs(f_trace(m, s.real(), z).imag()), 1e-12);
  }
}

TEST(FTrace, DirectNeedsRealCoupling) {
  EXPECT_THROW(f_trace(scalar_model(), cplx(0.0, 1.0), SpectralParameter(0.0, 0.1), TraceMethod::Direct), Error);
}

TEST(FTrace, PoleEvaluationCarriesLocation) {
  const SpectralParameter z(0.5, 0.1);
  try {
    f_trace(scalar_model(), z.z(), z);
    FAIL();
  } catch (const PoleEvaluationError& e) {
    EXPECT_LT(std::abs(e.nearest_pole() - z.z()), 1e-12);
  }
}

TEST(FTrace, NoRealPolesForPositiveY) {
  Rng rng(27);
  for (int i = 0; i < 10; ++i) {
    const FramedModel m = random_model(rng, rng.integer(3, 8), rng.integer(1, 3));
    const TraceFunction tf = trace_function(m, SpectralParameter(rng.uniform(-1, 1), 0.01));
    for (cplx p : tf.poles()) EXPECT_GT(std::abs(p.imag()), 0.0);
  }
}

TEST(PoleSum, ScalarClosedForm) {
  const SpectralParameter z(0.3, 0.2);
  const cplx s1 = z.z();
  for (cplx s : {cplx(1.0, 0.5), cplx(-2.0, 0.0), cplx(0.1, -3.0)}) {
    const cplx closed = s * cplx(0.0, 2.0 * z.y) / ((s - s1) * (s - std::conj(s1)));
    EXPECT_LT(std::abs(pole_sum_trace(scalar_model(), s, z) - closed), 1e-14);
    EXPECT_LT(std::abs(closed - two_pi_i * s * f_trace(scalar_model(), s, z)), 1e-12);
  }
}

TEST(PoleSum, ZeroDirection) {
  const FramedModel m = FramedModel::with_identity_frame(diag({0.0, 1.0}), diag({0.0, 0.0}));
  EXPECT_EQ(pole_sum_trace(m, cplx(1.0, 1.0), SpectralParameter(0.5, 0.1)), cplx(0.0));
}

TEST(PoleSum, DecayBound) {
  Rng rng(28);
  for (int i = 0; i < 10; ++i) {
    const FramedModel m = random_model(rng, rng.integer(3, 8), rng.integer(1, 3));
    const SpectralParameter z(rng.uniform(-1, 1), 0.1);
    const TraceFunction tf = trace_function(m, z);
    double rho = 0.0;
    for (cplx p : tf.eigen_poles()) rho = std::max(rho, std::abs(p));
    const cplx s = std::polar(10.0 * rho, rng.uniform(0, 2 * pi));
    double bound = 0.0;
    for (cplx p : tf.eigen_poles()) bound += 2.0 * std::abs(p.imag()) * std::abs(s) / std::pow(std::abs(s) - std::abs(p), 2);
    EXPECT_LE(std::abs(pole_sum_trace(m, s, z)), bound * (1.0 + 1e-12));
  }
}
