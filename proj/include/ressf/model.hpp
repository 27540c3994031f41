#pragma once

#include "ressf/errors.hpp"
#include "ressf/linalg.hpp"

#include <limits>
#include <string>

namespace ressf {

inline constexpr double hermitian_tol = 1e-12;

/// Square complex matrix equal to its adjoint. Construction validates the entries
/// against `hermitian_tol` and stores the symmetrised (A + A*)/2.
class HermitianMatrix {
 public:
  HermitianMatrix() = default;

  explicit HermitianMatrix(const CMatrix& entries, std::string_view name = "matrix") {
    if (entries.rows() == 0 || entries.rows() != entries.cols())
      throw Error(ErrorCode::DimensionMismatch, std::string(name) + " must be square and non-empty");
    if (!entries.allFinite()) throw Error(ErrorCode::InvalidInput, std::string(name) + " has non-finite entries");
    const double defect = max_hermitian_defect(entries);
    if (defect > hermitian_tol)
      throw Error(ErrorCode::InvalidInput,
                  std::string(name) + " is not Hermitian (max |a_ij - conj(a_ji)| = " + std::to_string(defect) + ")");
    m_ = symmetrized(entries);
  }

  static HermitianMatrix diagonal(const RVector& d) {
    return HermitianMatrix(d.cast<cplx>().asDiagonal().toDenseMatrix());
  }

  Eigen::Index dim() const { return m_.rows(); }
  const CMatrix& matrix() const { return m_; }
  RVector eigenvalues() const { return hermitian_eigenvalues(m_); }

  HermitianMatrix operator+(const HermitianMatrix& o) const { return from_trusted(m_ + o.m_); }
  HermitianMatrix operator-(const HermitianMatrix& o) const { return from_trusted(m_ - o.m_); }
  HermitianMatrix operator-() const { return from_trusted(-m_); }
  friend HermitianMatrix operator*(double r, const HermitianMatrix& h) { return from_trusted(r * h.m_); }

 private:
  static HermitianMatrix from_trusted(CMatrix m) {
    HermitianMatrix h;
    h.m_ = symmetrized(m);
    return h;
  }

  CMatrix m_;
};

/// Injective map from the state space into the auxiliary space, stored as a
/// rows x cols matrix of full rank.
class Frame {
 public:
  Frame() = default;

  explicit Frame(const CMatrix& entries) : f_(entries) {
    if (entries.size() == 0) throw Error(ErrorCode::DimensionMismatch, "frame must be non-empty");
    if (!entries.allFinite()) throw Error(ErrorCode::InvalidInput, "frame has non-finite entries");
    Eigen::JacobiSVD<CMatrix> svd(entries);
    sv_ = svd.singularValues();  // non-increasing
    if (!(sv_(sv_.size() - 1) > 1e-12 * sv_(0)))
      throw Error(ErrorCode::InvalidInput, "frame is rank deficient (a singular value vanishes)");
  }

  static Frame identity(Eigen::Index n) { return Frame(CMatrix::Identity(n, n)); }

  Eigen::Index rows() const { return f_.rows(); }
  Eigen::Index cols() const { return f_.cols(); }
  const CMatrix& matrix() const { return f_; }
  const RVector& singular_values() const { return sv_; }

 private:
  CMatrix f_;
  RVector sv_;
};

/// Self-adjoint J on the auxiliary space; V = F* J F.
struct Direction {
  HermitianMatrix j;
};

/// z = lambda + i*y with y >= 0 (y = 0 is the boundary value lambda + i0).
struct SpectralParameter {
  double lambda = 0.0;
  double y = 0.0;

  SpectralParameter() = default;
  SpectralParameter(double lambda_, double y_) : lambda(lambda_), y(y_) {
    if (!(y_ >= 0.0)) throw Error(ErrorCode::InvalidInput, "spectral parameter needs y >= 0");
  }

  cplx z() const { return {lambda, y}; }
  cplx z_bar() const { return {lambda, -y}; }
};

inline HermitianMatrix build_perturbation(const Frame& f, const Direction& dir) {
  if (dir.j.dim() != f.rows())
    throw Error(ErrorCode::DimensionMismatch, "J is " + std::to_string(dir.j.dim()) + "x" +
                                                  std::to_string(dir.j.dim()) + " but the frame has " +
                                                  std::to_string(f.rows()) + " rows");
  const CMatrix v = f.matrix().adjoint() * dir.j.matrix() * f.matrix();
  return HermitianMatrix(symmetrized(v), "V");
}

/// H0 together with the frame and direction generating the path H_r = H0 + r V.
class FramedModel {
 public:
  FramedModel(HermitianMatrix h0, Frame frame, Direction dir)
      : h0_(std::move(h0)), frame_(std::move(frame)), dir_(std::move(dir)) {
    if (frame_.cols() != h0_.dim())
      throw Error(ErrorCode::DimensionMismatch, "frame has " + std::to_string(frame_.cols()) +
                                                    " columns but H0 is " + std::to_string(h0_.dim()) + "-dimensional");
    v_ = build_perturbation(frame_, dir_);
  }

  static FramedModel with_identity_frame(const HermitianMatrix& h0, const HermitianMatrix& j) {
    return FramedModel(h0, Frame::identity(h0.dim()), Direction{j});
  }

  const HermitianMatrix& h0() const { return h0_; }
  const Frame& frame() const { return frame_; }
  const HermitianMatrix& j() const { return dir_.j; }
  const HermitianMatrix& v() const { return v_; }
  Eigen::Index dim() const { return h0_.dim(); }
  Eigen::Index aux_dim() const { return frame_.rows(); }

  /// Same line, base point moved to H_s.
  FramedModel rebased(double s) const { return FramedModel(h0_ + s * v_, frame_, dir_); }

  /// Same base point, direction -V.
  FramedModel reversed() const { return FramedModel(h0_, frame_, Direction{-dir_.j}); }

 private:
  HermitianMatrix h0_;
  Frame frame_;
  Direction dir_;
  HermitianMatrix v_;
};

inline HermitianMatrix path_at(const FramedModel& m, double r) { return m.h0() + r * m.v(); }

struct SignatureResult {
  int value = 0;
  int n_positive = 0;
  int n_negative = 0;
  /// Some eigenvalue sits inside [-tol, tol] yet is larger than round-off.
  bool near_zero_warning = false;
};

inline SignatureResult signature(const HermitianMatrix& v, double tol = 1e-10) {
  if (!(tol > 0.0)) throw Error(ErrorCode::InvalidInput, "signature tolerance must be positive");
  const RVector ev = v.eigenvalues();
  const double noise = 100.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, ev.cwiseAbs().maxCoeff()) *
                       static_cast<double>(ev.size());
  SignatureResult out;
  for (double e : ev) {
    if (e > tol) ++out.n_positive;
    else if (e < -tol) ++out.n_negative;
    else if (std::abs(e) > noise) out.near_zero_warning = true;
  }
  out.value = out.n_positive - out.n_negative;
  return out;
}

/// Scale-aware default for the distance below which lambda counts as an eigenvalue.
inline double default_gap_tol(const HermitianMatrix& h) {
  const RVector ev = h.eigenvalues();
  const double diameter = ev.maxCoeff() - ev.minCoeff();
  return 1e-8 * std::max(diameter, 1.0);
}

inline double distance_to_spectrum(const HermitianMatrix& h, double lambda) {
  return (h.eigenvalues().array() - lambda).abs().minCoeff();
}

inline bool is_regular_point(const FramedModel& m, double r, double lambda, double gap_tol) {
  if (!(gap_tol > 0.0)) throw Error(ErrorCode::InvalidInput, "gap_tol must be positive");
  return distance_to_spectrum(path_at(m, r), lambda) > gap_tol;
}

inline bool is_regular_point(const FramedModel& m, double r, double lambda) {
  const HermitianMatrix h = path_at(m, r);
  return distance_to_spectrum(h, lambda) > default_gap_tol(h);
}

}  // namespace ressf
