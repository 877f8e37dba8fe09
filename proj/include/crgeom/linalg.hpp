#pragma once

// Small dense complex linear algebra on top of Eigen, with the conditioning
// guards used throughout: systems worse than kSingularCond are rejected, and
// systems worse than kLeastSquaresCond are solved in the least-squares sense.

#include <Eigen/Dense>
#include <complex>
#include <string>

#include "crgeom/error.hpp"

namespace crgeom {

using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;

inline constexpr double kLeastSquaresCond = 1e10;
inline constexpr double kSingularCond = 1e12;

inline double condition_number(const CMat& a) {
  Eigen::JacobiSVD<CMat> svd(a);
  const auto& s = svd.singularValues();
  if (s.size() == 0) return 1.0;
  const double smin = s(s.size() - 1);
  return smin == 0.0 ? std::numeric_limits<double>::infinity() : s(0) / smin;
}

/// Solves a x = b with a pivoted LU; falls back to an SVD least-squares solve for
/// poorly conditioned systems and throws SingularSystem past kSingularCond.
inline CVec guarded_solve(const CMat& a, const CVec& b, const std::string& what) {
  const double cond = condition_number(a);
  if (!(cond <= kSingularCond))
    throw Error(ErrorKind::SingularSystem, what + " (condition number " + std::to_string(cond) + ")");
  if (cond > kLeastSquaresCond) return a.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(b);
  return a.fullPivLu().solve(b);
}

inline CMat guarded_inverse(const CMat& a, const std::string& what) {
  const double cond = condition_number(a);
  if (!(cond <= kSingularCond))
    throw Error(ErrorKind::SingularSystem, what + " (condition number " + std::to_string(cond) + ")");
  return a.fullPivLu().inverse();
}

/// Eigenvalues (ascending) of the Hermitian part of `a`.
inline RVec hermitian_eigenvalues(const CMat& a) {
  const CMat sym = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<CMat> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

/// Matrix G with G h G^* = I for Hermitian positive-definite h (G = L^{-1}, h = L L^*).
inline CMat unitarizer(const CMat& h) {
  Eigen::LLT<CMat> llt(0.5 * (h + h.adjoint()));
  if (llt.info() != Eigen::Success) throw Error(ErrorKind::NotStrictlyPseudoconvex, "Levi matrix is not positive definite");
  const CMat l = llt.matrixL();
  return l.triangularView<Eigen::Lower>().solve(CMat::Identity(h.rows(), h.cols()));
}

/// Eigenvalues of the Hermitian form `a` relative to the positive form `h`.
inline RVec relative_eigenvalues(const CMat& a, const CMat& h) {
  const CMat g = unitarizer(h);
  return hermitian_eigenvalues(g * a * g.adjoint());
}

inline double max_abs(const CMat& a) { return a.size() ? a.cwiseAbs().maxCoeff() : 0.0; }

inline double hermitian_defect(const CMat& a) { return max_abs(a - a.adjoint()); }

}  // namespace crgeom
