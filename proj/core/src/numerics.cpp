#include "safe_oco/numerics.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "safe_oco/errors.hpp"

namespace safe_oco {

ConfidenceParams ConfidenceParams::standard(double rho, int d, int n,
                                            double delta, double S_bound,
                                            double D) {
  ConfidenceParams p;
  p.rho = rho;
  p.d = d;
  p.n = n;
  p.delta = delta;
  p.S_bound = S_bound;
  p.D = D;
  p.lambda = std::max(1.0, D * D);
  p.validate();
  return p;
}

void ConfidenceParams::validate() const {
  if (d < 1 || n < 1) throw InvalidArgument("confidence params: d, n must be >= 1");
  // 1/2 itself is admitted: the expectation-mode choice min(1/2, .) can hit it.
  if (!(delta > 0.0 && delta <= 0.5))
    throw InvalidArgument("confidence params: delta must lie in (0, 1/2]");
  if (!(rho >= 0.0)) throw InvalidArgument("confidence params: rho must be >= 0");
  if (!(S_bound > 0.0)) throw InvalidArgument("confidence params: S must be > 0");
  if (!(D > 0.0)) throw InvalidArgument("confidence params: D must be > 0");
  if (!(lambda > 0.0)) throw InvalidArgument("confidence params: lambda must be > 0");
}

GramState init_gram(int d, int n, double lambda) {
  if (d < 1 || n < 1) throw InvalidArgument("init_gram: d and n must be >= 1");
  if (!(lambda > 0.0)) throw InvalidArgument("init_gram: lambda must be > 0");
  GramState g;
  g.V = lambda * Mat::Identity(d, d);
  g.S = Mat::Zero(n, d);
  g.logdet_V = d * std::log(lambda);
  g.t = 1;
  g.lambda = lambda;
  return g;
}

double log_det_spd(const Mat& M) {
  Eigen::LLT<Mat> llt(M);
  if (llt.info() != Eigen::Success)
    throw NumericalError("log_det_spd: Cholesky factorization failed");
  const Vec diag = llt.matrixLLT().diagonal();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < diag.size(); ++i) {
    if (!(diag(i) > 0.0)) throw NumericalError("log_det_spd: nonpositive pivot");
    acc += 2.0 * std::log(diag(i));
  }
  return acc;
}

void rank1_update_inplace(GramState& state, const Vec& x, const Vec& y) {
  if (x.size() != state.dim() || y.size() != state.rows()) {
    std::ostringstream os;
    os << "rank1_update: expected x in R^" << state.dim() << ", y in R^"
       << state.rows() << ", got " << x.size() << ", " << y.size();
    throw InvalidArgument(os.str());
  }
  state.V.noalias() += x * x.transpose();
  state.S.noalias() += y * x.transpose();
  state.logdet_V = log_det_spd(state.V);
  ++state.t;
}

GramState rank1_update(const GramState& state, const Vec& x, const Vec& y) {
  GramState next = state;
  rank1_update_inplace(next, x, y);
  return next;
}

Mat rls_estimate(const GramState& state) {
  Eigen::LLT<Mat> llt(state.V);
  if (llt.info() != Eigen::Success)
    throw NumericalError("rls_estimate: Gram matrix is not positive definite");
  // A_hat = S V^{-1}  <=>  V A_hat^T = S^T (V symmetric).
  Mat A_hat = llt.solve(state.S.transpose()).transpose();
  if (!A_hat.allFinite()) throw NumericalError("rls_estimate: non-finite estimate");
  return A_hat;
}

double compute_beta(const ConfidenceParams& params, std::int64_t t) {
  if (t < 1) throw InvalidArgument("compute_beta: t must be >= 1");
  const double growth =
      1.0 + static_cast<double>(t - 1) * params.D * params.D / params.lambda;
  const double log_term = std::log(growth * params.n / params.delta);
  return params.rho * std::sqrt(params.d * log_term) +
         std::sqrt(params.lambda) * params.S_bound;
}

double weighted_norm(const Vec& x, const Mat& M) {
  const double q = x.dot(M * x);
  return std::sqrt(std::max(0.0, q));
}

bool confidence_contains(const Mat& V_bar, const Mat& A_hat, double beta,
                         const Mat& A_true) {
  if (A_hat.rows() != A_true.rows() || A_hat.cols() != A_true.cols() ||
      V_bar.rows() != A_hat.cols() || V_bar.cols() != A_hat.cols())
    throw InvalidArgument("confidence_contains: dimension mismatch");
  for (Eigen::Index i = 0; i < A_hat.rows(); ++i) {
    const Vec diff = (A_true.row(i) - A_hat.row(i)).transpose();
    if (weighted_norm(diff, V_bar) > beta) return false;
  }
  return true;
}

SpdInverse spd_inverse_and_sqrt(const Mat& M) {
  Eigen::SelfAdjointEigenSolver<Mat> es(M);
  if (es.info() != Eigen::Success)
    throw NumericalError("spd_inverse_and_sqrt: eigendecomposition failed");
  const Vec& w = es.eigenvalues();
  if (w.minCoeff() < kEigenFloor) {
    std::ostringstream os;
    os << "spd_inverse_and_sqrt: smallest eigenvalue " << w.minCoeff()
       << " below floor " << kEigenFloor;
    throw NumericalError(os.str());
  }
  const Mat& Q = es.eigenvectors();
  SpdInverse out;
  out.inv = Q * w.cwiseInverse().asDiagonal() * Q.transpose();
  out.inv_sqrt = Q * w.cwiseSqrt().cwiseInverse().asDiagonal() * Q.transpose();
  // Symmetrize away rounding asymmetry.
  out.inv = 0.5 * (out.inv + out.inv.transpose());
  out.inv_sqrt = 0.5 * (out.inv_sqrt + out.inv_sqrt.transpose());
  return out;
}

}  // namespace safe_oco
