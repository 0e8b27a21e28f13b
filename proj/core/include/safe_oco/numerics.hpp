#pragma once

// Constraint-estimation memory: regularized Gram matrix, least-squares
// estimate of the unknown constraint matrix and the confidence radius.

#include <cstdint>

#include "safe_oco/linalg.hpp"

namespace safe_oco {

/// Eigenvalues below this floor make an inversion fail with NumericalError.
inline constexpr double kEigenFloor = 1e-12;

/// Running V = lambda I + sum x x^T and S = sum y x^T.
struct GramState {
  Mat V;               // d x d, symmetric positive definite
  Mat S;               // n x d
  double logdet_V = 0.0;
  std::int64_t t = 1;  // next round index
  double lambda = 1.0;

  int dim() const { return static_cast<int>(V.rows()); }
  int rows() const { return static_cast<int>(S.rows()); }
};

/// Constants entering the confidence radius beta_t.
struct ConfidenceParams {
  double rho = 0.0;      // subgaussian noise scale
  int d = 1;
  int n = 1;
  double delta = 0.01;   // failure probability, in (0, 1/2]
  double S_bound = 1.0;  // bound on constraint-row norms
  double D = 1.0;        // action-set diameter
  double lambda = 1.0;

  /// lambda = max(1, D^2), the high-probability configuration.
  static ConfidenceParams standard(double rho, int d, int n, double delta,
                                   double S_bound, double D);
  void validate() const;
};

GramState init_gram(int d, int n, double lambda);

/// V += x x^T, S += y x^T, t += 1; logdet recomputed from a Cholesky factor.
GramState rank1_update(const GramState& state, const Vec& x, const Vec& y);
/// In-place variant used on the hot path.
void rank1_update_inplace(GramState& state, const Vec& x, const Vec& y);

/// A_hat = S V^{-1}.
Mat rls_estimate(const GramState& state);

/// beta_t = rho sqrt(d ln((1 + (t-1) D^2 / lambda) n / delta)) + sqrt(lambda) S.
double compute_beta(const ConfidenceParams& params, std::int64_t t);

/// True iff ||a_i - a_hat_i||_{V_bar} <= beta for every row i.
bool confidence_contains(const Mat& V_bar, const Mat& A_hat, double beta,
                         const Mat& A_true);

/// log det of a symmetric positive definite matrix via Cholesky.
double log_det_spd(const Mat& M);

/// Inverse and inverse square root of an SPD matrix via eigendecomposition.
struct SpdInverse {
  Mat inv;
  Mat inv_sqrt;
};
SpdInverse spd_inverse_and_sqrt(const Mat& M);

/// ||x||_M = sqrt(x^T M x) for positive semidefinite M.
double weighted_norm(const Vec& x, const Mat& M);

}  // namespace safe_oco
