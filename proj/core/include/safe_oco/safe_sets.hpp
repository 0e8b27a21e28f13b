#pragma once

// Optimistic / pessimistic action sets built from a frozen constraint
// estimate, the closed-form safe scaling, and the relaxed optimistic family
// (a union of 2d convex pieces).

#include <vector>

#include "safe_oco/action_set.hpp"
#include "safe_oco/linalg.hpp"
#include "safe_oco/projection.hpp"

namespace safe_oco {

/// Frozen per-phase snapshot defining both confidence-derived sets.
struct SafeSetSpec {
  Mat A_hat;           // n x d
  double beta_bar = 0.0;
  Mat V_bar_inv;       // d x d
  Mat V_bar_inv_sqrt;  // d x d
  Vec b;               // n
  double kappa = 0.0;
  ActionSet action_set;

  /// Builds the spec from V_bar (inverses computed by eigendecomposition).
  static SafeSetSpec from_gram(Mat A_hat, double beta_bar, const Mat& V_bar,
                               Vec b, double kappa, ActionSet action_set);

  int dim() const { return static_cast<int>(A_hat.cols()); }
  int rows() const { return static_cast<int>(A_hat.rows()); }
  double b_min() const { return b.minCoeff(); }
  /// Checks kappa < b_min, shapes, and inverse / inverse-sqrt consistency.
  void validate() const;
};

/// Row slack terms a_hat_i^T x +/- beta ||x||_{V_bar^{-1}}.
bool pessimistic_contains(const SafeSetSpec& spec, const Vec& x);
bool optimistic_contains(const SafeSetSpec& spec, const Vec& x);

/// Membership in the relaxed optimistic set
/// {x in X : A_hat x - sqrt(d) beta ||V_bar^{-1/2} x||_inf 1 <= b - kappa 1}.
bool relaxed_optimistic_contains(const SafeSetSpec& spec, const Vec& x);

/// max{mu in [0,1] : mu x_tilde in pessimistic set}, closed form.
double safe_scaling(const SafeSetSpec& spec, const Vec& x_tilde);

/// Action set intersected with finitely many halfspaces; labelled by the
/// active coordinate k (0-based) and sign xi of the relaxed infinity norm.
struct ConvexPiece {
  std::vector<Halfspace> halfspaces;
  ActionSet action_set;
  int k = 0;
  int xi = 1;

  bool contains(const Vec& x, double tol = 0.0) const;
  /// Largest halfspace or action-set violation (<= 0 inside).
  double max_violation(const Vec& x) const;
};

/// The 2d pieces (k, xi), ordered k-major with xi = +1 before xi = -1.
std::vector<ConvexPiece> relaxed_pieces(const SafeSetSpec& spec);

/// Removes pieces whose intersection is empty.
std::vector<ConvexPiece> drop_empty_pieces(std::vector<ConvexPiece> pieces);

bool piece_is_nonempty(const ConvexPiece& piece);

/// Euclidean projection onto a piece by Dykstra over {X, halfspaces}.
Vec project_piece(const ConvexPiece& piece, const Vec& z, double tol = 1e-9,
                  int max_sweeps = 10000);

}  // namespace safe_oco
