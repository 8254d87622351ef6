#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cstddef>
#include <limits>
#include <optional>

namespace avgrl {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Clip(x; lo, hi) = (x v lo) ^ hi. Throws ContractViolation when lo > hi.
double clip(double x, double lo, double hi);

/// The raw lattice expression (x v lo) ^ hi with no ordering requirement on
/// the bounds. When lo > hi the result is hi.
inline double clip_lattice(double x, double lo, double hi) {
  return std::min(std::max(x, lo), hi);
}

/// sqrt(phi' * inv * phi) for a symmetric positive (semi)definite `inv`.
double weighted_norm(const Mat& inv, const Vec& phi);

/// Regularized covariance  lambda*I + sum phi phi'  with its inverse and
/// log-determinant maintained incrementally.
class PsdMatrixState {
 public:
  /// Inverse is rebuilt from `mat` by Cholesky after this many rank-one updates.
  static constexpr std::size_t kRefreshInterval = 1000;

  PsdMatrixState(std::size_t dim, double lambda);

  std::size_t dim() const { return dim_; }
  double lambda() const { return lambda_; }
  const Mat& mat() const { return mat_; }
  const Mat& inv() const { return inv_; }
  double logdet() const { return logdet_; }
  std::size_t num_updates() const { return num_updates_; }

  /// Adds phi*phi' (Sherman-Morrison on the inverse).
  void rank1_update(const Vec& phi);

  /// sqrt(phi' * inv * phi).
  double mahalanobis(const Vec& phi) const;

 private:
  void refresh();

  std::size_t dim_;
  double lambda_;
  Mat mat_;
  Mat inv_;
  double logdet_;
  std::size_t num_updates_ = 0;
};

/// Value-returning form of PsdMatrixState::rank1_update.
PsdMatrixState rank1_update(PsdMatrixState m, const Vec& phi);
double mahalanobis(const PsdMatrixState& m, const Vec& phi);

/// A clipping threshold m_t that may still be at its initial "+infinity"
/// (unset) value.
class ExtendedThreshold {
 public:
  ExtendedThreshold() = default;
  explicit ExtendedThreshold(double value) : value_(value) {}

  static ExtendedThreshold unset() { return ExtendedThreshold(); }

  bool is_set() const { return value_.has_value(); }
  /// +infinity when unset.
  double value() const {
    return value_ ? *value_ : std::numeric_limits<double>::infinity();
  }

  /// min(candidate, *this); an unset threshold yields the candidate.
  ExtendedThreshold min_with(double candidate) const;

  friend bool operator==(const ExtendedThreshold&, const ExtendedThreshold&) = default;

 private:
  std::optional<double> value_;
};

/// q - older + current, the shifted lower bound used by the deviation clip.
/// Any unset threshold makes the term non-binding (-infinity).
double shifted_lower_bound(double q, const ExtendedThreshold& older,
                           const ExtendedThreshold& current);

/// older - newer, or +infinity when either side is unset.
double threshold_gap(const ExtendedThreshold& older, const ExtendedThreshold& newer);

}  // namespace avgrl
