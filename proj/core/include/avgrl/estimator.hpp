#pragma once

#include "avgrl/mathcore.hpp"

#include <span>
#include <vector>

namespace avgrl {

/// Features phi(s_tau, a_tau) of recorded transitions, stored contiguously
/// row-major so the moment vector is a single matrix-vector product.
class FeatureLog {
 public:
  explicit FeatureLog(int dim) : dim_(dim) {}

  int dim() const { return dim_; }
  std::size_t size() const { return data_.size() / static_cast<std::size_t>(dim_); }

  void append(const Vec& phi);

  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  /// First `n` rows as an n x d matrix view.
  Eigen::Map<const RowMajor> head(std::size_t n) const;

 private:
  int dim_;
  std::vector<double> data_;
};

/// Regression targets V(s_{tau+1}) and the anchor V(s_1) they are centered on.
struct RegressionTarget {
  std::span<const double> values;
  double anchor = 0.0;
};

/// Ridge coefficient for V - V(s_1) together with the anchor that is added
/// back at evaluation time.
struct FittedWeight {
  Vec w;
  double anchor = 0.0;
};

/// w = cov_inv * sum_tau (values[tau] - anchor) * feats[tau], using the first
/// values.size() rows of `feats`.
FittedWeight fit_weight(const Mat& cov_inv, const FeatureLog& feats, const RegressionTarget& target);
FittedWeight fit_weight(const PsdMatrixState& cov, const FeatureLog& feats,
                        const RegressionTarget& target);

/// <phi, w> + anchor. Not clipped.
inline double phat_eval(const FittedWeight& fw, const Vec& phi) { return phi.dot(fw.w) + fw.anchor; }

}  // namespace avgrl
