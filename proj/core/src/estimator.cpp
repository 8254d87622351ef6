#include "avgrl/estimator.hpp"

#include "avgrl/errors.hpp"

#include <string>

namespace avgrl {

void FeatureLog::append(const Vec& phi) {
  if (phi.size() != dim_) {
    throw ContractViolation("FeatureLog::append: feature length " + std::to_string(phi.size()) +
                            " does not match dimension " + std::to_string(dim_));
  }
  data_.insert(data_.end(), phi.data(), phi.data() + dim_);
}

Eigen::Map<const FeatureLog::RowMajor> FeatureLog::head(std::size_t n) const {
  if (n > size()) throw ContractViolation("FeatureLog::head: requested more rows than recorded");
  return {data_.data(), static_cast<Eigen::Index>(n), dim_};
}

FittedWeight fit_weight(const Mat& cov_inv, const FeatureLog& feats, const RegressionTarget& target) {
  if (cov_inv.rows() != feats.dim() || cov_inv.cols() != feats.dim()) {
    throw ContractViolation("fit_weight: covariance dimension does not match features");
  }
  if (target.values.size() > feats.size()) {
    throw ContractViolation("fit_weight: " + std::to_string(target.values.size()) +
                            " targets but only " + std::to_string(feats.size()) + " features");
  }
  const auto n = target.values.size();
  FittedWeight out{Vec::Zero(feats.dim()), target.anchor};
  if (n == 0) return out;
  const Eigen::Map<const Vec> y(target.values.data(), static_cast<Eigen::Index>(n));
  const Vec centered = y.array() - target.anchor;
  const Vec moment = feats.head(n).transpose() * centered;
  out.w.noalias() = cov_inv * moment;
  return out;
}

FittedWeight fit_weight(const PsdMatrixState& cov, const FeatureLog& feats,
                        const RegressionTarget& target) {
  if (target.values.size() != feats.size()) {
    throw ContractViolation("fit_weight: " + std::to_string(target.values.size()) +
                            " targets for " + std::to_string(feats.size()) + " features");
  }
  return fit_weight(cov.inv(), feats, target);
}

}  // namespace avgrl
