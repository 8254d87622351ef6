#include "avgrl/mathcore.hpp"

#include "avgrl/errors.hpp"

#include <cmath>
#include <string>

namespace avgrl {

double clip(double x, double lo, double hi) {
  if (lo > hi) {
    throw ContractViolation("clip: lower bound " + std::to_string(lo) +
                            " exceeds upper bound " + std::to_string(hi));
  }
  return clip_lattice(x, lo, hi);
}

double weighted_norm(const Mat& inv, const Vec& phi) {
  if (phi.size() != inv.rows()) {
    throw ContractViolation("weighted_norm: feature length " + std::to_string(phi.size()) +
                            " does not match dimension " + std::to_string(inv.rows()));
  }
  const double q = phi.dot(inv * phi);
  // Round-off can push a zero quadratic form slightly negative.
  return q > 0.0 ? std::sqrt(q) : 0.0;
}

PsdMatrixState::PsdMatrixState(std::size_t dim, double lambda)
    : dim_(dim),
      lambda_(lambda),
      mat_(Mat::Identity(dim, dim) * lambda),
      inv_(Mat::Identity(dim, dim) / lambda),
      logdet_(static_cast<double>(dim) * std::log(lambda)) {
  if (dim == 0) throw ContractViolation("PsdMatrixState: dimension must be positive");
  if (!(lambda > 0.0)) throw ContractViolation("PsdMatrixState: lambda must be positive");
}

void PsdMatrixState::rank1_update(const Vec& phi) {
  if (static_cast<std::size_t>(phi.size()) != dim_) {
    throw ContractViolation("rank1_update: feature length " + std::to_string(phi.size()) +
                            " does not match dimension " + std::to_string(dim_));
  }
  const Vec inv_phi = inv_ * phi;
  const double quad = phi.dot(inv_phi);
  mat_.noalias() += phi * phi.transpose();
  inv_.noalias() -= (inv_phi * inv_phi.transpose()) / (1.0 + quad);
  inv_ = (0.5 * (inv_ + inv_.transpose())).eval();
  logdet_ += std::log1p(quad);
  ++num_updates_;
  if (num_updates_ % kRefreshInterval == 0) refresh();
}

void PsdMatrixState::refresh() {
  Eigen::LLT<Mat> llt(mat_);
  inv_ = llt.solve(Mat::Identity(dim_, dim_));
  inv_ = (0.5 * (inv_ + inv_.transpose())).eval();
  // The packed factor holds L on and below its diagonal.
  logdet_ = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

double PsdMatrixState::mahalanobis(const Vec& phi) const {
  if (static_cast<std::size_t>(phi.size()) != dim_) {
    throw ContractViolation("mahalanobis: feature length " + std::to_string(phi.size()) +
                            " does not match dimension " + std::to_string(dim_));
  }
  return weighted_norm(inv_, phi);
}

PsdMatrixState rank1_update(PsdMatrixState m, const Vec& phi) {
  m.rank1_update(phi);
  return m;
}

double mahalanobis(const PsdMatrixState& m, const Vec& phi) { return m.mahalanobis(phi); }

ExtendedThreshold ExtendedThreshold::min_with(double candidate) const {
  if (!value_) return ExtendedThreshold(candidate);
  return ExtendedThreshold(std::min(*value_, candidate));
}

double shifted_lower_bound(double q, const ExtendedThreshold& older,
                           const ExtendedThreshold& current) {
  if (!older.is_set() || !current.is_set()) {
    return -std::numeric_limits<double>::infinity();
  }
  return q - older.value() + current.value();
}

double threshold_gap(const ExtendedThreshold& older, const ExtendedThreshold& newer) {
  if (!older.is_set() || !newer.is_set()) return std::numeric_limits<double>::infinity();
  return older.value() - newer.value();
}

}  // namespace avgrl
