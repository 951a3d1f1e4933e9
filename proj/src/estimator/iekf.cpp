#include "terramap/estimator/iekf.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <spdlog/spdlog.h>

namespace terramap::estimator {

void ResidualStack::accumulate(CovarianceMatrix& info, ErrorState& grad) const {
  for (const auto& s : scalars_) {
    const double w = 1.0 / s.variance;
    info.noalias() += w * s.jac.transpose() * s.jac;
    grad.noalias() += (w * s.h) * s.jac.transpose();
  }
  for (const auto& b : blocks_) {
    const Mat3 w = b.cov.inverse();
    info.noalias() += b.jac.transpose() * w * b.jac;
    grad.noalias() += b.jac.transpose() * (w * b.h);
  }
}

ResidualStack ResidualStack::shifted(const ErrorState& offset,
                                     const CovarianceMatrix& tangent_map) const {
  ResidualStack out;
  for (const auto& s : scalars_) {
    out.add_scalar(s.h + s.jac.dot(offset), s.jac * tangent_map, s.variance);
  }
  for (const auto& b : blocks_) out.add_block(b.h + b.jac * offset, b.jac * tangent_map, b.cov);
  return out;
}

namespace {

CovarianceMatrix tangent_map_at(const ErrorState& e) {
  CovarianceMatrix jac = CovarianceMatrix::Identity();
  jac.block<3, 3>(block::kRot, block::kRot) = so3_right_jacobian_inv(e.segment<3>(block::kRot));
  return jac;
}

}  // namespace

IekfResult iekf_update(const NominalState& prior, const CovarianceMatrix& p,
                       const ResidualBuilder& build, const IekfOptions& options) {
  IekfResult result{prior, p};

  Eigen::LLT<CovarianceMatrix> prior_llt(p);
  if (prior_llt.info() != Eigen::Success) {
    spdlog::warn("iekf: prior covariance not positive definite, update skipped");
    result.skipped = true;
    return result;
  }
  const CovarianceMatrix prior_info = prior_llt.solve(CovarianceMatrix::Identity());

  NominalState x = prior;
  ResidualStack stack;
  CovarianceMatrix info;
  for (int it = 0; it < options.max_iterations; ++it) {
    stack.clear();
    build(x, stack);
    if (stack.empty()) {
      if (it == 0) return result;
      break;
    }

    // Tangent of the prior term at the iterate: e + J dx, with J the inverse
    // right Jacobian on the rotation block.
    const ErrorState e = boxminus(x, prior);
    const CovarianceMatrix jac = tangent_map_at(e);

    info = jac.transpose() * prior_info * jac;
    ErrorState grad = jac.transpose() * (prior_info * e);
    stack.accumulate(info, grad);
    info = 0.5 * (info + info.transpose()).eval();

    Eigen::LLT<CovarianceMatrix> llt(info);
    if (llt.info() != Eigen::Success || !info.allFinite() || !grad.allFinite()) {
      spdlog::warn("iekf: information matrix singular ({} residual rows), update skipped",
                   stack.rows());
      result = IekfResult{prior, p};
      result.skipped = true;
      return result;
    }
    const ErrorState dx = -llt.solve(grad);
    x = boxplus(x, dx);
    result.iterations = it + 1;
    if (dx.norm() < options.convergence) {
      result.converged = true;
      break;
    }
  }

  Eigen::LLT<CovarianceMatrix> final_llt(info);
  CovarianceMatrix cov = final_llt.solve(CovarianceMatrix::Identity());
  cov = 0.5 * (cov + cov.transpose()).eval();

  x.rot = orthonormalize(x.rot);
  result.state = x;
  result.cov = cov;
  return result;
}

IekfResult iekf_update(const NominalState& prior, const CovarianceMatrix& p,
                       const ResidualStack& at_prior, const IekfOptions& options) {
  return iekf_update(
      prior, p,
      [&](const NominalState& x, ResidualStack& out) {
        const ErrorState e = boxminus(x, prior);
        out = at_prior.shifted(e, tangent_map_at(e));
      },
      options);
}

}  // namespace terramap::estimator
