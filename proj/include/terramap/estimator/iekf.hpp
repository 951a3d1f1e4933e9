#pragma once

#include <functional>
#include <vector>

#include "terramap/estimator/measurements.hpp"

namespace terramap::estimator {

/// Stack of linearized residuals 0 ~ h + H x_tilde + n evaluated at one
/// linearization point.
class ResidualStack {
 public:
  void clear() {
    scalars_.clear();
    blocks_.clear();
  }

  void add_scalar(double h, const JacobianRow& jac, double variance) {
    scalars_.push_back({h, jac, variance});
  }

  void add_block(const Vec3& h, const Jacobian3& jac, const Mat3& cov) {
    blocks_.push_back({h, jac, cov});
  }

  std::size_t rows() const { return scalars_.size() + 3 * blocks_.size(); }
  bool empty() const { return rows() == 0; }

  /// info += H^T R^-1 H, grad += H^T R^-1 h.
  void accumulate(CovarianceMatrix& info, ErrorState& grad) const;

  /// Re-expresses a stack linearized at x0 around x = x0 [+] offset, where
  /// tangent_map = d((x [+] d) [-] x0)/dd. Used to iterate a fixed linear model.
  ResidualStack shifted(const ErrorState& offset, const CovarianceMatrix& tangent_map) const;

 private:
  struct Scalar {
    double h;
    JacobianRow jac;
    double variance;
  };
  struct Block {
    Vec3 h;
    Jacobian3 jac;
    Mat3 cov;
  };
  std::vector<Scalar> scalars_;
  std::vector<Block> blocks_;
};

/// Rebuilds the residual stack at the given iterate.
using ResidualBuilder = std::function<void(const NominalState&, ResidualStack&)>;

struct IekfOptions {
  int max_iterations = 5;
  double convergence = 1e-6;
};

struct IekfResult {
  NominalState state;
  CovarianceMatrix cov;
  int iterations = 0;
  bool converged = false;
  /// True when the information matrix was not positive definite and the
  /// prior was returned unchanged.
  bool skipped = false;
};

/// Iterated MAP update: Gauss-Newton on
///   |x [-] x_prior|^2_{P^-1} + sum |h_k(x)|^2_{R_k^-1}
/// relinearizing through `build` until |dx| < convergence or max_iterations.
IekfResult iekf_update(const NominalState& prior, const CovarianceMatrix& p,
                       const ResidualBuilder& build, const IekfOptions& options = {});

/// Same, for a residual stack linearized once at the prior.
IekfResult iekf_update(const NominalState& prior, const CovarianceMatrix& p,
                       const ResidualStack& at_prior, const IekfOptions& options = {});

}  // namespace terramap::estimator
