#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace amodscale::solvers {

struct SolverOptions {
  /// Relative objective tolerance. The least-squares solver stops once no
  /// bound release is estimated to lower the objective by more than
  /// tolerance * objective; the simplex uses it for reduced-cost tests.
  double tolerance = 1e-8;
  int max_iterations = 100000;
};

struct BoxSolution {
  Eigen::VectorXd x;
  double objective = 0.0;
  int iterations = 0;
};

/// Raised when the iteration budget runs out; carries the best feasible iterate.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, BoxSolution best)
      : std::runtime_error(what), best_(std::move(best)) {}
  const BoxSolution& best() const { return best_; }

 private:
  BoxSolution best_;
};

double sum_squared_residuals(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                             const Eigen::VectorXd& x);
double sum_abs_residuals(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                         const Eigen::VectorXd& x);

/// min ||A x - b||^2  s.t.  lo <= x <= hi.
///
/// Active-set method over bound constraints. Each subproblem on the free
/// variables is solved with a complete orthogonal decomposition, taking the
/// minimum-norm step so rank-deficient systems (edges that are never
/// separately observed) stay well defined. `hi` entries may be +inf.
BoxSolution bounded_least_squares(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                                  const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                                  const SolverOptions& options = {});

/// min sum_i |A_i x - b_i|  s.t.  lo <= x <= hi, and among all minimizers the
/// one minimizing secondary^T x.
///
/// The residual of each row is split as b - A x = p - n with p, n >= 0 and the
/// resulting LP is solved by a bounded-variable primal simplex started from
/// the all-lower-bound basis. The secondary objective is optimized in a
/// second pricing stage restricted to columns that leave the primary
/// objective unchanged.
BoxSolution bounded_l1(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                       const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                       const Eigen::VectorXd& secondary, const SolverOptions& options = {});

}  // namespace amodscale::solvers
