#include "amodscale/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "amodscale/errors.hpp"

namespace amodscale::solvers {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_box(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::VectorXd& lo,
               const Eigen::VectorXd& hi) {
  if (A.rows() != b.size()) throw ContractError("row count of A and b differ");
  if (A.cols() != lo.size() || A.cols() != hi.size()) {
    throw ContractError("bound vectors do not match the column count");
  }
  for (Eigen::Index i = 0; i < lo.size(); ++i) {
    if (!std::isfinite(lo[i])) throw DomainError("lower bounds must be finite");
    if (!(hi[i] >= lo[i])) throw DomainError("upper bound below lower bound");
  }
}

}  // namespace

double sum_squared_residuals(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                             const Eigen::VectorXd& x) {
  return (A * x - b).squaredNorm();
}

double sum_abs_residuals(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                         const Eigen::VectorXd& x) {
  return (A * x - b).lpNorm<1>();
}

// ---------------------------------------------------------------------------
// Bounded least squares

BoxSolution bounded_least_squares(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                                  const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                                  const SolverOptions& options) {
  check_box(A, b, lo, hi);
  const Eigen::Index n = A.cols();
  enum class State : char { kFree, kLower, kUpper, kFixed };

  Eigen::VectorXd x = lo;
  std::vector<State> state(static_cast<std::size_t>(n), State::kFree);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (hi[i] == lo[i]) state[static_cast<std::size_t>(i)] = State::kFixed;
  }
  const Eigen::VectorXd col_sq = A.colwise().squaredNorm().transpose();
  const double b_norm = std::max(b.norm(), 1.0);
  const double abs_floor = 1e-24 * b_norm * b_norm;

  std::vector<char> blocked(static_cast<std::size_t>(n), 0);
  Eigen::Index just_released = -1;
  double objective = sum_squared_residuals(A, b, x);
  int iter = 0;

  const auto snap_eps = [](double bound) {
    return 1e-13 * std::max(1.0, std::abs(bound));
  };

  while (true) {
    if (++iter > options.max_iterations) {
      throw SolverError("bounded least squares did not converge",
                        BoxSolution{x, objective, iter - 1});
    }

    std::vector<Eigen::Index> free_idx;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (state[static_cast<std::size_t>(i)] == State::kFree) free_idx.push_back(i);
    }

    if (!free_idx.empty()) {
      const auto nf = static_cast<Eigen::Index>(free_idx.size());
      Eigen::MatrixXd af(A.rows(), nf);
      for (Eigen::Index k = 0; k < nf; ++k) af.col(k) = A.col(free_idx[static_cast<std::size_t>(k)]);
      const Eigen::VectorXd r = b - A * x;
      const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(af);
      const Eigen::VectorXd d = cod.solve(r);

      double alpha = 1.0;
      Eigen::Index blocking = -1;
      for (Eigen::Index k = 0; k < nf; ++k) {
        const Eigen::Index i = free_idx[static_cast<std::size_t>(k)];
        const double di = d[k];
        double a = kInf;
        if (di < 0.0) {
          a = (lo[i] - x[i]) / di;
        } else if (di > 0.0 && std::isfinite(hi[i])) {
          a = (hi[i] - x[i]) / di;
        }
        a = std::max(a, 0.0);
        if (a < alpha) {
          alpha = a;
          blocking = i;
        }
      }

      for (Eigen::Index k = 0; k < nf; ++k) {
        const Eigen::Index i = free_idx[static_cast<std::size_t>(k)];
        x[i] = std::clamp(x[i] + alpha * d[k], lo[i], hi[i]);
      }

      if (blocking >= 0) {
        // Partial step: pin every free variable that reached a bound.
        if (alpha == 0.0 && blocking == just_released) {
          blocked[static_cast<std::size_t>(blocking)] = 1;
        }
        for (Eigen::Index k = 0; k < nf; ++k) {
          const Eigen::Index i = free_idx[static_cast<std::size_t>(k)];
          auto& st = state[static_cast<std::size_t>(i)];
          const bool near_lower = d[k] < 0.0 && x[i] <= lo[i] + snap_eps(lo[i]);
          const bool near_upper =
              d[k] > 0.0 && std::isfinite(hi[i]) && x[i] >= hi[i] - snap_eps(hi[i]);
          if (i == blocking ? d[k] > 0.0 : (near_upper && !near_lower)) {
            x[i] = hi[i];
            st = State::kUpper;
          } else if (i == blocking || near_lower) {
            x[i] = lo[i];
            st = State::kLower;
          }
        }
        const double new_objective = sum_squared_residuals(A, b, x);
        if (new_objective < objective - options.tolerance * objective - abs_floor) {
          std::fill(blocked.begin(), blocked.end(), 0);
        }
        objective = new_objective;
        just_released = -1;
        continue;
      }
      const double new_objective = sum_squared_residuals(A, b, x);
      if (new_objective < objective - options.tolerance * objective - abs_floor) {
        std::fill(blocked.begin(), blocked.end(), 0);
      }
      objective = new_objective;
    }

    // x is optimal on the current free set; look for a bound to release.
    const Eigen::VectorXd g = A.transpose() * (A * x - b);
    const double threshold = options.tolerance * objective + abs_floor;
    Eigen::Index release = -1;
    double best_gain = threshold;
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto s = state[static_cast<std::size_t>(i)];
      if (blocked[static_cast<std::size_t>(i)] || col_sq[i] == 0.0) continue;
      const bool wants_up = s == State::kLower && g[i] < 0.0;
      const bool wants_down = s == State::kUpper && g[i] > 0.0;
      if (!wants_up && !wants_down) continue;
      // Decrease from an exact line search along coordinate i.
      const double gain = g[i] * g[i] / col_sq[i];
      if (gain > best_gain) {
        best_gain = gain;
        release = i;
      }
    }
    if (release < 0) return BoxSolution{x, objective, iter};
    state[static_cast<std::size_t>(release)] = State::kFree;
    just_released = release;
  }
}

// ---------------------------------------------------------------------------
// Bounded-variable primal simplex for the L1 program

namespace {

class BoundedSimplex {
 public:
  // min c1^T z, then c2^T z over the c1-optimal face, s.t. M z = rhs, l <= z <= u.
  BoundedSimplex(Eigen::MatrixXd M, Eigen::VectorXd rhs, Eigen::VectorXd l, Eigen::VectorXd u,
                 Eigen::VectorXd c1, Eigen::VectorXd c2, std::vector<Eigen::Index> basis,
                 const SolverOptions& options)
      : M_(std::move(M)),
        rhs_(std::move(rhs)),
        l_(std::move(l)),
        u_(std::move(u)),
        c1_(std::move(c1)),
        c2_(std::move(c2)),
        basis_(std::move(basis)),
        options_(options) {
    const Eigen::Index cols = M_.cols();
    at_upper_.assign(static_cast<std::size_t>(cols), 0);
    basic_pos_.assign(static_cast<std::size_t>(cols), -1);
    for (std::size_t r = 0; r < basis_.size(); ++r) {
      basic_pos_[static_cast<std::size_t>(basis_[r])] = static_cast<Eigen::Index>(r);
    }
    tol1_ = 1e-9 * std::max(1.0, c1_.cwiseAbs().maxCoeff());
    tol2_ = 1e-9 * std::max(1e-12, c2_.cwiseAbs().maxCoeff());
    refactor();
  }

  void solve() {
    for (int stage = 1; stage <= 2; ++stage) {
      int degenerate_run = 0;
      while (true) {
        if (iterations_ >= options_.max_iterations) {
          throw SolverError("simplex iteration limit reached", BoxSolution{values(), 0.0, iterations_});
        }
        const bool bland = degenerate_run > 50;
        Eigen::Index j = choose_entering(stage, bland);
        if (j < 0) {
          // Confirm optimality on a fresh factorization.
          refactor();
          j = choose_entering(stage, bland);
          if (j < 0) break;
        }
        const double step = step_along(j, bland);
        ++iterations_;
        degenerate_run = step <= 1e-12 ? degenerate_run + 1 : 0;
        if (++since_refactor_ >= 100) refactor();
      }
    }
  }

  Eigen::VectorXd values() const {
    Eigen::VectorXd z(M_.cols());
    for (Eigen::Index j = 0; j < M_.cols(); ++j) z[j] = nonbasic_value(j);
    for (std::size_t r = 0; r < basis_.size(); ++r) {
      const Eigen::Index j = basis_[r];
      z[j] = std::clamp(beta_[static_cast<Eigen::Index>(r)], l_[j], u_[j]);
    }
    return z;
  }

  int iterations() const { return iterations_; }

 private:
  double nonbasic_value(Eigen::Index j) const { return at_upper_[static_cast<std::size_t>(j)] ? u_[j] : l_[j]; }
  bool is_basic(Eigen::Index j) const { return basic_pos_[static_cast<std::size_t>(j)] >= 0; }

  void refactor() {
    const Eigen::Index m = M_.rows();
    Eigen::MatrixXd B(m, m);
    for (Eigen::Index r = 0; r < m; ++r) B.col(r) = M_.col(basis_[static_cast<std::size_t>(r)]);
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
    T_ = lu.solve(M_);
    Eigen::VectorXd rhs = rhs_;
    for (Eigen::Index j = 0; j < M_.cols(); ++j) {
      if (!is_basic(j)) {
        const double v = nonbasic_value(j);
        if (v != 0.0) rhs -= v * M_.col(j);
      }
    }
    beta_ = lu.solve(rhs);
    Eigen::VectorXd cb1(m), cb2(m);
    for (Eigen::Index r = 0; r < m; ++r) {
      cb1[r] = c1_[basis_[static_cast<std::size_t>(r)]];
      cb2[r] = c2_[basis_[static_cast<std::size_t>(r)]];
    }
    d1_ = c1_ - T_.transpose() * cb1;
    d2_ = c2_ - T_.transpose() * cb2;
    for (std::size_t r = 0; r < basis_.size(); ++r) {
      d1_[basis_[r]] = 0.0;
      d2_[basis_[r]] = 0.0;
    }
    since_refactor_ = 0;
  }

  // Improving direction for nonbasic j in the given stage: +1, -1 or 0.
  int direction(Eigen::Index j, int stage) const {
    if (is_basic(j) || l_[j] == u_[j]) return 0;
    const bool up = at_upper_[static_cast<std::size_t>(j)];
    if (stage == 1) {
      if (!up && d1_[j] < -tol1_) return +1;
      if (up && d1_[j] > tol1_) return -1;
      return 0;
    }
    if (std::abs(d1_[j]) > tol1_) return 0;
    if (!up && d2_[j] < -tol2_) return +1;
    if (up && d2_[j] > tol2_) return -1;
    return 0;
  }

  Eigen::Index choose_entering(int stage, bool bland) const {
    Eigen::Index best = -1;
    double best_score = 0.0;
    const Eigen::VectorXd& d = stage == 1 ? d1_ : d2_;
    for (Eigen::Index j = 0; j < M_.cols(); ++j) {
      if (direction(j, stage) == 0) continue;
      if (bland) return j;
      const double score = std::abs(d[j]);
      if (score > best_score) {
        best_score = score;
        best = j;
      }
    }
    return best;
  }

  double step_along(Eigen::Index j, bool bland) {
    const int sigma = at_upper_[static_cast<std::size_t>(j)] ? -1 : +1;
    const Eigen::VectorXd a = T_.col(j);
    constexpr double kPivotTol = 1e-9;

    double theta = u_[j] - l_[j];  // bound flip
    Eigen::Index row = -1;
    bool leave_to_upper = false;
    double row_pivot = 0.0;
    for (Eigen::Index r = 0; r < a.size(); ++r) {
      if (std::abs(a[r]) <= kPivotTol) continue;
      const Eigen::Index bj = basis_[static_cast<std::size_t>(r)];
      const double rate = -sigma * a[r];
      double limit = kInf;
      bool to_upper = false;
      if (rate < 0.0) {
        limit = (beta_[r] - l_[bj]) / -rate;
      } else if (std::isfinite(u_[bj])) {
        limit = (u_[bj] - beta_[r]) / rate;
        to_upper = true;
      }
      limit = std::max(limit, 0.0);
      bool take = false;
      if (row < 0) {
        take = limit < theta;
      } else if (limit < theta - 1e-12) {
        take = true;
      } else if (limit <= theta + 1e-12) {
        take = bland ? bj < basis_[static_cast<std::size_t>(row)] : std::abs(a[r]) > row_pivot;
      }
      if (take) {
        theta = std::min(limit, theta);
        row = r;
        leave_to_upper = to_upper;
        row_pivot = std::abs(a[r]);
      }
    }
    if (!std::isfinite(theta)) throw SolverError("linear program is unbounded", BoxSolution{});

    beta_ -= (sigma * theta) * a;
    if (row < 0) {
      at_upper_[static_cast<std::size_t>(j)] ^= 1;
      return theta;
    }

    const double entering_value = nonbasic_value(j) + sigma * theta;
    const Eigen::Index leaving = basis_[static_cast<std::size_t>(row)];
    at_upper_[static_cast<std::size_t>(leaving)] = leave_to_upper ? 1 : 0;
    basic_pos_[static_cast<std::size_t>(leaving)] = -1;
    basic_pos_[static_cast<std::size_t>(j)] = row;
    basis_[static_cast<std::size_t>(row)] = j;
    at_upper_[static_cast<std::size_t>(j)] = 0;

    const Eigen::RowVectorXd pivot_row = T_.row(row) / a[row];
    Eigen::VectorXd factors = a;
    factors[row] = 0.0;
    T_.noalias() -= factors * pivot_row;
    T_.row(row) = pivot_row;
    beta_[row] = entering_value;
    d1_ -= d1_[j] * pivot_row.transpose();
    d2_ -= d2_[j] * pivot_row.transpose();
    d1_[j] = 0.0;
    d2_[j] = 0.0;
    return theta;
  }

  Eigen::MatrixXd M_;
  Eigen::VectorXd rhs_, l_, u_, c1_, c2_;
  std::vector<Eigen::Index> basis_;
  std::vector<Eigen::Index> basic_pos_;
  std::vector<char> at_upper_;
  SolverOptions options_;
  Eigen::MatrixXd T_;
  Eigen::VectorXd beta_, d1_, d2_;
  double tol1_ = 1e-9, tol2_ = 1e-9;
  int iterations_ = 0;
  int since_refactor_ = 0;
};

}  // namespace

BoxSolution bounded_l1(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                       const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                       const Eigen::VectorXd& secondary, const SolverOptions& options) {
  check_box(A, b, lo, hi);
  if (secondary.size() != A.cols()) throw ContractError("secondary cost size mismatch");
  const Eigen::Index m = A.rows();
  const Eigen::Index n = A.cols();
  if (m == 0) return BoxSolution{lo, 0.0, 0};

  // Columns: [x (n) | p (m) | q (m)], A x + p - q = b.
  const Eigen::Index cols = n + 2 * m;
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(m, cols);
  M.leftCols(n) = A;
  M.middleCols(n, m) = Eigen::MatrixXd::Identity(m, m);
  M.rightCols(m) = -Eigen::MatrixXd::Identity(m, m);

  Eigen::VectorXd l = Eigen::VectorXd::Zero(cols);
  Eigen::VectorXd u = Eigen::VectorXd::Constant(cols, kInf);
  l.head(n) = lo;
  u.head(n) = hi;
  Eigen::VectorXd c1 = Eigen::VectorXd::Zero(cols);
  c1.tail(2 * m).setOnes();
  Eigen::VectorXd c2 = Eigen::VectorXd::Zero(cols);
  c2.head(n) = secondary;

  // Start with every x at its lower bound; the residual sign picks p or q.
  const Eigen::VectorXd slack = b - A * lo;
  std::vector<Eigen::Index> basis(static_cast<std::size_t>(m));
  for (Eigen::Index r = 0; r < m; ++r) basis[static_cast<std::size_t>(r)] = slack[r] >= 0.0 ? n + r : n + m + r;

  BoundedSimplex simplex(std::move(M), b, std::move(l), std::move(u), std::move(c1), std::move(c2),
                         std::move(basis), options);
  try {
    simplex.solve();
  } catch (const SolverError& e) {
    Eigen::VectorXd x = simplex.values().head(n);
    x = x.cwiseMax(lo).cwiseMin(hi);
    throw SolverError(e.what(), BoxSolution{x, sum_abs_residuals(A, b, x), simplex.iterations()});
  }
  Eigen::VectorXd x = simplex.values().head(n);
  x = x.cwiseMax(lo).cwiseMin(hi);
  return BoxSolution{x, sum_abs_residuals(A, b, x), simplex.iterations()};
}

}  // namespace amodscale::solvers
