#pragma once

#include "ssnet/model.hpp"

#include <optional>
#include <stdexcept>
#include <vector>

namespace ssnet {

enum class LogisticSolver {
    // Cyclic coordinate descent on the exact objective with the fixed
    // coordinate curvature bound ||x_j||^2 / 4 (monotone, slow when the
    // fitted probabilities approach 0 or 1).
    kMajorization,
    // Proximal Newton: IRLS quadratic model solved by coordinate descent,
    // backtracking line search on the penalized objective (monotone).
    kProximalNewton,
};

struct SolverConfig {
    int max_iter = 100000;
    // KKT tolerance for the smooth families.
    double kkt_tol = 1e-6;
    // Subgradient KKT tolerance for the absolute contrast.
    double absolute_kkt_tol = 1e-4;
    // Coordinate-change threshold for leaving an active-set pass.
    double inner_tol = 1e-8;
    bool warm_start = true;
    LogisticSolver logistic = LogisticSolver::kProximalNewton;
    // Store the penalized objective after each iteration (sweep, Newton
    // step, or proximal step).
    bool record_objective = false;

    double tolerance_for(Family family) const {
        return family == Family::kAbsolute ? absolute_kkt_tol : kkt_tol;
    }
};

struct LassoFit {
    double lambda = 0.0;
    CoefficientVector beta;
    double kkt_residual = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> objective_trace;
};

// Raised by require_converged(); carries the best iterate.
class NotConverged : public std::runtime_error {
public:
    explicit NotConverged(LassoFit fit);
    const LassoFit& fit() const noexcept { return fit_; }

private:
    LassoFit fit_;
};

const LassoFit& require_converged(const LassoFit& fit);

// Per-column penalty weights: 0 for unpenalized columns, 1 otherwise.
Vector penalty_weights(const Dataset& d);

// l(beta) + lambda * sum_j w_j |beta_j|.
double lasso_objective(const Dataset& d, const Vector& beta, double lambda);

// Largest violation of the Lasso optimality conditions at beta:
//   beta_j != 0:  |g_j + lambda w_j sign(beta_j)|
//   beta_j == 0:  max(0, |g_j| - lambda w_j)
// For smooth families g is the gradient. For the absolute contrast g ranges
// over the subdifferential; see absolute_kkt_residual().
double kkt_residual(const Dataset& d, const Vector& beta, double lambda);

// Subgradient certificate for the absolute contrast. Rows whose residual is
// within `zero_tol` of zero take any slope in [-1, 1]; the slopes are chosen
// (least-squares, then clipped) to satisfy the equality conditions.
double absolute_kkt_residual(const Dataset& d, const Vector& beta, double lambda,
                             double zero_tol = 1e-9);

// Penalized fit at a single lambda. A fit that hits max_iter is returned
// with converged = false.
LassoFit fit_lasso(const Dataset& d, double lambda, const SolverConfig& cfg = {},
                   const std::optional<CoefficientVector>& init = std::nullopt);

// Fits in grid order (increasing lambda); computed from the largest lambda
// down, each warm-started from its larger neighbour.
std::vector<LassoFit> fit_lasso_path(const Dataset& d, const LambdaGrid& grid,
                                     const SolverConfig& cfg = {});

// Smallest lambda with an all-zero (penalized part) solution:
// max_j |l'(beta_0)_j| over penalized j, beta_0 the unpenalized-only fit.
double lambda_max(const Dataset& d);

// m log-spaced values from ratio * lambda_max to lambda_max, increasing.
// ratio = 1e-3 when n <= p, 1e-4 otherwise.
LambdaGrid default_lambda_grid(const Dataset& d, int m);
double default_lambda_ratio(const Dataset& d);

namespace detail {

struct SolveState {
    Vector beta;
    int iterations = 0;
    double kkt = 0.0;
    bool converged = false;
    std::vector<double> trace;
};

SolveState solve_quadratic_cd(const Dataset& d, double lambda, const Vector& weights,
                              Vector beta, const SolverConfig& cfg);
SolveState solve_logistic_mm(const Dataset& d, double lambda, const Vector& weights,
                             Vector beta, const SolverConfig& cfg);
SolveState solve_logistic_newton(const Dataset& d, double lambda, const Vector& weights,
                                 Vector beta, const SolverConfig& cfg);
SolveState solve_squared_hinge_fista(const Dataset& d, double lambda, const Vector& weights,
                                     Vector beta, const SolverConfig& cfg);
// lambda may be 0 here (unpenalized median regression).
SolveState solve_absolute_admm(const Dataset& d, double lambda, const Vector& weights,
                               Vector beta, const SolverConfig& cfg);

// Weighted l1 coordinate update: argmin_b  a/2 b^2 - g b + pen |b|.
inline double soft_threshold(double g, double pen) {
    if (g > pen) return g - pen;
    if (g < -pen) return g + pen;
    return 0.0;
}

}  // namespace detail
}  // namespace ssnet
