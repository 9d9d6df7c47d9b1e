#include "ssnet/lasso.hpp"

#include "ssnet/losses.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>

namespace ssnet {
namespace {

double kkt_from_gradient(const Vector& grad, const Vector& beta, double lambda,
                         const Vector& weights) {
    double worst = 0.0;
    for (Index j = 0; j < beta.size(); ++j) {
        const double pen = lambda * weights[j];
        double v;
        if (beta[j] > 0) {
            v = std::abs(grad[j] + pen);
        } else if (beta[j] < 0) {
            v = std::abs(grad[j] - pen);
        } else {
            v = std::max(0.0, std::abs(grad[j]) - pen);
        }
        worst = std::max(worst, v);
    }
    return worst;
}

// Restriction of d to its unpenalized columns.
Dataset unpenalized_part(const Dataset& d) {
    Dataset sub;
    sub.family = d.family;
    sub.y = d.y;
    sub.X = select_columns(d.X, d.unpenalized_set());
    sub.standardization = Standardization::kNone;
    sub.unpenalized.resize(static_cast<std::size_t>(sub.X.cols()));
    for (Index j = 0; j < sub.X.cols(); ++j) sub.unpenalized[static_cast<std::size_t>(j)] = j;
    return sub;
}

detail::SolveState dispatch(const Dataset& d, double lambda, const Vector& weights, Vector beta,
                            const SolverConfig& cfg) {
    switch (d.family) {
        case Family::kQuadratic:
            return detail::solve_quadratic_cd(d, lambda, weights, std::move(beta), cfg);
        case Family::kLogistic:
            return cfg.logistic == LogisticSolver::kMajorization
                       ? detail::solve_logistic_mm(d, lambda, weights, std::move(beta), cfg)
                       : detail::solve_logistic_newton(d, lambda, weights, std::move(beta), cfg);
        case Family::kSquaredHinge:
            return detail::solve_squared_hinge_fista(d, lambda, weights, std::move(beta), cfg);
        case Family::kAbsolute:
            return detail::solve_absolute_admm(d, lambda, weights, std::move(beta), cfg);
    }
    throw std::logic_error("unknown family");
}

}  // namespace

NotConverged::NotConverged(LassoFit fit)
    : std::runtime_error("lasso fit did not converge (kkt residual " +
                         std::to_string(fit.kkt_residual) + ")"),
      fit_(std::move(fit)) {}

const LassoFit& require_converged(const LassoFit& fit) {
    if (!fit.converged) throw NotConverged(fit);
    return fit;
}

Vector penalty_weights(const Dataset& d) {
    Vector w = Vector::Ones(d.p());
    for (Index j : d.unpenalized) w[j] = 0.0;
    return w;
}

double lasso_objective(const Dataset& d, const Vector& beta, double lambda) {
    const Vector eta = d.X * beta;
    return loss_value(d.family, eta, d.y) +
           lambda * penalty_weights(d).cwiseProduct(beta.cwiseAbs()).sum();
}

double kkt_residual(const Dataset& d, const Vector& beta, double lambda) {
    if (d.family == Family::kAbsolute) return absolute_kkt_residual(d, beta, lambda);
    const Vector grad = loss_gradient(d.family, d.X, d.y, beta);
    return kkt_from_gradient(grad, beta, lambda, penalty_weights(d));
}

double absolute_kkt_residual(const Dataset& d, const Vector& beta, double lambda,
                             double zero_tol) {
    const Vector weights = penalty_weights(d);
    const Vector r = d.X * beta - d.y;
    const double scale = std::max(1.0, d.y.cwiseAbs().maxCoeff());

    std::vector<Index> zero_rows;
    Vector s(d.n());
    for (Index i = 0; i < d.n(); ++i) {
        if (std::abs(r[i]) <= zero_tol * scale) {
            zero_rows.push_back(i);
            s[i] = 0.0;
        } else {
            s[i] = r[i] > 0 ? 1.0 : -1.0;
        }
    }
    std::vector<Index> active;
    for (Index j = 0; j < d.p(); ++j) {
        if (beta[j] != 0.0 || weights[j] == 0.0) active.push_back(j);
    }

    if (!zero_rows.empty() && !active.empty()) {
        const Index nz = static_cast<Index>(zero_rows.size());
        const Index na = static_cast<Index>(active.size());
        // Equality conditions on the active columns: M s_Z = target.
        Matrix M(na, nz);
        Vector target(na);
        const Vector fixed = d.X.transpose() * s;
        for (Index a = 0; a < na; ++a) {
            const Index j = active[static_cast<std::size_t>(a)];
            for (Index k = 0; k < nz; ++k) M(a, k) = d.X(zero_rows[static_cast<std::size_t>(k)], j);
            const double sgn = beta[j] > 0 ? 1.0 : (beta[j] < 0 ? -1.0 : 0.0);
            target[a] = -lambda * weights[j] * sgn - fixed[j];
        }
        Eigen::CompleteOrthogonalDecomposition<Matrix> cod(M);
        Vector sz = cod.solve(target);
        // Alternate between the box [-1, 1] and the affine solution set.
        for (int it = 0; it < 200 && sz.cwiseAbs().maxCoeff() > 1.0; ++it) {
            Vector clipped = sz.cwiseMax(-1.0).cwiseMin(1.0);
            sz = clipped + cod.solve(target - M * clipped);
        }
        sz = sz.cwiseMax(-1.0).cwiseMin(1.0);
        for (Index k = 0; k < nz; ++k) s[zero_rows[static_cast<std::size_t>(k)]] = sz[k];
    }
    const Vector grad = d.X.transpose() * s;
    return kkt_from_gradient(grad, beta, lambda, weights);
}

LassoFit fit_lasso(const Dataset& d, double lambda, const SolverConfig& cfg,
                   const std::optional<CoefficientVector>& init) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw std::invalid_argument("fit_lasso: lambda must be positive and finite");
    }
    if (cfg.max_iter < 1 || !(cfg.kkt_tol > 0) || !(cfg.inner_tol > 0) ||
        !(cfg.absolute_kkt_tol > 0)) {
        throw std::invalid_argument("fit_lasso: invalid solver configuration");
    }
    require_valid(d);
    // Zero is optimal once the gradient at zero is inside the penalty box;
    // settle it exactly rather than through rounding in the sweeps.
    if (d.unpenalized.empty()) {
        const Vector g0 = loss_gradient(d.family, d.X, d.y, Vector::Zero(d.p()));
        if (g0.cwiseAbs().maxCoeff() <= lambda) {
            LassoFit fit;
            fit.lambda = lambda;
            fit.beta = CoefficientVector::zeros(d.p());
            fit.kkt_residual = kkt_from_gradient(g0, fit.beta.values, lambda, penalty_weights(d));
            fit.converged = true;
            if (cfg.record_objective) fit.objective_trace.push_back(lasso_objective(d, fit.beta.values, lambda));
            return fit;
        }
    }
    Vector beta = Vector::Zero(d.p());
    if (init && init->size() == d.p()) beta = init->values;

    auto state = dispatch(d, lambda, penalty_weights(d), std::move(beta), cfg);
    LassoFit fit;
    fit.lambda = lambda;
    fit.beta = CoefficientVector(std::move(state.beta));
    fit.kkt_residual = state.kkt;
    fit.iterations = state.iterations;
    fit.converged = state.converged;
    fit.objective_trace = std::move(state.trace);
    return fit;
}

std::vector<LassoFit> fit_lasso_path(const Dataset& d, const LambdaGrid& grid,
                                     const SolverConfig& cfg) {
    std::vector<LassoFit> fits(grid.size());
    std::optional<CoefficientVector> warm;
    for (std::size_t k = grid.size(); k-- > 0;) {
        fits[k] = fit_lasso(d, grid[k], cfg, warm);
        if (cfg.warm_start) warm = fits[k].beta;
    }
    return fits;
}

double lambda_max(const Dataset& d) {
    require_valid(d);
    Vector beta0 = Vector::Zero(d.p());
    if (!d.unpenalized.empty()) {
        const Dataset sub = unpenalized_part(d);
        SolverConfig cfg;
        auto state = dispatch(sub, 1.0, Vector::Zero(sub.p()), Vector::Zero(sub.p()), cfg);
        beta0 = embed(d.unpenalized_set(), state.beta, d.p());
    }
    const Vector grad = loss_gradient(d.family, d.X, d.y, beta0);
    double m = 0.0;
    for (Index j = 0; j < d.p(); ++j) {
        if (d.is_penalized(j)) m = std::max(m, std::abs(grad[j]));
    }
    return m;
}

double default_lambda_ratio(const Dataset& d) { return d.n() <= d.p() ? 1e-3 : 1e-4; }

LambdaGrid default_lambda_grid(const Dataset& d, int m) {
    if (m < 2) throw std::invalid_argument("default_lambda_grid: need m >= 2");
    const double top = lambda_max(d);
    if (!(top > 0.0)) throw std::invalid_argument("default_lambda_grid: lambda_max is zero");
    const double ratio = default_lambda_ratio(d);
    const double log_lo = std::log(ratio * top);
    const double log_hi = std::log(top);
    std::vector<double> values(static_cast<std::size_t>(m));
    for (int k = 0; k < m; ++k) {
        values[static_cast<std::size_t>(k)] =
            std::exp(log_lo + (log_hi - log_lo) * double(k) / double(m - 1));
    }
    values.front() = ratio * top;
    values.back() = top;
    return LambdaGrid(std::move(values));
}

}  // namespace ssnet
