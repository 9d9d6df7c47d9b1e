#include "ssnet/lasso.hpp"
#include "ssnet/losses.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>

namespace ssnet::detail {
namespace {

double kkt_violation(const Vector& grad, const Vector& beta, double lambda,
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

double penalty(const Vector& beta, double lambda, const Vector& weights) {
    return lambda * weights.cwiseProduct(beta.cwiseAbs()).sum();
}

std::vector<Index> all_indices(Index p) {
    std::vector<Index> out(static_cast<std::size_t>(p));
    for (Index j = 0; j < p; ++j) out[static_cast<std::size_t>(j)] = j;
    return out;
}

std::vector<Index> nonzero_or_free(const Vector& beta, const Vector& weights) {
    std::vector<Index> out;
    for (Index j = 0; j < beta.size(); ++j) {
        if (beta[j] != 0.0 || weights[j] == 0.0) out.push_back(j);
    }
    return out;
}

}  // namespace

SolveState solve_quadratic_cd(const Dataset& d, double lambda, const Vector& weights,
                              Vector beta, const SolverConfig& cfg) {
    const Matrix& X = d.X;
    const Index p = X.cols();
    const Vector col_sq = X.colwise().squaredNorm().transpose();
    const auto everything = all_indices(p);

    SolveState st;
    Vector r = d.y - X * beta;
    auto objective = [&] { return 0.5 * r.squaredNorm() + penalty(beta, lambda, weights); };

    // One cyclic pass; returns the largest change in fitted values.
    auto sweep = [&](const std::vector<Index>& indices) {
        double biggest = 0.0;
        for (Index j : indices) {
            if (col_sq[j] <= 0.0) continue;
            const double old = beta[j];
            const double g = X.col(j).dot(r) + col_sq[j] * old;
            const double updated = soft_threshold(g, lambda * weights[j]) / col_sq[j];
            if (updated != old) {
                r.noalias() -= (updated - old) * X.col(j);
                beta[j] = updated;
                biggest = std::max(biggest, std::abs(updated - old) * std::sqrt(col_sq[j]));
            }
        }
        return biggest;
    };

    // Exact minimizer on the current active set with its signs held fixed;
    // kept only if the signs survive and the objective does not increase.
    auto polish = [&](const std::vector<Index>& active) {
        const Index k = static_cast<Index>(active.size());
        if (k == 0 || k > X.rows()) return false;
        Matrix XA(X.rows(), k);
        Vector rhs(k);
        for (Index a = 0; a < k; ++a) {
            const Index j = active[static_cast<std::size_t>(a)];
            XA.col(a) = X.col(j);
            const double sgn = beta[j] > 0 ? 1.0 : (beta[j] < 0 ? -1.0 : 0.0);
            rhs[a] = -lambda * weights[j] * sgn;
        }
        rhs.noalias() += XA.transpose() * d.y;
        Eigen::LDLT<Matrix> ldlt(XA.transpose() * XA);
        if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return false;
        const Vector cand = ldlt.solve(rhs);
        if (!cand.allFinite()) return false;
        Vector next = beta;
        for (Index a = 0; a < k; ++a) {
            const Index j = active[static_cast<std::size_t>(a)];
            if (weights[j] != 0.0 && !(cand[a] * beta[j] > 0.0)) return false;
            next[j] = cand[a];
        }
        const Vector r_next = d.y - X * next;
        const double before = objective();
        const double after = 0.5 * r_next.squaredNorm() + penalty(next, lambda, weights);
        if (after <= before) {
            beta = std::move(next);
            r = r_next;
            if (cfg.record_objective) st.trace.push_back(after);
            return true;
        }
        return false;
    };

    while (st.iterations < cfg.max_iter) {
        sweep(everything);
        ++st.iterations;
        if (cfg.record_objective) st.trace.push_back(objective());

        const auto active = nonzero_or_free(beta, weights);
        bool polished = false;
        for (int pass = 1; st.iterations < cfg.max_iter; ++pass) {
            const double change = sweep(active);
            ++st.iterations;
            if (cfg.record_objective) st.trace.push_back(objective());
            if (change < cfg.inner_tol) break;
            if (pass % 25 == 0 && polish(nonzero_or_free(beta, weights))) {
                polished = true;
                break;
            }
        }
        if (!polished) polish(nonzero_or_free(beta, weights));

        r = d.y - X * beta;
        const Vector grad = -(X.transpose() * r);
        st.kkt = kkt_violation(grad, beta, lambda, weights);
        if (st.kkt <= cfg.kkt_tol) {
            st.converged = true;
            break;
        }
    }
    if (!st.converged) {
        const Vector grad = -(X.transpose() * (d.y - X * beta));
        st.kkt = kkt_violation(grad, beta, lambda, weights);
        st.converged = st.kkt <= cfg.kkt_tol;
    }
    st.beta = std::move(beta);
    return st;
}

SolveState solve_logistic_mm(const Dataset& d, double lambda, const Vector& weights, Vector beta,
                             const SolverConfig& cfg) {
    const Matrix& X = d.X;
    const Vector& y = d.y;
    const Index n = X.rows();
    const Index p = X.cols();
    // gamma'' <= 1/4 gives the coordinate curvature bound.
    const Vector curv = 0.25 * X.colwise().squaredNorm().transpose();
    const auto everything = all_indices(p);

    SolveState st;
    Vector eta = X * beta;
    Vector mu(n);
    for (Index i = 0; i < n; ++i) mu[i] = sigmoid(eta[i]);

    auto objective = [&] { return loss_value(Family::kLogistic, eta, y) + penalty(beta, lambda, weights); };

    auto sweep = [&](const std::vector<Index>& indices) {
        double biggest = 0.0;
        for (Index j : indices) {
            if (curv[j] <= 0.0) continue;
            const double old = beta[j];
            const double g = X.col(j).dot(mu - y);
            const double updated = soft_threshold(curv[j] * old - g, lambda * weights[j]) / curv[j];
            if (updated != old) {
                eta.noalias() += (updated - old) * X.col(j);
                for (Index i = 0; i < n; ++i) mu[i] = sigmoid(eta[i]);
                beta[j] = updated;
                biggest = std::max(biggest, std::abs(updated - old) * std::sqrt(curv[j]));
            }
        }
        return biggest;
    };

    while (st.iterations < cfg.max_iter) {
        sweep(everything);
        ++st.iterations;
        if (cfg.record_objective) st.trace.push_back(objective());
        const auto active = nonzero_or_free(beta, weights);
        while (st.iterations < cfg.max_iter) {
            const double change = sweep(active);
            ++st.iterations;
            if (cfg.record_objective) st.trace.push_back(objective());
            if (change < cfg.inner_tol) break;
        }
        eta = X * beta;
        for (Index i = 0; i < n; ++i) mu[i] = sigmoid(eta[i]);
        const Vector grad = X.transpose() * (mu - y);
        st.kkt = kkt_violation(grad, beta, lambda, weights);
        if (st.kkt <= cfg.kkt_tol) {
            st.converged = true;
            break;
        }
    }
    st.beta = std::move(beta);
    return st;
}

SolveState solve_logistic_newton(const Dataset& d, double lambda, const Vector& weights,
                                 Vector beta, const SolverConfig& cfg) {
    const Matrix& X = d.X;
    const Vector& y = d.y;
    const Index n = X.rows();
    const Index p = X.cols();
    const auto everything = all_indices(p);
    constexpr double kMinWeight = 1e-5;
    constexpr int kMaxInnerSweeps = 2000;

    auto full_objective = [&](const Vector& b, const Vector& eta) {
        return loss_value(Family::kLogistic, eta, y) + penalty(b, lambda, weights);
    };

    SolveState st;
    Vector eta = X * beta;
    Vector mu(n), w(n);
    Vector z(n);  // X (b - beta) for the trial point b
    double f_now = full_objective(beta, eta);

    while (st.iterations < cfg.max_iter) {
        for (Index i = 0; i < n; ++i) mu[i] = sigmoid(eta[i]);
        const Vector grad = X.transpose() * (mu - y);
        st.kkt = kkt_violation(grad, beta, lambda, weights);
        if (st.kkt <= cfg.kkt_tol) {
            st.converged = true;
            break;
        }
        ++st.iterations;

        for (Index i = 0; i < n; ++i) w[i] = std::max(mu[i] * (1.0 - mu[i]), kMinWeight);
        Vector a(p);
        for (Index j = 0; j < p; ++j) a[j] = X.col(j).cwiseAbs2().dot(w);

        // Coordinate descent on the penalized quadratic model around beta.
        Vector b = beta;
        z.setZero();
        const double inner_stop = std::max(1e-3 * std::min(st.kkt, 1.0), 1e-2 * cfg.kkt_tol);
        auto sweep = [&](const std::vector<Index>& indices) {
            double biggest = 0.0;
            for (Index j : indices) {
                if (a[j] <= 0.0) continue;
                const double old = b[j];
                const double g = grad[j] + X.col(j).dot(w.cwiseProduct(z));
                const double updated = soft_threshold(a[j] * old - g, lambda * weights[j]) / a[j];
                if (updated != old) {
                    z.noalias() += (updated - old) * X.col(j);
                    b[j] = updated;
                    biggest = std::max(biggest, std::abs(updated - old) * std::sqrt(a[j]));
                }
            }
            return biggest;
        };
        for (int outer = 0; outer < kMaxInnerSweeps; ++outer) {
            const double full_change = sweep(everything);
            if (full_change < inner_stop) break;
            const auto active = nonzero_or_free(b, weights);
            for (int inner = 0; inner < kMaxInnerSweeps; ++inner) {
                if (sweep(active) < inner_stop) break;
            }
        }

        // Backtracking on the penalized objective.
        const Vector dir = b - beta;
        const double decrease = grad.dot(dir) + penalty(b, lambda, weights) - penalty(beta, lambda, weights);
        double step = 1.0;
        bool accepted = false;
        for (int halving = 0; halving < 40; ++halving) {
            Vector trial = step == 1.0 ? b : Vector(beta + step * dir);
            Vector trial_eta = step == 1.0 ? Vector(eta + z) : Vector(eta + step * z);
            const double f_trial = full_objective(trial, trial_eta);
            if (f_trial <= f_now + 1e-4 * step * std::min(decrease, 0.0)) {
                beta = std::move(trial);
                eta = X * beta;
                f_now = full_objective(beta, eta);
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (cfg.record_objective) st.trace.push_back(f_now);
        if (!accepted) break;  // no descent possible at working precision
    }
    if (!st.converged) {
        for (Index i = 0; i < n; ++i) mu[i] = sigmoid(eta[i]);
        const Vector grad = X.transpose() * (mu - y);
        st.kkt = kkt_violation(grad, beta, lambda, weights);
        st.converged = st.kkt <= cfg.kkt_tol;
    }
    st.beta = std::move(beta);
    return st;
}

}  // namespace ssnet::detail
