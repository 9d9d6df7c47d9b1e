#include "ssnet/lasso.hpp"
#include "ssnet/losses.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ssnet::detail {
namespace {

// Solves (I + X'X) b = rhs, through the n x n system when p > n.
class RidgeSolver {
public:
    explicit RidgeSolver(const Matrix& X) : X_(X), wide_(X.cols() > X.rows()) {
        if (wide_) {
            Matrix M = X * X.transpose();
            M.diagonal().array() += 1.0;
            llt_.compute(M);
        } else {
            Matrix M = X.transpose() * X;
            M.diagonal().array() += 1.0;
            llt_.compute(M);
        }
    }

    Vector solve(const Vector& rhs) const {
        if (!wide_) return llt_.solve(rhs);
        return rhs - X_.transpose() * llt_.solve(X_ * rhs);
    }

private:
    const Matrix& X_;
    bool wide_;
    Eigen::LLT<Matrix> llt_;
};

// Moves beta to the nearest basic solution: with A the nonzero (or free)
// coefficients, interpolate the |A| rows of smallest residual exactly.
// Returns nullopt when the system is singular or the signs change.
std::optional<Vector> vertex_polish(const Dataset& d, const Vector& beta, const Vector& weights) {
    std::vector<Index> active;
    for (Index j = 0; j < beta.size(); ++j) {
        if (beta[j] != 0.0 || weights[j] == 0.0) active.push_back(j);
    }
    const Index na = static_cast<Index>(active.size());
    if (na == 0 || na > d.n()) return std::nullopt;

    const Vector r = (d.X * beta - d.y).cwiseAbs();
    std::vector<Index> rows(static_cast<std::size_t>(d.n()));
    std::iota(rows.begin(), rows.end(), Index{0});
    std::partial_sort(rows.begin(), rows.begin() + na, rows.end(),
                      [&](Index a, Index b) { return r[a] < r[b] || (r[a] == r[b] && a < b); });

    Matrix M(na, na);
    Vector rhs(na);
    for (Index k = 0; k < na; ++k) {
        const Index i = rows[static_cast<std::size_t>(k)];
        for (Index a = 0; a < na; ++a) M(k, a) = d.X(i, active[static_cast<std::size_t>(a)]);
        rhs[k] = d.y[i];
    }
    Eigen::FullPivLU<Matrix> lu(M);
    if (!lu.isInvertible()) return std::nullopt;
    const Vector sol = lu.solve(rhs);
    Vector out = Vector::Zero(beta.size());
    for (Index a = 0; a < na; ++a) {
        const Index j = active[static_cast<std::size_t>(a)];
        if (weights[j] != 0.0 && (sol[a] == 0.0 || (sol[a] > 0) != (beta[j] > 0))) return std::nullopt;
        out[j] = sol[a];
    }
    if (!out.allFinite()) return std::nullopt;
    return out;
}

}  // namespace

SolveState solve_absolute_admm(const Dataset& d, double lambda, const Vector& weights, Vector beta,
                               const SolverConfig& cfg) {
    const Matrix& X = d.X;
    const Vector& y = d.y;
    const Index n = X.rows();
    const Index p = X.cols();
    const double tol = cfg.absolute_kkt_tol;
    const RidgeSolver ridge(X);

    auto objective = [&](const Vector& b) {
        return (X * b - y).cwiseAbs().sum() + lambda * weights.cwiseProduct(b.cwiseAbs()).sum();
    };

    SolveState st;
    // Splitting: z = X b - y (residual copy), w = b (coefficient copy).
    Vector z = X * beta - y;
    Vector w = beta;
    Vector u = Vector::Zero(n);
    Vector v = Vector::Zero(p);
    double rho = 1.0;

    Vector best = beta;
    double best_kkt = absolute_kkt_residual(d, beta, lambda);
    if (best_kkt <= tol) {
        st.beta = std::move(beta);
        st.kkt = best_kkt;
        st.converged = true;
        return st;
    }

    auto consider = [&](const Vector& cand) {
        const double k = absolute_kkt_residual(d, cand, lambda);
        if (k < best_kkt) {
            best_kkt = k;
            best = cand;
        }
    };

    Vector b(p), Xb(n), z_old(n), w_old(p);
    while (st.iterations < cfg.max_iter) {
        ++st.iterations;
        b = ridge.solve(X.transpose() * (y + z - u) + (w - v));
        Xb.noalias() = X * b;
        z_old = z;
        w_old = w;
        const double zthr = 1.0 / rho;
        for (Index i = 0; i < n; ++i) z[i] = soft_threshold(Xb[i] - y[i] + u[i], zthr);
        for (Index j = 0; j < p; ++j) w[j] = soft_threshold(b[j] + v[j], lambda * weights[j] / rho);
        const Vector pri_z = Xb - y - z;
        const Vector pri_w = b - w;
        u += pri_z;
        v += pri_w;
        if (cfg.record_objective) st.trace.push_back(objective(w));

        if (st.iterations % 10 == 0) {
            const double r_pri = std::sqrt(pri_z.squaredNorm() + pri_w.squaredNorm());
            const double r_dual = rho * (X.transpose() * (z - z_old) + (w - w_old)).norm();
            if (r_pri > 10.0 * r_dual) {
                rho *= 2.0;
                u /= 2.0;
                v /= 2.0;
            } else if (r_dual > 10.0 * r_pri) {
                rho /= 2.0;
                u *= 2.0;
                v *= 2.0;
            }
        }
        if (st.iterations % 25 == 0) {
            if (auto polished = vertex_polish(d, w, weights)) consider(*polished);
            if (best_kkt > tol) consider(w);
            if (best_kkt <= tol) {
                st.converged = true;
                break;
            }
        }
    }
    st.kkt = best_kkt;
    st.converged = best_kkt <= tol;
    st.beta = std::move(best);
    return st;
}

}  // namespace ssnet::detail
