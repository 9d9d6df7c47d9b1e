#include "ssnet/lasso.hpp"
#include "ssnet/losses.hpp"

#include <cmath>
#include <random>

namespace ssnet::detail {
namespace {

// Largest singular value of X by power iteration on X'X.
double spectral_norm(const Matrix& X) {
    Vector v = Vector::Ones(X.cols()) / std::sqrt(double(X.cols()));
    double s = 0.0;
    for (int it = 0; it < 200; ++it) {
        Vector w = X.transpose() * (X * v);
        const double nw = w.norm();
        if (nw == 0.0) return 0.0;
        const double next = std::sqrt(nw);
        v = w / nw;
        if (std::abs(next - s) <= 1e-10 * next) {
            s = next;
            break;
        }
        s = next;
    }
    return s;
}

}  // namespace

SolveState solve_squared_hinge_fista(const Dataset& d, double lambda, const Vector& weights,
                                     Vector beta, const SolverConfig& cfg) {
    const Matrix& X = d.X;
    const Vector& y = d.y;
    const Index p = X.cols();
    // Gradient of sum max(0, 1 - y eta)^2 is 2 ||X||^2 Lipschitz; pad the
    // power-iteration estimate.
    const double sigma = spectral_norm(X);
    const double L = std::max(2.0 * sigma * sigma * 1.02, 1e-12);

    auto smooth_grad = [&](const Vector& eta) {
        return Vector(X.transpose() * contrast_derivatives(Family::kSquaredHinge, eta, y));
    };
    auto objective = [&](const Vector& b, const Vector& eta) {
        return loss_value(Family::kSquaredHinge, eta, y) +
               lambda * weights.cwiseProduct(b.cwiseAbs()).sum();
    };
    auto kkt_at = [&](const Vector& b, const Vector& grad) {
        double worst = 0.0;
        for (Index j = 0; j < p; ++j) {
            const double pen = lambda * weights[j];
            double v = b[j] > 0 ? std::abs(grad[j] + pen)
                     : b[j] < 0 ? std::abs(grad[j] - pen)
                                : std::max(0.0, std::abs(grad[j]) - pen);
            worst = std::max(worst, v);
        }
        return worst;
    };

    SolveState st;
    Vector x = std::move(beta);
    Vector eta_x = X * x;
    double f_x = objective(x, eta_x);
    Vector yk = x;
    Vector eta_y = eta_x;
    double t = 1.0;
    Vector xn(p);

    st.kkt = kkt_at(x, smooth_grad(eta_x));
    if (st.kkt <= cfg.kkt_tol) {
        st.converged = true;
        st.beta = std::move(x);
        return st;
    }

    while (st.iterations < cfg.max_iter) {
        ++st.iterations;
        const Vector grad_y = smooth_grad(eta_y);
        for (Index j = 0; j < p; ++j) {
            xn[j] = soft_threshold(yk[j] - grad_y[j] / L, lambda * weights[j] / L);
        }
        Vector eta_n = X * xn;
        const double f_n = objective(xn, eta_n);
        if (f_n > f_x) {
            // Adaptive restart: momentum step increased the objective.
            if (t == 1.0) {
                // Plain proximal step from x cannot increase F beyond
                // rounding; accept and keep going.
                x = xn;
                eta_x = std::move(eta_n);
                f_x = f_n;
            }
            t = 1.0;
            yk = x;
            eta_y = eta_x;
        } else {
            const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
            const double mom = (t - 1.0) / tn;
            yk = xn + mom * (xn - x);
            eta_y = eta_n + mom * (eta_n - eta_x);
            x = xn;
            eta_x = std::move(eta_n);
            f_x = f_n;
            t = tn;
        }
        if (cfg.record_objective) st.trace.push_back(f_x);
        if (st.iterations % 10 == 0) {
            eta_x = X * x;  // refresh accumulated rounding
            st.kkt = kkt_at(x, smooth_grad(eta_x));
            if (st.kkt <= cfg.kkt_tol) {
                st.converged = true;
                break;
            }
        }
    }
    if (!st.converged) {
        st.kkt = kkt_at(x, smooth_grad(X * x));
        st.converged = st.kkt <= cfg.kkt_tol;
    }
    st.beta = std::move(x);
    return st;
}

}  // namespace ssnet::detail
