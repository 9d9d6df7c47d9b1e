#pragma once

// Test-side reference computations. Nothing here calls into the library
// under test except for plain data types.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

namespace oracle {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

inline Mat gaussian_matrix(int n, int p, std::uint32_t seed) {
    std::mt19937 gen(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    Mat X(n, p);
    for (int j = 0; j < p; ++j)
        for (int i = 0; i < n; ++i) X(i, j) = z(gen);
    return X;
}

inline Vec gaussian_vector(int n, std::uint32_t seed) { return gaussian_matrix(n, 1, seed).col(0); }

inline Mat unit_columns(Mat X) {
    for (int j = 0; j < X.cols(); ++j) X.col(j) /= X.col(j).norm();
    return X;
}

// n x p with orthonormal columns (p <= n).
inline Mat orthonormal_columns(int n, int p, std::uint32_t seed) {
    const Mat A = gaussian_matrix(n, n, seed);
    Eigen::HouseholderQR<Mat> qr(A);
    return qr.householderQ() * Mat::Identity(n, p);
}

// Least squares by the normal equations.
inline Vec normal_equations(const Mat& X, const Vec& y) {
    return (X.transpose() * X).ldlt().solve(X.transpose() * y);
}

inline double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

inline double log1pexp(double t) { return t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

enum class Kind { Quadratic, Logistic, Absolute, SquaredHinge };

inline double phi(Kind k, double eta, double y) {
    switch (k) {
        case Kind::Quadratic: return 0.5 * (y - eta) * (y - eta);
        case Kind::Logistic: return log1pexp(eta) - y * eta;
        case Kind::Absolute: return std::abs(y - eta);
        case Kind::SquaredHinge: {
            const double m = std::max(0.0, 1.0 - y * eta);
            return m * m;
        }
    }
    return 0.0;
}

inline double loss(Kind k, const Mat& X, const Vec& y, const Vec& b) {
    const Vec eta = X * b;
    double s = 0.0;
    for (int i = 0; i < eta.size(); ++i) s += phi(k, eta[i], y[i]);
    return s;
}

inline double lasso_objective(Kind k, const Mat& X, const Vec& y, const Vec& b, double lambda) {
    return loss(k, X, y, b) + lambda * b.lpNorm<1>();
}

// Central differences of the loss.
inline Vec numeric_gradient(Kind k, const Mat& X, const Vec& y, const Vec& b, double h = 1e-6) {
    Vec g(b.size());
    for (int j = 0; j < b.size(); ++j) {
        Vec bp = b, bm = b;
        bp[j] += h;
        bm[j] -= h;
        g[j] = (loss(k, X, y, bp) - loss(k, X, y, bm)) / (2.0 * h);
    }
    return g;
}

// Analytic gradient for the smooth contrasts.
inline Vec gradient(Kind k, const Mat& X, const Vec& y, const Vec& b) {
    const Vec eta = X * b;
    Vec r(eta.size());
    for (int i = 0; i < eta.size(); ++i) {
        switch (k) {
            case Kind::Quadratic: r[i] = eta[i] - y[i]; break;
            case Kind::Logistic: r[i] = sigmoid(eta[i]) - y[i]; break;
            case Kind::SquaredHinge: r[i] = -2.0 * y[i] * std::max(0.0, 1.0 - y[i] * eta[i]); break;
            case Kind::Absolute: r[i] = eta[i] > y[i] ? 1.0 : (eta[i] < y[i] ? -1.0 : 0.0); break;
        }
    }
    return X.transpose() * r;
}

// Largest Lasso optimality violation for a smooth loss, all columns penalized.
inline double smooth_kkt(Kind k, const Mat& X, const Vec& y, const Vec& b, double lambda) {
    const Vec g = gradient(k, X, y, b);
    double worst = 0.0;
    for (int j = 0; j < b.size(); ++j) {
        const double v = b[j] != 0.0 ? std::abs(g[j] + lambda * (b[j] > 0 ? 1.0 : -1.0))
                                     : std::max(0.0, std::abs(g[j]) - lambda);
        worst = std::max(worst, v);
    }
    return worst;
}

// Minimizes f over a box by a shrinking grid search (coarse grid, then
// repeated refinement around the incumbent). Intended for p <= 3.
inline Vec grid_minimize(const std::function<double(const Vec&)>& f, int p, double half_width,
                         int points = 41, int rounds = 40) {
    Vec centre = Vec::Zero(p);
    double width = half_width;
    double best = f(centre);
    Vec arg = centre;
    std::vector<int> idx(p, 0);
    for (int round = 0; round < rounds; ++round) {
        std::fill(idx.begin(), idx.end(), 0);
        while (true) {
            Vec b(p);
            for (int j = 0; j < p; ++j) b[j] = centre[j] - width + 2.0 * width * idx[j] / (points - 1);
            const double v = f(b);
            if (v < best) {
                best = v;
                arg = b;
            }
            int j = 0;
            while (j < p && ++idx[j] == points) idx[j++] = 0;
            if (j == p) break;
        }
        centre = arg;
        width *= 0.25;
    }
    return arg;
}

// Residual of projecting v onto span(X_J) via the normal equations.
inline double projection_residual(const Mat& XJ, const Vec& v) {
    if (XJ.cols() == 0) return v.squaredNorm();
    const Vec b = normal_equations(XJ, v);
    return (v - XJ * b).squaredNorm();
}

inline double normal_upper_tail(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

// Subgradient certificate for the absolute contrast: minimizes the total
// squared violation over slopes s_i in [-1, 1] on zero-residual rows
// (clipped least-squares start, then projected gradient) and reports the
// largest violation.
inline double absolute_certificate(const Mat& X, const Vec& y, const Vec& b, double lambda) {
    const Eigen::Index n = X.rows(), p = X.cols();
    const Vec r = X * b - y;
    const double scale = std::max(1.0, y.cwiseAbs().maxCoeff());
    std::vector<Eigen::Index> free_rows;
    Vec s(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (std::abs(r[i]) <= 1e-9 * scale) {
            free_rows.push_back(i);
            s[i] = 0.0;
        } else {
            s[i] = r[i] > 0 ? 1.0 : -1.0;
        }
    }
    auto violations = [&](const Vec& sv, Vec* grad_s) {
        const Vec g = X.transpose() * sv;
        Vec v(p);
        for (Eigen::Index j = 0; j < p; ++j) {
            if (b[j] != 0.0) v[j] = g[j] + lambda * (b[j] > 0 ? 1.0 : -1.0);
            else v[j] = std::abs(g[j]) > lambda ? g[j] - lambda * (g[j] > 0 ? 1.0 : -1.0) : 0.0;
        }
        if (grad_s) *grad_s = X * v;
        return v;
    };
    if (!free_rows.empty()) {
        // Start from the least-squares slopes for the equalities on the
        // nonzero coefficients, clipped to the box.
        const Eigen::Index f = static_cast<Eigen::Index>(free_rows.size());
        Mat XF(f, p);
        for (Eigen::Index k = 0; k < f; ++k) XF.row(k) = X.row(free_rows[static_cast<std::size_t>(k)]);
        Vec fixed = s;
        for (Eigen::Index i : free_rows) fixed[i] = 0.0;
        const Vec g0 = X.transpose() * fixed;
        std::vector<Eigen::Index> active;
        for (Eigen::Index j = 0; j < p; ++j)
            if (b[j] != 0.0) active.push_back(j);
        if (!active.empty()) {
            Mat A(static_cast<Eigen::Index>(active.size()), f);
            Vec rhs(A.rows());
            for (Eigen::Index a = 0; a < A.rows(); ++a) {
                const Eigen::Index j = active[static_cast<std::size_t>(a)];
                A.row(a) = XF.col(j).transpose();
                rhs[a] = -(g0[j] + lambda * (b[j] > 0 ? 1.0 : -1.0));
            }
            const Vec sf = A.completeOrthogonalDecomposition().solve(rhs);
            for (Eigen::Index k = 0; k < f; ++k)
                s[free_rows[static_cast<std::size_t>(k)]] = std::clamp(sf[k], -1.0, 1.0);
        }
        const double L = Eigen::JacobiSVD<Mat>(XF).singularValues()[0];
        const double step = 1.0 / std::max(1e-12, L * L);
        Vec best = s;
        double best_v = violations(s, nullptr).cwiseAbs().maxCoeff();
        for (int it = 0; it < 20000 && best_v > 1e-13; ++it) {
            Vec gs;
            violations(s, &gs);
            for (Eigen::Index i : free_rows) s[i] = std::clamp(s[i] - step * gs[i], -1.0, 1.0);
            const double v = violations(s, nullptr).cwiseAbs().maxCoeff();
            if (v < best_v) {
                best_v = v;
                best = s;
            }
        }
        s = best;
    }
    return violations(s, nullptr).cwiseAbs().maxCoeff();
}

}  // namespace oracle
