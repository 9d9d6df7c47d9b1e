#include "oracles.hpp"

#include "ssnet/lasso.hpp"
#include "ssnet/losses.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace ssnet;

namespace {

Dataset raw(Matrix X, Vector y, Family f = Family::kQuadratic) {
    Dataset d;
    d.X = std::move(X);
    d.y = std::move(y);
    d.family = f;
    d.standardization = Standardization::kNone;
    return d;
}

Dataset unit(Matrix X, Vector y, Family f = Family::kQuadratic) {
    return make_dataset(std::move(X), std::move(y), f);
}

Vector labels01(int n, std::uint32_t seed, const Vector* eta = nullptr) {
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Vector y(n);
    for (int i = 0; i < n; ++i) y[i] = u(gen) < (eta ? oracle::sigmoid((*eta)[i]) : 0.5) ? 1.0 : 0.0;
    return y;
}

}  // namespace

TEST(FitLasso, NullModelAboveLambdaMax) {
    const Dataset d = unit(oracle::gaussian_matrix(20, 5, 1), oracle::gaussian_vector(20, 2));
    const double top = (d.X.transpose() * d.y).cwiseAbs().maxCoeff();
    EXPECT_NEAR(lambda_max(d), top, 1e-12);
    const LassoFit fit = fit_lasso(d, top * 1.0001);
    EXPECT_TRUE(fit.beta.support().empty());
    EXPECT_TRUE(fit.converged);
}

TEST(FitLasso, OrthonormalSoftThresholding) {
    const Matrix Q = oracle::orthonormal_columns(6, 2, 3);
    // y with x1'y = 2 and x2'y = -1 plus a component orthogonal to both.
    Vector extra = oracle::gaussian_vector(6, 4);
    extra -= Q * (Q.transpose() * extra);
    const Vector y = Q.col(0) * 2.0 - Q.col(1) + extra;
    const LassoFit fit = fit_lasso(raw(Q, y), 0.5);
    EXPECT_NEAR(fit.beta.values[0], 1.5, 1e-10);
    EXPECT_NEAR(fit.beta.values[1], -0.5, 1e-10);
}

TEST(FitLasso, OrthonormalSoftThresholdingRandom) {
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix Q = oracle::orthonormal_columns(12, 5, 10 + trial);
        const Vector y = oracle::gaussian_vector(12, 40 + trial) * 2.0;
        const double lambda = 0.3 + 0.1 * trial;
        const Vector z = Q.transpose() * y;
        const LassoFit fit = fit_lasso(raw(Q, y), lambda);
        for (Index j = 0; j < 5; ++j) {
            const double want = std::copysign(std::max(0.0, std::abs(z[j]) - lambda), z[j]);
            EXPECT_NEAR(fit.beta.values[j], want, 1e-10);
            if (want == 0.0) EXPECT_EQ(fit.beta.values[j], 0.0);
        }
    }
}

TEST(FitLasso, CorrelatedSmallInstanceMatchesGridSearch) {
    Matrix X = oracle::gaussian_matrix(6, 3, 5);
    X.col(1) = 0.7 * X.col(0) + 0.3 * X.col(1);
    const Dataset d = unit(X, oracle::gaussian_vector(6, 6) * 2.0);
    for (double lambda : {0.05, 0.3, 1.0}) {
        const LassoFit fit = fit_lasso(d, lambda);
        auto f = [&](const Vector& b) {
            return oracle::lasso_objective(oracle::Kind::Quadratic, d.X, d.y, b, lambda);
        };
        const Vector best = oracle::grid_minimize(f, 3, 20.0);
        EXPECT_LE(f(fit.beta.values), f(best) + 1e-4);
        EXPECT_GE(f(fit.beta.values), f(best) - 1e-4);
    }
}

TEST(FitLasso, QuadraticKktOracleAndProbeOptimality) {
    const Dataset d = unit(oracle::gaussian_matrix(30, 12, 7), oracle::gaussian_vector(30, 8) * 3.0);
    const double lambda = 0.4;
    const LassoFit fit = fit_lasso(d, lambda);
    ASSERT_TRUE(fit.converged);
    EXPECT_LE(oracle::smooth_kkt(oracle::Kind::Quadratic, d.X, d.y, fit.beta.values, lambda), 1e-6);
    const double obj = oracle::lasso_objective(oracle::Kind::Quadratic, d.X, d.y, fit.beta.values, lambda);
    for (int k = 0; k < 100; ++k) {
        const Vector probe = fit.beta.values + oracle::gaussian_vector(12, 1000 + k) * (k % 2 ? 0.01 : 1.0);
        EXPECT_LE(obj, oracle::lasso_objective(oracle::Kind::Quadratic, d.X, d.y, probe, lambda) + 1e-6);
    }
}

TEST(FitLasso, SmoothFamiliesPassIndependentKkt) {
    const Matrix X = make_dataset(oracle::gaussian_matrix(40, 15, 9), Vector::Zero(40), Family::kQuadratic).X;
    Vector truth = Vector::Zero(15);
    truth[0] = 4;
    truth[3] = -3;
    const Vector eta = X * truth;
    Vector yh(40);
    for (int i = 0; i < 40; ++i) yh[i] = (eta[i] + oracle::gaussian_vector(40, 10)[i] > 0) ? 1.0 : -1.0;
    struct Case {
        Family f;
        oracle::Kind k;
        Vector y;
    };
    const Case cases[] = {{Family::kQuadratic, oracle::Kind::Quadratic, eta + oracle::gaussian_vector(40, 11)},
                          {Family::kLogistic, oracle::Kind::Logistic, labels01(40, 12, &eta)},
                          {Family::kSquaredHinge, oracle::Kind::SquaredHinge, yh}};
    for (const auto& c : cases) {
        const Dataset d = raw(X, c.y, c.f);
        for (double frac : {0.5, 0.1, 0.02}) {
            const double lambda = frac * lambda_max(d);
            const LassoFit fit = fit_lasso(d, lambda);
            EXPECT_TRUE(fit.converged) << to_string(c.f);
            EXPECT_LE(fit.kkt_residual, 1e-6);
            EXPECT_LE(oracle::smooth_kkt(c.k, X, c.y, fit.beta.values, lambda), 1e-6)
                << to_string(c.f) << " at " << frac;
        }
    }
}

TEST(FitLasso, LogisticSolversAgree) {
    const Matrix X = make_dataset(oracle::gaussian_matrix(50, 8, 13), Vector::Zero(50), Family::kQuadratic).X;
    Vector truth = Vector::Zero(8);
    truth[1] = 5;
    const Vector eta = X * truth;
    const Dataset d = raw(X, labels01(50, 14, &eta), Family::kLogistic);
    const double lambda = 0.2 * lambda_max(d);
    SolverConfig mm;
    mm.logistic = LogisticSolver::kMajorization;
    const LassoFit a = fit_lasso(d, lambda, mm);
    const LassoFit b = fit_lasso(d, lambda);
    ASSERT_TRUE(a.converged);
    ASSERT_TRUE(b.converged);
    EXPECT_EQ(a.beta.support(), b.beta.support());
    EXPECT_LT((a.beta.values - b.beta.values).cwiseAbs().maxCoeff(), 1e-4);
    EXPECT_LE(oracle::smooth_kkt(oracle::Kind::Logistic, X, d.y, a.beta.values, lambda), 1e-6);
}

TEST(FitLasso, AbsoluteCertificateAndObjective) {
    for (int trial = 0; trial < 5; ++trial) {
        const Matrix X = make_dataset(oracle::gaussian_matrix(15, 3, 20 + trial), Vector::Zero(15),
                                      Family::kQuadratic).X;
        Vector truth(3);
        truth << 2, 0, -1;
        const Vector y = X * truth + oracle::gaussian_vector(15, 30 + trial) * 0.3;
        const Dataset d = raw(X, y, Family::kAbsolute);
        const double lambda = 0.3;
        const LassoFit fit = fit_lasso(d, lambda);
        EXPECT_TRUE(fit.converged);
        EXPECT_LE(fit.kkt_residual, 1e-4);
        EXPECT_LE(oracle::absolute_certificate(X, y, fit.beta.values, lambda), 1e-4);
        auto f = [&](const Vector& b) {
            return oracle::lasso_objective(oracle::Kind::Absolute, X, y, b, lambda);
        };
        const Vector best = oracle::grid_minimize(f, 3, 8.0);
        EXPECT_LE(f(fit.beta.values), f(best) + 1e-4);
    }
}

TEST(FitLasso, UnpenalizedColumnIsStationary) {
    DatasetOptions o;
    o.intercept = true;
    const Vector y = oracle::gaussian_vector(25, 15).array() + 5.0;
    const Dataset d = make_dataset(oracle::gaussian_matrix(25, 6, 16), y, Family::kQuadratic, o);
    const LassoFit fit = fit_lasso(d, 0.9 * lambda_max(d));
    EXPECT_NE(fit.beta.values[0], 0.0);
    const Vector g = d.X.transpose() * (d.X * fit.beta.values - d.y);
    EXPECT_LE(std::abs(g[0]), 1e-6);
    EXPECT_LE(kkt_residual(d, fit.beta.values, fit.lambda), 1e-6);
}

TEST(FitLasso, ObjectiveTraceIsMonotone) {
    Matrix X = oracle::gaussian_matrix(30, 20, 17);
    X.col(1) += 0.9 * X.col(0);
    const Dataset d = unit(X, oracle::gaussian_vector(30, 18) * 2.0);
    SolverConfig cfg;
    cfg.record_objective = true;
    const LassoFit fit = fit_lasso(d, 0.05 * lambda_max(d), cfg);
    ASSERT_GE(fit.objective_trace.size(), 2u);
    for (std::size_t k = 1; k < fit.objective_trace.size(); ++k)
        EXPECT_LE(fit.objective_trace[k], fit.objective_trace[k - 1] + 1e-12);
}

TEST(FitLasso, ColumnPermutationPermutesSolution) {
    const Dataset d = unit(oracle::gaussian_matrix(25, 10, 19), oracle::gaussian_vector(25, 20) * 2.0);
    std::vector<Index> perm{3, 7, 0, 9, 1, 5, 8, 2, 6, 4};
    Matrix Xp(25, 10);
    for (Index k = 0; k < 10; ++k) Xp.col(k) = d.X.col(perm[k]);
    const Dataset dp = raw(Xp, d.y);
    const double lambda = 0.1;
    const LassoFit a = fit_lasso(d, lambda), b = fit_lasso(dp, lambda);
    for (Index k = 0; k < 10; ++k) {
        EXPECT_EQ(b.beta.values[k] == 0.0, a.beta.values[perm[k]] == 0.0);
        EXPECT_NEAR(b.beta.values[k], a.beta.values[perm[k]], 1e-8);
    }
}

TEST(FitLasso, NotConvergedCarriesIterate) {
    const Dataset d = unit(oracle::gaussian_matrix(30, 20, 21), oracle::gaussian_vector(30, 22));
    SolverConfig cfg;
    cfg.max_iter = 1;
    const LassoFit fit = fit_lasso(d, 0.01 * lambda_max(d), cfg);
    EXPECT_FALSE(fit.converged);
    try {
        require_converged(fit);
        FAIL();
    } catch (const NotConverged& e) {
        EXPECT_EQ(e.fit().beta.values, fit.beta.values);
    }
}

TEST(FitLasso, RejectsBadArguments) {
    const Dataset d = unit(oracle::gaussian_matrix(10, 3, 23), oracle::gaussian_vector(10, 24));
    EXPECT_THROW(fit_lasso(d, 0.0), std::invalid_argument);
    SolverConfig cfg;
    cfg.kkt_tol = 0.0;
    EXPECT_THROW(fit_lasso(d, 1.0, cfg), std::invalid_argument);
}

TEST(Path, FirstFitZeroAndAllCertified) {
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix X = oracle::gaussian_matrix(50, 100, 25 + trial);
        const Dataset base = unit(X, Vector::Zero(50));
        Vector truth = Vector::Zero(100);
        truth[0] = 3;
        truth[1] = -2;
        truth[10] = 2;
        const Dataset d = unit(X, base.X * truth + oracle::gaussian_vector(50, 60 + trial) * 0.5);
        const LambdaGrid grid = default_lambda_grid(d, 30);
        const auto path = fit_lasso_path(d, grid);
        ASSERT_EQ(path.size(), 30u);
        EXPECT_TRUE(path.back().beta.support().empty());
        for (std::size_t k = 0; k < path.size(); ++k) {
            EXPECT_DOUBLE_EQ(path[k].lambda, grid[k]);
            EXPECT_TRUE(path[k].converged);
            EXPECT_LE(oracle::smooth_kkt(oracle::Kind::Quadratic, d.X, d.y, path[k].beta.values, grid[k]), 1e-6);
        }
    }
}

// Support size is non-increasing in lambda on most adjacent pairs. With
// p > n the support saturates near n and fluctuates there, so the count
// uses designs with n > p.
TEST(Path, SupportSizeMostlyMonotone) {
    int monotone = 0, pairs = 0;
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix X = oracle::gaussian_matrix(100, 50, 125 + trial);
        const Dataset d = unit(X, oracle::gaussian_vector(100, 160 + trial) * 2.0);
        const auto path = fit_lasso_path(d, default_lambda_grid(d, 30));
        for (std::size_t k = 1; k < path.size(); ++k) {
            ++pairs;
            if (path[k].beta.support().size() <= path[k - 1].beta.support().size()) ++monotone;
        }
    }
    EXPECT_GE(monotone, 0.95 * pairs);
}

TEST(Path, FlaggedFitsStillReturned) {
    const Dataset d = unit(oracle::gaussian_matrix(20, 30, 27), oracle::gaussian_vector(20, 28));
    SolverConfig cfg;
    cfg.max_iter = 2;
    const auto path = fit_lasso_path(d, default_lambda_grid(d, 10), cfg);
    EXPECT_EQ(path.size(), 10u);
    bool any_flagged = false;
    for (const auto& f : path) any_flagged = any_flagged || !f.converged;
    EXPECT_TRUE(any_flagged);
}

TEST(Grid, EndpointsAndGeometricSpacing) {
    const Dataset d = unit(oracle::gaussian_matrix(20, 40, 29), oracle::gaussian_vector(20, 30));
    const double top = lambda_max(d);
    const LambdaGrid two = default_lambda_grid(d, 2);
    EXPECT_DOUBLE_EQ(two[0], 1e-3 * top);
    EXPECT_DOUBLE_EQ(two[1], top);
    const LambdaGrid g = default_lambda_grid(d, 50);
    const double r = g[1] / g[0];
    for (std::size_t k = 1; k < g.size(); ++k) EXPECT_NEAR(g[k] / g[k - 1], r, 1e-12);
    EXPECT_THROW(default_lambda_grid(d, 1), std::invalid_argument);
    const Dataset tall = unit(oracle::gaussian_matrix(40, 5, 31), oracle::gaussian_vector(40, 32));
    EXPECT_DOUBLE_EQ(default_lambda_ratio(tall), 1e-4);
}

TEST(Kkt, ResidualFormulaOnHandExample) {
    Matrix X(2, 2);
    X << 1, 0, 0, 1;
    Vector y(2);
    y << 3, 0.5;
    Vector b(2);
    b << 2, 0;
    // gradient = X'(Xb - y) = (-1, -0.5); lambda = 1: active term |-1 + 1| = 0,
    // inactive term max(0, 0.5 - 1) = 0.
    EXPECT_DOUBLE_EQ(kkt_residual(raw(X, y), b, 1.0), 0.0);
    EXPECT_DOUBLE_EQ(kkt_residual(raw(X, y), b, 0.25), 0.75);
    EXPECT_DOUBLE_EQ(lasso_objective(raw(X, y), b, 1.0), 0.5 * (1.0 + 0.25) + 2.0);
}
