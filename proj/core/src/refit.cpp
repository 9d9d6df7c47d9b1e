#include "ssnet/refit.hpp"

#include "ssnet/lasso.hpp"
#include "ssnet/losses.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ssnet {
namespace {

Vector solve_spd(Matrix H, const Vector& g) {
    Eigen::LDLT<Matrix> ldlt(H);
    if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
        Vector x = ldlt.solve(g);
        if (x.allFinite()) return x;
    }
    const double ridge = 1e-10 * std::max(1.0, H.diagonal().cwiseAbs().maxCoeff());
    H.diagonal().array() += ridge;
    return H.ldlt().solve(g);
}

struct NewtonOutcome {
    Vector beta;
    bool converged = false;
    int iterations = 0;
};

// Runs outward along -step while the loss keeps falling. Under separation
// the loss decreases without bound in that direction and the run ends past
// the bound; otherwise the best point found is returned.
struct Expansion {
    Vector beta;
    Vector eta;
    double loss;
    bool escaped = false;
};

template <class Loss>
Expansion expand_along(const Matrix& Xj, const Vector& b, const Vector& step, double f, double bound,
                       const Loss& loss) {
    Expansion e{b, Xj * b, f};
    for (double t = 1.0; t < 1e12; t *= 2.0) {
        Vector trial = b - t * step;
        Vector trial_eta = Xj * trial;
        const double ft = loss(trial_eta);
        if (!(ft < e.loss)) break;
        e.beta = std::move(trial);
        e.eta = std::move(trial_eta);
        e.loss = ft;
        if (e.beta.cwiseAbs().maxCoeff() > bound) {
            e.escaped = true;
            break;
        }
    }
    return e;
}

NewtonOutcome newton_logistic(const Matrix& Xj, const Vector& y, Vector b,
                              const RefitOptions& opt) {
    NewtonOutcome out;
    auto loss = [&](const Vector& eta) { return loss_value(Family::kLogistic, eta, y); };
    Vector eta = Xj * b;
    double f = loss(eta);
    for (; out.iterations < opt.max_iter; ++out.iterations) {
        // mu - y and mu(1 - mu) without cancellation, so neither rounds to
        // zero while the fit runs off towards a separating direction.
        Vector r(eta.size()), w(eta.size());
        for (Index i = 0; i < eta.size(); ++i) {
            const double up = sigmoid(eta[i]), down = sigmoid(-eta[i]);
            r[i] = y[i] > 0.5 ? -down : up;
            w[i] = up * down;
        }
        const Vector g = Xj.transpose() * r;
        const Matrix H = Xj.transpose() * w.asDiagonal() * Xj;
        const Vector step = solve_spd(H, g);
        if (g.cwiseAbs().maxCoeff() <= opt.grad_tol) {
            const double scale = 1.0 + b.cwiseAbs().maxCoeff();
            if (!step.allFinite() || step.cwiseAbs().maxCoeff() <= 1e-6 * scale) {
                out.converged = true;
                break;
            }
            // Small gradient but a long Newton step: the iterate is drifting.
            Expansion e = expand_along(Xj, b, step, f, opt.separation_bound, loss);
            if (e.escaped) {
                b = std::move(e.beta);
                ++out.iterations;
                break;
            }
            if (!(e.loss < f)) {
                out.converged = true;
                break;
            }
            b = std::move(e.beta);
            eta = std::move(e.eta);
            f = e.loss;
            continue;
        }
        const double slope = -g.dot(step);
        double t = 1.0;
        bool moved = false;
        for (int h = 0; h < 50; ++h) {
            Vector trial = b - t * step;
            Vector trial_eta = Xj * trial;
            const double ft = loss(trial_eta);
            if (ft <= f + 1e-4 * t * std::min(slope, 0.0)) {
                b = std::move(trial);
                eta = std::move(trial_eta);
                f = ft;
                moved = true;
                break;
            }
            t *= 0.5;
        }
        if (!moved) break;
        if (b.cwiseAbs().maxCoeff() > opt.separation_bound) {
            ++out.iterations;
            break;
        }
    }
    out.beta = std::move(b);
    return out;
}

NewtonOutcome newton_squared_hinge(const Matrix& Xj, const Vector& y, Vector b,
                                   const RefitOptions& opt) {
    NewtonOutcome out;
    auto loss = [&](const Vector& eta) { return loss_value(Family::kSquaredHinge, eta, y); };
    Vector eta = Xj * b;
    double f = loss(eta);
    const Index k = Xj.cols();
    for (; out.iterations < opt.max_iter; ++out.iterations) {
        const Vector g = Xj.transpose() * contrast_derivatives(Family::kSquaredHinge, eta, y);
        if (g.cwiseAbs().maxCoeff() <= opt.grad_tol) {
            out.converged = true;
            break;
        }
        Matrix H = Matrix::Zero(k, k);
        for (Index i = 0; i < eta.size(); ++i) {
            if (1.0 - y[i] * eta[i] > 0.0) {
                H.selfadjointView<Eigen::Lower>().rankUpdate(Xj.row(i).transpose(), 2.0);
            }
        }
        H = H.selfadjointView<Eigen::Lower>();
        const Vector step = solve_spd(H, g);
        const double slope = -g.dot(step);
        double t = 1.0;
        bool moved = false;
        for (int h = 0; h < 50; ++h) {
            Vector trial = b - t * step;
            Vector trial_eta = Xj * trial;
            const double ft = loss(trial_eta);
            if (ft <= f + 1e-4 * t * std::min(slope, 0.0)) {
                b = std::move(trial);
                eta = std::move(trial_eta);
                f = ft;
                moved = true;
                break;
            }
            t *= 0.5;
        }
        if (!moved) break;
    }
    out.beta = std::move(b);
    return out;
}

// LAD optimality of b: with Z the |J| rows of smallest residual and all
// other residuals nonzero, b is optimal iff the slopes s_Z solving
// X_Z' s_Z = -X_{~Z}' sign(r_{~Z}) lie in [-1, 1].
bool lad_certified(const Matrix& Xj, const Vector& y, const Vector& b,
                   std::vector<Index>* zero_rows = nullptr) {
    const Index n = Xj.rows();
    const Index k = Xj.cols();
    const Vector r = y - Xj * b;
    std::vector<Index> rows(static_cast<std::size_t>(n));
    std::iota(rows.begin(), rows.end(), Index{0});
    std::partial_sort(rows.begin(), rows.begin() + k, rows.end(), [&](Index a, Index c) {
        return std::abs(r[a]) < std::abs(r[c]) || (std::abs(r[a]) == std::abs(r[c]) && a < c);
    });
    const double scale = std::max(1.0, y.cwiseAbs().maxCoeff());
    Matrix XZ(k, k);
    Vector rhs = Vector::Zero(k);
    std::vector<bool> in_z(static_cast<std::size_t>(n), false);
    for (Index a = 0; a < k; ++a) {
        const Index i = rows[static_cast<std::size_t>(a)];
        if (std::abs(r[i]) > 1e-9 * scale) return false;
        in_z[static_cast<std::size_t>(i)] = true;
        XZ.row(a) = Xj.row(i);
    }
    for (Index i = 0; i < n; ++i) {
        if (in_z[static_cast<std::size_t>(i)]) continue;
        const double sgn = r[i] > 0 ? 1.0 : (r[i] < 0 ? -1.0 : 0.0);
        rhs -= sgn * Xj.row(i).transpose();
    }
    Eigen::FullPivLU<Matrix> lu(XZ.transpose());
    if (!lu.isInvertible()) return false;
    const Vector s = lu.solve(rhs);
    if (zero_rows) zero_rows->assign(rows.begin(), rows.begin() + k);
    return s.allFinite() && s.cwiseAbs().maxCoeff() <= 1.0 + 1e-9;
}

// Exact interpolation of the |J| rows with the smallest residuals.
std::optional<Vector> lad_vertex(const Matrix& Xj, const Vector& y, const Vector& b) {
    const Index n = Xj.rows();
    const Index k = Xj.cols();
    const Vector r = (y - Xj * b).cwiseAbs();
    std::vector<Index> rows(static_cast<std::size_t>(n));
    std::iota(rows.begin(), rows.end(), Index{0});
    std::partial_sort(rows.begin(), rows.begin() + k, rows.end(),
                      [&](Index a, Index c) { return r[a] < r[c] || (r[a] == r[c] && a < c); });
    Matrix XZ(k, k);
    Vector yz(k);
    for (Index a = 0; a < k; ++a) {
        XZ.row(a) = Xj.row(rows[static_cast<std::size_t>(a)]);
        yz[a] = y[rows[static_cast<std::size_t>(a)]];
    }
    Eigen::FullPivLU<Matrix> lu(XZ);
    if (!lu.isInvertible()) return std::nullopt;
    Vector sol = lu.solve(yz);
    if (!sol.allFinite()) return std::nullopt;
    return sol;
}

NewtonOutcome irls_absolute(const Matrix& Xj, const Vector& y, Vector b, const RefitOptions& opt) {
    NewtonOutcome out;
    auto lad = [&](const Vector& c) { return (y - Xj * c).cwiseAbs().sum(); };
    const double scale = std::max(1.0, y.cwiseAbs().maxCoeff());
    double eps = std::max(0.1 * (y - Xj * b).cwiseAbs().mean(), 1e-6 * scale);
    while (eps > 1e-11 * scale && out.iterations < 50 * opt.max_iter) {
        for (int inner = 0; inner < 50; ++inner, ++out.iterations) {
            const Vector r = y - Xj * b;
            Vector w(r.size());
            for (Index i = 0; i < r.size(); ++i) w[i] = 1.0 / std::max(std::abs(r[i]), eps);
            const Matrix H = Xj.transpose() * w.asDiagonal() * Xj;
            const Vector next = solve_spd(H, Xj.transpose() * w.cwiseProduct(y));
            const double change = (next - b).cwiseAbs().maxCoeff();
            b = next;
            if (change <= 1e-12 * scale) break;
        }
        if (lad_certified(Xj, y, b)) break;
        if (auto v = lad_vertex(Xj, y, b); v && lad(*v) <= lad(b) + 1e-12 * scale) {
            if (lad_certified(Xj, y, *v)) {
                b = *v;
                break;
            }
        }
        eps *= 0.1;
    }
    out.converged = lad_certified(Xj, y, b);
    if (!out.converged) {
        if (auto v = lad_vertex(Xj, y, b)) {
            if (lad(*v) <= lad(b) + 1e-6) {
                if (lad_certified(Xj, y, *v) || lad(*v) < lad(b)) b = *v;
            }
        }
        out.converged = lad_certified(Xj, y, b);
    }
    out.beta = std::move(b);
    return out;
}

NewtonOutcome admm_absolute(const Matrix& Xj, const Vector& y, const Vector& start) {
    Dataset sub;
    sub.X = Xj;
    sub.y = y;
    sub.family = Family::kAbsolute;
    for (Index j = 0; j < Xj.cols(); ++j) sub.unpenalized.push_back(j);
    SolverConfig cfg;
    cfg.max_iter = 20000;
    cfg.absolute_kkt_tol = 1e-10;
    auto st = detail::solve_absolute_admm(sub, 0.0, Vector::Zero(Xj.cols()), start, cfg);
    NewtonOutcome out;
    out.beta = std::move(st.beta);
    out.iterations = st.iterations;
    out.converged = lad_certified(Xj, y, out.beta);
    return out;
}

}  // namespace

RankDeficient::RankDeficient(SupportSet support)
    : std::runtime_error("design restricted to " + support.to_string() +
                         " is rank deficient"),
      support_(std::move(support)) {}

bool has_full_column_rank(const Matrix& X, const SupportSet& J, double rank_tol) {
    if (J.empty()) return true;
    if (static_cast<Index>(J.size()) > X.rows()) return false;
    Eigen::ColPivHouseholderQR<Matrix> qr(select_columns(X, J));
    qr.setThreshold(rank_tol);
    return qr.rank() == static_cast<Index>(J.size());
}

RefitResult try_refit_ml(const Dataset& d, const SupportSet& J, const RefitOptions& options,
                         const Vector* init) {
    RefitResult res;
    res.support = J;
    const Index k = static_cast<Index>(J.size());
    if (k == 0) {
        res.beta_J = Vector(0);
        res.loss = null_loss(d);
        res.converged = true;
        res.rank_ok = true;
        return res;
    }
    if (k > d.n()) return res;

    const Matrix Xj = select_columns(d.X, J);
    Eigen::ColPivHouseholderQR<Matrix> qr(Xj);
    qr.setThreshold(options.rank_tol);
    if (qr.rank() < k) return res;
    res.rank_ok = true;

    Vector start = (init && init->size() == k) ? *init : Vector(Vector::Zero(k));
    switch (d.family) {
        case Family::kQuadratic:
            res.beta_J = qr.solve(d.y);
            res.converged = true;
            res.iterations = 1;
            break;
        case Family::kLogistic: {
            auto o = newton_logistic(Xj, d.y, std::move(start), options);
            res.beta_J = std::move(o.beta);
            res.converged = o.converged;
            res.iterations = o.iterations;
            break;
        }
        case Family::kSquaredHinge: {
            auto o = newton_squared_hinge(Xj, d.y, std::move(start), options);
            res.beta_J = std::move(o.beta);
            res.converged = o.converged;
            res.iterations = o.iterations;
            break;
        }
        case Family::kAbsolute: {
            Vector ls = (init && init->size() == k) ? *init : Vector(qr.solve(d.y));
            auto o = irls_absolute(Xj, d.y, ls, options);
            if (!o.converged) {
                auto fallback = admm_absolute(Xj, d.y, o.beta);
                const double lad_o = (d.y - Xj * o.beta).cwiseAbs().sum();
                const double lad_f = (d.y - Xj * fallback.beta).cwiseAbs().sum();
                if (fallback.converged || lad_f < lad_o) o = std::move(fallback);
            }
            res.beta_J = std::move(o.beta);
            res.converged = o.converged;
            res.iterations = o.iterations;
            break;
        }
    }
    const Vector eta = d.X * embed(J, res.beta_J, d.p());
    res.loss = loss_value(d.family, eta, d.y);
    return res;
}

RefitResult refit_ml(const Dataset& d, const SupportSet& J, const RefitOptions& options,
                     const Vector* init) {
    auto res = try_refit_ml(d, J, options, init);
    if (!res.rank_ok) throw RankDeficient(J);
    return res;
}

double null_loss(const Dataset& d) {
    return loss_value(d.family, Vector::Zero(d.n()), d.y);
}

RefitCache::RefitCache(const Dataset& d, RefitOptions options)
    : d_(d), options_(options) {}

const RefitResult& RefitCache::get(const SupportSet& J, const Vector* init) {
    {
        std::shared_lock lock(mutex_);
        if (auto it = cache_.find(J); it != cache_.end()) {
            ++hits_;
            return *it->second;
        }
    }
    ++misses_;
    auto fresh = std::make_unique<RefitResult>(try_refit_ml(d_, J, options_, init));
    std::unique_lock lock(mutex_);
    auto [it, inserted] = cache_.try_emplace(J, std::move(fresh));
    return *it->second;
}

std::size_t RefitCache::size() const {
    std::shared_lock lock(mutex_);
    return cache_.size();
}

}  // namespace ssnet
