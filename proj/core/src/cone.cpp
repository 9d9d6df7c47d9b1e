#include "ssnet/losses.hpp"
#include "ssnet/theory.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace ssnet {
namespace {

void check_cone_args(const Matrix& X, const SupportSet& T, double a) {
    if (!(a > 0.0 && a < 1.0)) throw std::invalid_argument("cone parameter a must lie in (0, 1)");
    if (T.empty()) throw std::invalid_argument("true support must be nonempty");
    if (T.indices().back() >= X.cols()) throw std::invalid_argument("true support exceeds p");
}

double largest_eigenvalue_of_gram(const Matrix& X) {
    const Matrix G = X.cols() <= X.rows() ? Matrix(X.transpose() * X) : Matrix(X * X.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(G, Eigen::EigenvaluesOnly);
    return std::max(0.0, es.eigenvalues().maxCoeff());
}

// Euclidean projection onto {x >= 0, sum x = r}.
void project_simplex(Eigen::Ref<Vector> x, double r) {
    const Index m = x.size();
    if (m == 0) return;
    std::vector<double> u(x.data(), x.data() + m);
    std::sort(u.begin(), u.end(), std::greater<>());
    double cumsum = 0.0;
    double theta = 0.0;
    for (Index k = 0; k < m; ++k) {
        cumsum += u[static_cast<std::size_t>(k)];
        const double cand = (cumsum - r) / static_cast<double>(k + 1);
        if (u[static_cast<std::size_t>(k)] - cand > 0.0) theta = cand;
    }
    x = (x.array() - theta).max(0.0).matrix();
}

// Projection onto {x >= 0, sum x <= r}.
void project_capped_simplex(Eigen::Ref<Vector> x, double r) {
    if (x.size() == 0) return;
    Vector clipped = x.cwiseMax(0.0);
    if (clipped.sum() <= r) {
        x = clipped;
        return;
    }
    project_simplex(x, r);
}

// Quadratic program of one T-orthant of the cone:
//   min ||X beta||^2,  beta_T = s * w (w in the unit simplex),
//   beta_Tc = u+ - u- (u+, u- >= 0, sum <= cap).
class OrthantProblem {
public:
    OrthantProblem(const Matrix& X, const std::vector<Index>& T, const std::vector<Index>& Tc,
                   Vector signs, double cap, double lipschitz)
        : X_(X), T_(T), Tc_(Tc), s_(std::move(signs)), cap_(cap), lip_(lipschitz) {}

    Index t() const { return static_cast<Index>(T_.size()); }
    Index m() const { return static_cast<Index>(Tc_.size()); }
    Index dim() const { return t() + 2 * m(); }

    Vector beta(const Vector& z) const {
        Vector b = Vector::Zero(X_.cols());
        for (Index k = 0; k < t(); ++k) b[T_[k]] = s_[k] * z[k];
        for (Index l = 0; l < m(); ++l) b[Tc_[l]] = z[t() + l] - z[t() + m() + l];
        return b;
    }

    double value(const Vector& z) const { return (X_ * beta(z)).squaredNorm(); }

    Vector gradient(const Vector& z) const {
        const Vector gb = 2.0 * (X_.transpose() * (X_ * beta(z)));
        Vector g(dim());
        for (Index k = 0; k < t(); ++k) g[k] = s_[k] * gb[T_[k]];
        for (Index l = 0; l < m(); ++l) {
            g[t() + l] = gb[Tc_[l]];
            g[t() + m() + l] = -gb[Tc_[l]];
        }
        return g;
    }

    void project(Vector& z) const {
        project_simplex(z.head(t()), 1.0);
        project_capped_simplex(z.tail(2 * m()), cap_);
    }

    // Frank-Wolfe duality gap; f(z) - gap bounds the orthant minimum below.
    double fw_gap(const Vector& z, const Vector& g) const {
        double gap = g.head(t()).dot(z.head(t())) - g.head(t()).minCoeff();
        if (m() > 0) {
            const double best = std::min(0.0, cap_ * g.tail(2 * m()).minCoeff());
            gap += g.tail(2 * m()).dot(z.tail(2 * m())) - best;
        }
        return std::max(0.0, gap);
    }

    struct Outcome {
        double upper = std::numeric_limits<double>::infinity();
        double lower = -std::numeric_limits<double>::infinity();
        Vector z;
    };

    // Accelerated projected gradient with function-value restart.
    Outcome solve(Vector z, int max_iter, double gap_tol) const {
        Outcome out;
        project(z);
        const double step = lip_ > 0.0 ? 1.0 / lip_ : 1.0;
        Vector x = z;
        Vector y = z;
        double theta = 1.0;
        double fx = value(x);
        out.upper = fx;
        out.z = x;
        for (int it = 0; it < max_iter; ++it) {
            if (it % 10 == 0) {
                const Vector g = gradient(x);
                const double gap = fw_gap(x, g);
                out.lower = std::max(out.lower, fx - gap);
                if (gap <= gap_tol * std::max(1.0, fx)) break;
            }
            Vector next = y - step * gradient(y);
            project(next);
            const double fn = value(next);
            if (fn > fx) {
                // Restart momentum from the last iterate.
                theta = 1.0;
                y = x;
                continue;
            }
            const double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
            y = next + ((theta - 1.0) / theta_next) * (next - x);
            theta = theta_next;
            x = std::move(next);
            fx = fn;
            if (fx < out.upper) {
                out.upper = fx;
                out.z = x;
            }
        }
        const Vector g = gradient(x);
        out.lower = std::max(out.lower, fx - fw_gap(x, g));
        return out;
    }

    Vector start_uniform() const {
        Vector z = Vector::Zero(dim());
        z.head(t()).setConstant(1.0 / static_cast<double>(t()));
        return z;
    }

    // Coordinates of a cone point with sign(beta_T) = s and |beta_T|_1 = 1.
    Vector encode(const Vector& b) const {
        Vector z = Vector::Zero(dim());
        for (Index k = 0; k < t(); ++k) z[k] = std::abs(b[T_[k]]);
        for (Index l = 0; l < m(); ++l) {
            const double v = b[Tc_[l]];
            z[t() + l] = std::max(v, 0.0);
            z[t() + m() + l] = std::max(-v, 0.0);
        }
        return z;
    }

private:
    const Matrix& X_;
    const std::vector<Index>& T_;
    const std::vector<Index>& Tc_;
    Vector s_;
    double cap_;
    double lip_;
};

std::vector<Index> complement(const SupportSet& T, Index p) {
    std::vector<Index> out;
    for (Index j = 0; j < p; ++j) {
        if (!T.contains(j)) out.push_back(j);
    }
    return out;
}

}  // namespace

ConeEstimate compatibility_factor(const Matrix& X, const SupportSet& T, double a, ConeMode mode,
                                  std::uint64_t seed, int samples) {
    check_cone_args(X, T, a);
    const Index p = X.cols();
    const std::vector<Index>& Tv = T.indices();
    const std::vector<Index> Tc = complement(T, p);
    const Index t = static_cast<Index>(Tv.size());
    const double cap = (1.0 + a) / (1.0 - a);
    // ||A||^2 <= 2 for the (w, u+, u-) parametrization.
    const double lip = 4.0 * largest_eigenvalue_of_gram(X) * 1.0000001;

    ConeEstimate est;
    est.a = a;
    if (mode == ConeMode::kEnumerate) {
        if (p > 12) throw std::invalid_argument("compatibility_factor: enumerate mode needs p <= 12");
        double lower = std::numeric_limits<double>::infinity();
        double upper = std::numeric_limits<double>::infinity();
        // beta and -beta give the same ratio: fix the sign of the first T entry.
        const unsigned patterns = 1u << (t - 1);
        for (unsigned mask = 0; mask < patterns; ++mask) {
            Vector s = Vector::Ones(t);
            for (Index k = 1; k < t; ++k) s[k] = (mask >> (k - 1)) & 1u ? -1.0 : 1.0;
            OrthantProblem prob(X, Tv, Tc, s, cap, lip);
            auto out = prob.solve(prob.start_uniform(), 500000, 1e-11);
            lower = std::min(lower, std::max(0.0, out.lower));
            if (out.upper < upper) {
                upper = out.upper;
                est.minimizer = prob.beta(out.z);
            }
        }
        est.value = std::min(lower, upper);
        est.gap = upper - est.value;
        est.certified = est.gap <= 1e-6 * std::max(1.0, upper);
        return est;
    }

    if (samples < 1) throw std::invalid_argument("compatibility_factor: samples must be >= 1");
    Rng rng = make_rng(seed, 0x6b617070ULL);
    std::exponential_distribution<double> expo(1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::bernoulli_distribution coin(0.5);
    const Index m = static_cast<Index>(Tc.size());

    struct Candidate {
        double f;
        Vector beta;
    };
    std::vector<Candidate> best;
    const std::size_t keep = 5;
    auto offer = [&](Vector b) {
        const double f = (X * b).squaredNorm();
        if (best.size() < keep || f < best.back().f) {
            best.push_back({f, std::move(b)});
            std::sort(best.begin(), best.end(), [](const auto& x, const auto& y) { return x.f < y.f; });
            if (best.size() > keep) best.pop_back();
        }
    };
    for (int s = 0; s < samples; ++s) {
        Vector b = Vector::Zero(p);
        double l1 = 0.0;
        for (Index k = 0; k < t; ++k) {
            const double w = expo(rng);
            b[Tv[k]] = coin(rng) ? w : -w;
            l1 += w;
        }
        b /= l1;
        if (m > 0) {
            const double u = unif(rng);
            const double r = u < 0.1 ? 0.0 : (u > 0.9 ? cap : cap * unif(rng));
            if (r > 0.0) {
                const Index k = 1 + static_cast<Index>(unif(rng) * static_cast<double>(m));
                double mass = 0.0;
                Vector dir = Vector::Zero(m);
                for (Index c = 0; c < std::min(k, m); ++c) {
                    const Index l = static_cast<Index>(unif(rng) * static_cast<double>(m)) % m;
                    const double w = expo(rng);
                    dir[l] += coin(rng) ? w : -w;
                }
                mass = dir.lpNorm<1>();
                if (mass > 0.0) {
                    for (Index l = 0; l < m; ++l) b[Tc[l]] = r * dir[l] / mass;
                }
            }
        }
        offer(std::move(b));
    }
    // Local refinement inside the orthants of the best samples.
    double value = std::numeric_limits<double>::infinity();
    for (const auto& cand : best) {
        Vector s(t);
        for (Index k = 0; k < t; ++k) s[k] = cand.beta[Tv[k]] < 0.0 ? -1.0 : 1.0;
        OrthantProblem prob(X, Tv, Tc, s, cap, lip);
        auto out = prob.solve(prob.encode(cand.beta), 2000, 1e-12);
        const Vector b = prob.beta(out.z);
        const double f = (X * b).squaredNorm();
        if (f < value) {
            value = f;
            est.minimizer = b;
        }
        if (cand.f < value) {
            value = cand.f;
            est.minimizer = cand.beta;
        }
    }
    est.value = value;
    est.certified = false;
    return est;
}

namespace {

// Numerator vector X'[mu(X(beta + v)) - mu(X beta)].
class ScifObjective {
public:
    ScifObjective(const Matrix& X, const Vector& beta, Family family)
        : X_(X), family_(family), eta0_(X * beta) {
        if (family_ == Family::kQuadratic) G_ = X.transpose() * X;
        else mu0_ = eta0_.unaryExpr([](double e) { return sigmoid(e); });
    }

    // Cost scales with the number of nonzeros of v.
    Vector numerator(const Vector& v) const {
        if (family_ == Family::kQuadratic) {
            Vector out = Vector::Zero(G_.rows());
            for (Index j = 0; j < v.size(); ++j) {
                if (v[j] != 0.0) out += v[j] * G_.col(j);
            }
            return out;
        }
        Vector eta = eta0_;
        for (Index j = 0; j < v.size(); ++j) {
            if (v[j] != 0.0) eta += v[j] * X_.col(j);
        }
        const Vector mu = eta.unaryExpr([](double e) { return sigmoid(e); });
        return X_.transpose() * (mu - mu0_);
    }

    bool linear() const { return family_ == Family::kQuadratic; }
    const Matrix& gram() const { return G_; }

private:
    const Matrix& X_;
    Family family_;
    Vector eta0_;
    Vector mu0_;
    Matrix G_;
};

double cone_slack(const Vector& v, const SupportSet& T, double cap) {
    double in = 0.0, out = 0.0;
    for (Index j = 0; j < v.size(); ++j) {
        if (T.contains(j)) in += std::abs(v[j]);
        else out += std::abs(v[j]);
    }
    return cap * in - out;
}

bool sign_feasible(const Vector& v, const Vector& num, const std::vector<Index>& Tc) {
    for (Index j : Tc) {
        if (v[j] * num[j] > 0.0) return false;
    }
    return true;
}

}  // namespace

ScifEstimate scif_estimate(const Matrix& X, const TrueModel& model, double a, Family family,
                           std::uint64_t seed, int samples) {
    check_cone_args(X, model.support, a);
    if (family != Family::kQuadratic && family != Family::kLogistic) {
        throw std::invalid_argument("scif_estimate: family must be quadratic or logistic");
    }
    if (model.beta.size() != X.cols()) throw std::invalid_argument("scif_estimate: beta has wrong length");
    const Index p = X.cols();
    const SupportSet& T = model.support;
    const std::vector<Index> Tc = complement(T, p);
    const double cap = (1.0 + a) / (1.0 - a);
    ScifObjective obj(X, model.beta, family);

    ScifEstimate est;
    est.a = a;
    if (obj.linear()) {
        const Matrix& G = obj.gram();
        if ((G - Matrix::Identity(p, p)).cwiseAbs().maxCoeff() <= 1e-10) {
            est.value = 1.0;
            est.upper_bound_only = false;
            est.minimizer = Vector::Unit(p, T[0]);
            return est;
        }
    }

    double best = std::numeric_limits<double>::infinity();
    Vector best_v;
    auto ratio = [&](const Vector& v, const Vector& num) {
        const double den = v.cwiseAbs().maxCoeff();
        return den > 0.0 ? num.cwiseAbs().maxCoeff() / den : std::numeric_limits<double>::infinity();
    };
    auto consider = [&](const Vector& v) {
        if (cone_slack(v, T, cap) < 0.0) return;
        const Vector num = obj.numerator(v);
        if (!sign_feasible(v, num, Tc)) return;
        const double r = ratio(v, num);
        if (r < best) {
            best = r;
            best_v = v;
        }
    };

    Rng rng = make_rng(seed, 0x7363696bULL);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double log_lo = std::log(1e-2), log_hi = std::log(1e1);
    auto magnitude = [&] { return obj.linear() ? 1.0 : std::exp(log_lo + (log_hi - log_lo) * unif(rng)); };

    for (Index j : T) consider(magnitude() * Vector::Unit(p, j));
    for (int s = 0; s < samples; ++s) {
        Vector v = Vector::Zero(p);
        const bool single = unif(rng) < 0.2;
        if (single) {
            v[T[static_cast<std::size_t>(unif(rng) * static_cast<double>(T.size())) % T.size()]] =
                normal(rng) > 0 ? 1.0 : -1.0;
        } else {
            for (Index j : T) v[j] = normal(rng);
        }
        const double in = v.lpNorm<1>();
        if (!Tc.empty() && unif(rng) > 0.2) {
            const double r = cap * in * unif(rng);
            const std::size_t k = 1 + static_cast<std::size_t>(unif(rng) * std::min<double>(Tc.size(), 10.0));
            Vector dir = Vector::Zero(p);
            for (std::size_t c = 0; c < k; ++c) {
                dir[Tc[static_cast<std::size_t>(unif(rng) * static_cast<double>(Tc.size())) % Tc.size()]] +=
                    normal(rng);
            }
            const double mass = dir.lpNorm<1>();
            if (mass > 0.0) v += (r / mass) * dir;
        }
        v *= magnitude() / v.cwiseAbs().maxCoeff();
        // Repair: drop complement coordinates that violate the sign restriction.
        for (int rep = 0; rep < 10; ++rep) {
            const Vector num = obj.numerator(v);
            bool changed = false;
            for (Index j : Tc) {
                if (v[j] * num[j] > 0.0) {
                    v[j] = 0.0;
                    changed = true;
                }
            }
            if (!changed) break;
        }
        consider(v);
    }

    // Pattern search on single coordinates from the best point.
    if (best_v.size() == p) {
        Vector v = best_v;
        Vector num_v = obj.numerator(v);
        double step = 0.5;
        const int max_passes = obj.linear() ? 200 : 20;
        for (int pass = 0; pass < max_passes && step > 1e-8; ++pass) {
            bool improved = false;
            const double scale = v.cwiseAbs().maxCoeff();
            for (Index j = 0; j < p; ++j) {
                for (double dirn : {1.0, -1.0}) {
                    const double delta = dirn * step * scale;
                    Vector trial = v;
                    trial[j] += delta;
                    if (cone_slack(trial, T, cap) < 0.0) continue;
                    Vector num = obj.linear() ? Vector(num_v + delta * obj.gram().col(j))
                                              : obj.numerator(trial);
                    if (!sign_feasible(trial, num, Tc)) continue;
                    const double r = ratio(trial, num);
                    if (r < best) {
                        best = r;
                        best_v = trial;
                        v = std::move(trial);
                        num_v = std::move(num);
                        improved = true;
                    }
                }
            }
            if (!improved) step *= 0.5;
        }
    }
    est.value = best;
    est.minimizer = best_v;
    est.upper_bound_only = true;
    return est;
}

}  // namespace ssnet
