#include "ssnet/theory.hpp"

#include "ssnet/losses.hpp"
#include "ssnet/parallel.hpp"
#include "ssnet/selection.hpp"

#include <Eigen/QR>
#include <fmt/format.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

namespace ssnet {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_delta_model(const TrueModel& model, Index p) {
    if (model.beta.size() != p) throw std::invalid_argument("true model has the wrong length");
    if (model.t() < 1) throw std::invalid_argument("true model must have t >= 1");
    if (model.t() > 12) throw TooLargeT(fmt::format("subset enumeration needs t <= 12, got {}", model.t()));
}

const ScifEstimate& require_zeta(const TheoryReport& report, double a) {
    if (!report.zeta) throw MissingConstant("the theorem needs a SCIF estimate");
    if (std::abs(report.zeta->a - a) > 1e-12) {
        throw MissingConstant(fmt::format("SCIF estimated at a = {} but the theorem needs a = {}", report.zeta->a, a));
    }
    return *report.zeta;
}

}  // namespace

BoundConstants BoundConstants::from_a1(double a1, double sigma, double c) {
    if (!(a1 > 0.5 && a1 < 1.0)) throw std::invalid_argument("a1 must lie in (1/2, 1)");
    if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be > 0");
    if (!(c > 0.0 && c <= 1.0)) throw std::invalid_argument("c must lie in (0, 1]");
    BoundConstants k;
    k.a1 = a1;
    k.a2 = 1.0 - (1.0 - std::log(1.0 - a1)) * (1.0 - a1);
    k.a3 = 2.0 - 1.0 / a1;
    k.a4 = std::sqrt(a1 * k.a2);
    k.sigma = sigma;
    k.c = c;
    return k;
}

Vector compute_delta_k(const Matrix& X, const TrueModel& model) {
    check_delta_model(model, X.cols());
    const SupportSet& T = model.support;
    const Index t = model.t();
    const Matrix XT = select_columns(X, T);
    Vector bT(t);
    for (Index k = 0; k < t; ++k) bT[k] = model.beta[T[static_cast<std::size_t>(k)]];
    const Vector v = XT * bT;

    Vector delta = Vector::Constant(t, kInf);
    const unsigned full = (1u << t) - 1u;
    for (unsigned mask = 0; mask < full; ++mask) {
        const Index dropped = t - std::popcount(mask);
        double resid;
        if (mask == 0) {
            resid = v.squaredNorm();
        } else {
            Matrix XJ(X.rows(), std::popcount(mask));
            Index c = 0;
            for (Index k = 0; k < t; ++k) {
                if ((mask >> k) & 1u) XJ.col(c++) = XT.col(k);
            }
            Eigen::ColPivHouseholderQR<Matrix> qr(XJ);
            resid = (v - XJ * qr.solve(v)).squaredNorm();
        }
        delta[dropped - 1] = std::min(delta[dropped - 1], resid);
    }
    return delta;
}

double compute_delta(const Vector& delta_k) {
    if (delta_k.size() == 0) throw std::invalid_argument("compute_delta: empty sequence");
    double best = kInf;
    for (Index k = 0; k < delta_k.size(); ++k) best = std::min(best, delta_k[k] / static_cast<double>(k + 1));
    return best;
}

std::string_view to_string(Theorem theorem) {
    switch (theorem) {
        case Theorem::kT1: return "T1";
        case Theorem::kT2: return "T2";
        case Theorem::kT3: return "T3";
        case Theorem::kT4: return "T4";
    }
    return "?";
}

Theorem parse_theorem(std::string_view name) {
    if (name == "T1" || name == "t1" || name == "1") return Theorem::kT1;
    if (name == "T2" || name == "t2" || name == "2") return Theorem::kT2;
    if (name == "T3" || name == "t3" || name == "3") return Theorem::kT3;
    if (name == "T4" || name == "t4" || name == "4") return Theorem::kT4;
    throw std::invalid_argument(fmt::format("unknown theorem '{}'", name));
}

double cone_parameter(const BoundConstants& constants, Theorem theorem) {
    return theorem == Theorem::kT2 ? constants.a4 : constants.a1;
}

double delta_t_minus_1(const TheoryReport& report) {
    if (report.t <= 1) return kInf;
    return report.delta_k[report.t - 2];
}

LambdaInterval admissible_lambda_interval(const BoundConstants& k, const TheoryReport& report,
                                          Theorem theorem) {
    if (report.p < 2) throw MissingConstant("the interval needs p >= 2");
    if (report.t < 1) throw MissingConstant("the interval needs t >= 1");
    LambdaInterval out;
    out.theorem = theorem;
    const double logp = std::log(static_cast<double>(report.p));
    const double s2 = k.sigma * k.sigma;
    const double t = static_cast<double>(report.t);
    const double excess = static_cast<double>(report.t_bar - report.t);
    const double dt1 = delta_t_minus_1(report);
    double lo2 = 0.0, hi2 = 0.0;
    switch (theorem) {
        case Theorem::kT1: {
            const double zeta = require_zeta(report, k.a1).value;
            lo2 = 2.0 * s2 * logp / (k.a1 * k.a1 * k.a2);
            hi2 = zeta * zeta * report.beta_min * report.beta_min / (4.0 * std::pow(1.0 + k.a1, 2));
            break;
        }
        case Theorem::kT2: {
            const double zeta = require_zeta(report, k.a4).value;
            lo2 = std::max(2.0 * s2 * logp / (k.a3 * k.a2 * k.a1 * k.c),
                           s2 * t / (std::pow(1.0 - k.a1, 2) * k.c));
            const double ball = excess > 0.0 ? k.c * dt1 / (16.0 * excess) : kInf;
            hi2 = std::min({ball, k.c * report.delta / std::pow(1.0 + std::sqrt(2.0 * (1.0 - k.a1)), 2),
                            zeta * zeta * report.beta_min * report.beta_min / (4.0 * std::pow(1.0 + k.a4, 2))});
            out.applicable = excess >= 0.0;
            break;
        }
        case Theorem::kT3: {
            const double a = k.a1;
            const double zeta = require_zeta(report, a).value;
            const double arg = 1.0 - (1.0 + std::log(2.0 * logp)) / (2.0 * logp);
            out.applicable = arg > 0.0 && a <= std::sqrt(arg);
            lo2 = 2.0 * s2 * logp / std::pow(a, 4);
            hi2 = std::min(zeta * zeta * report.beta_min * report.beta_min, report.delta) /
                  (4.0 * std::pow(1.0 + a, 2));
            break;
        }
        case Theorem::kT4: {
            if (!report.kappa) throw MissingConstant("T4 needs a compatibility-factor estimate");
            if (std::abs(report.kappa->a - k.a1) > 1e-12) {
                throw MissingConstant("compatibility factor estimated at the wrong cone parameter");
            }
            if (!std::isfinite(report.lipschitz_L)) throw MissingConstant("T4 needs a finite Lipschitz constant");
            const double kap = report.kappa->value;
            const double L2 = report.lipschitz_L * report.lipschitz_L;
            lo2 = std::max({logp / (k.a1 * k.a1), logp / k.c, t / (k.a2 * k.c)}) * L2;
            const double ball = excess > 0.0 ? k.c * dt1 / excess : kInf;
            hi2 = std::min({k.c * report.delta / std::pow(1.0 + std::sqrt(2.0 * k.a2), 2), ball,
                            std::pow(1.0 - k.a1, 2) * k.c * k.c * kap * kap * report.beta_min * report.beta_min});
            out.shape_only = true;
            out.applicable = excess >= 0.0;
            break;
        }
    }
    out.lo = std::sqrt(lo2);
    out.hi = std::sqrt(hi2);
    out.empty = !(out.lo < out.hi) || !out.applicable;
    return out;
}

double selection_error_bound(const BoundConstants& k, double lambda, Theorem theorem,
                             double lipschitz_L) {
    if (!(lambda > 0.0)) throw std::invalid_argument("selection_error_bound: lambda must be > 0");
    const double l2 = lambda * lambda;
    const double s2 = k.sigma * k.sigma;
    switch (theorem) {
        case Theorem::kT1:
            return 2.0 * std::exp(-(1.0 - k.a2) * k.a1 * k.a1 * l2 / (2.0 * s2));
        case Theorem::kT2:
            return 4.5 * std::exp(-k.a2 * (1.0 - k.a1) * k.c * l2 / (2.0 * s2));
        case Theorem::kT3: {
            const double a2 = k.a1 * k.a1;
            return 5.0 * std::exp(-a2 * (1.0 - a2) * l2 / (2.0 * s2));
        }
        case Theorem::kT4:
            if (!(lipschitz_L > 0.0) || !std::isfinite(lipschitz_L)) {
                throw std::invalid_argument("selection_error_bound: T4 needs a finite Lipschitz constant");
            }
            return std::exp(-l2 / (lipschitz_L * lipschitz_L) * std::min(k.a1 * k.a1, k.a2 * k.c));
    }
    return kInf;
}

TheoryReport build_theory_report(const Matrix& X, const TrueModel& model,
                                 const TheoryOptions& options) {
    check_delta_model(model, X.cols());
    TheoryReport r;
    r.n = X.rows();
    r.p = X.cols();
    r.t = model.t();
    r.t_bar = options.t_bar.value_or(X.rows() / 2);
    r.family = options.family;
    r.constants = options.constants;
    r.theorem = options.theorem;
    const Vector all = compute_delta_k(X, model);
    r.delta_k = all.head(r.t - 1);
    r.full_drop = all[r.t - 1];
    r.delta = compute_delta(all);
    r.beta_min = model.beta_min();
    r.lipschitz_L = LossFamily::of(options.family).lipschitz_L;

    const double a = cone_parameter(options.constants, options.theorem);
    if (options.theorem != Theorem::kT4) {
        const Family link = options.family == Family::kLogistic ? Family::kLogistic : Family::kQuadratic;
        r.zeta = scif_estimate(X, model, a, link, options.seed, options.samples);
    }
    if (options.theorem == Theorem::kT4 || options.compute_kappa) {
        r.kappa = compatibility_factor(X, model.support, options.constants.a1, options.kappa_mode,
                                       options.seed, options.samples);
    }
    if (options.theorem != Theorem::kT4 || std::isfinite(r.lipschitz_L)) {
        r.lambda_interval = admissible_lambda_interval(options.constants, r, options.theorem);
    }
    if (options.lambda) {
        r.lambda = options.lambda;
        if (options.theorem != Theorem::kT4 || std::isfinite(r.lipschitz_L)) {
            r.bound_value = selection_error_bound(options.constants, *options.lambda, options.theorem,
                                                  r.lipschitz_L);
        }
    }
    return r;
}

TailCheck subgaussian_tail_check(TailKind kind, double sigma, Index n, Index m, double tau,
                                 int n_mc, std::uint64_t seed, unsigned threads) {
    if (!(sigma > 0.0)) throw std::invalid_argument("tail check: sigma must be > 0");
    if (n < 1) throw std::invalid_argument("tail check: n must be >= 1");
    if (n_mc < 10000) throw std::invalid_argument("tail check: n_mc must be >= 10000");
    TailCheck out;
    Matrix Q;
    Vector nu;
    {
        Rng rng = make_rng(seed, 0);
        std::normal_distribution<double> normal(0.0, 1.0);
        if (kind == TailKind::kLinearForm) {
            if (!(tau > 0.0)) throw std::invalid_argument("tail check: tau must be > 0");
            nu = Vector::NullaryExpr(n, [&](Index) { return normal(rng); });
            nu /= nu.norm();
            out.bound = std::exp(-tau * tau / (2.0 * sigma * sigma));
        } else {
            if (!(tau > 1.0)) throw std::invalid_argument("tail check: tau must be > 1");
            if (m < 1 || m > n) throw std::invalid_argument("tail check: need 1 <= m <= n");
            const Matrix Z = Matrix::NullaryExpr(n, m, [&](Index, Index) { return normal(rng); });
            Eigen::HouseholderQR<Matrix> qr(Z);
            Q = qr.householderQ() * Matrix::Identity(n, m);
            const double md = static_cast<double>(m);
            out.bound = std::exp(-0.5 * md * (tau - 1.0 - std::log(tau)));
        }
    }
    const double threshold =
        kind == TailKind::kLinearForm ? tau : static_cast<double>(m) * sigma * sigma * tau;
    constexpr int kBlock = 4096;
    const int blocks = (n_mc + kBlock - 1) / kBlock;
    std::vector<long> hits(static_cast<std::size_t>(blocks), 0);
    parallel_for(static_cast<std::size_t>(blocks), threads, [&](std::size_t b) {
        Rng rng = make_rng(seed, 1 + b);
        std::normal_distribution<double> normal(0.0, sigma);
        const int begin = static_cast<int>(b) * kBlock;
        const int end = std::min(n_mc, begin + kBlock);
        Vector eps(n);
        long count = 0;
        for (int draw = begin; draw < end; ++draw) {
            for (Index i = 0; i < n; ++i) eps[i] = normal(rng);
            const double stat = kind == TailKind::kLinearForm ? eps.dot(nu)
                                                              : (Q.transpose() * eps).squaredNorm();
            if (stat >= threshold) ++count;
        }
        hits[b] = count;
    });
    long total = 0;
    for (long h : hits) total += h;
    out.empirical = static_cast<double>(total) / n_mc;
    out.standard_error = std::sqrt(out.empirical * (1.0 - out.empirical) / n_mc);
    out.pass = out.empirical <= out.bound + 3.0 * out.standard_error;
    return out;
}

BoundValidation empirical_bound_validation(const ExperimentPlan& plan, double lambda, int n_mc,
                                           std::uint64_t seed, double a1, unsigned threads) {
    validate_plan(plan);
    if (plan.family != Family::kQuadratic) throw std::invalid_argument("bound validation: quadratic plans only");
    if (n_mc < 1) throw std::invalid_argument("bound validation: n_mc must be >= 1");
    if (!(lambda > 0.0)) throw std::invalid_argument("bound validation: lambda must be > 0");
    BoundValidation out;
    const double root_n = std::sqrt(static_cast<double>(plan.n));
    {
        const Replication first = generate_replication(plan, seed, 0);
        const Dataset d = to_unit_norm(first.train);
        const TrueModel truth = TrueModel::from_beta(first.truth.beta * root_n, plan.sigma2);
        TheoryOptions opt;
        opt.constants = BoundConstants::from_a1(a1, std::sqrt(plan.sigma2), 1.0);
        opt.theorem = Theorem::kT3;
        opt.family = Family::kQuadratic;
        opt.lambda = lambda;
        opt.seed = seed;
        out.report = build_theory_report(d.X, truth, opt);
        out.interval = *out.report.lambda_interval;
        out.theorem_bound = *out.report.bound_value;
    }
    std::vector<char> miss(static_cast<std::size_t>(n_mc), 0);
    parallel_for(static_cast<std::size_t>(n_mc), threads, [&](std::size_t r) {
        const Replication rep = generate_replication(plan, seed, static_cast<int>(r));
        const Dataset d = to_unit_norm(rep.train);
        const SelectionResult res = select_ss(d, lambda);
        miss[r] = res.support != rep.truth.support ? 1 : 0;
    });
    int errors = 0;
    for (char c : miss) errors += c;
    out.runs = n_mc;
    out.empirical_error_rate = static_cast<double>(errors) / n_mc;
    out.standard_error = std::sqrt(out.empirical_error_rate * (1.0 - out.empirical_error_rate) / n_mc);
    out.asserted = !out.interval.empty && lambda >= out.interval.lo && lambda < out.interval.hi;
    out.pass = !out.asserted || out.empirical_error_rate <= out.theorem_bound + 3.0 * out.standard_error;
    return out;
}

}  // namespace ssnet
