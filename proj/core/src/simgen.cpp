#include "ssnet/simgen.hpp"

#include "ssnet/losses.hpp"

#include <cmath>
#include <fmt/format.h>
#include <stdexcept>

namespace ssnet {

Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return Rng(seq);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t replication) {
    Rng rng = make_rng(seed, replication);
    return rng();
}

std::string_view to_string(BetaPreset preset) {
    return preset == BetaPreset::kBeta1 ? "beta1" : "beta2";
}

BetaPreset parse_beta_preset(std::string_view name) {
    if (name == "beta1" || name == "1") return BetaPreset::kBeta1;
    if (name == "beta2" || name == "2") return BetaPreset::kBeta2;
    throw std::invalid_argument(fmt::format("unknown beta preset '{}'", name));
}

void validate_plan(const ExperimentPlan& plan) {
    if (plan.n < 2) throw std::invalid_argument("plan: n must be >= 2");
    const Index min_p = plan.beta_preset == BetaPreset::kBeta1 ? 5 : 10;
    if (plan.p < min_p) {
        throw std::invalid_argument(fmt::format("plan: {} needs p >= {}", to_string(plan.beta_preset), min_p));
    }
    if (!(plan.rho >= 0.0 && plan.rho < 1.0)) throw std::invalid_argument("plan: rho must lie in [0, 1)");
    if (plan.family == Family::kQuadratic && !(plan.sigma2 >= 0.0)) {
        throw std::invalid_argument("plan: sigma2 must be >= 0");
    }
    if (plan.family != Family::kQuadratic && plan.family != Family::kLogistic) {
        throw std::invalid_argument("plan: family must be quadratic or logistic");
    }
    if (plan.n_new < 1) throw std::invalid_argument("plan: n_new must be >= 1");
    if (plan.replications < 1) throw std::invalid_argument("plan: replications must be >= 1");
}

const std::vector<ExperimentPlan>& builtin_plans() {
    static const std::vector<ExperimentPlan> plans = [] {
        std::vector<ExperimentPlan> out;
        struct Row {
            const char* id;
            Index n, p;
            BetaPreset beta;
            double rho, sigma2;
            Family family;
            int reps;
        };
        const Row rows[] = {
            {"N.1.5", 100, 3000, BetaPreset::kBeta1, 0.5, 4.0, Family::kQuadratic, 1000},
            {"N.1.7", 100, 3000, BetaPreset::kBeta1, 0.7, 4.0, Family::kQuadratic, 1000},
            {"N.1.9", 100, 3000, BetaPreset::kBeta1, 0.9, 4.0, Family::kQuadratic, 1000},
            {"N.2.5", 200, 2000, BetaPreset::kBeta2, 0.5, 7.0, Family::kQuadratic, 1000},
            {"N.2.7", 200, 2000, BetaPreset::kBeta2, 0.7, 7.0, Family::kQuadratic, 1000},
            {"N.2.9", 200, 2000, BetaPreset::kBeta2, 0.9, 7.0, Family::kQuadratic, 1000},
            {"B.1.5", 300, 3000, BetaPreset::kBeta1, 0.5, 1.0, Family::kLogistic, 500},
            {"B.1.7", 300, 3000, BetaPreset::kBeta1, 0.7, 1.0, Family::kLogistic, 500},
            {"B.1.9", 300, 3000, BetaPreset::kBeta1, 0.9, 1.0, Family::kLogistic, 500},
            {"B.2.5", 500, 2000, BetaPreset::kBeta2, 0.5, 1.0, Family::kLogistic, 500},
            {"B.2.7", 500, 2000, BetaPreset::kBeta2, 0.7, 1.0, Family::kLogistic, 500},
            {"B.2.9", 500, 2000, BetaPreset::kBeta2, 0.9, 1.0, Family::kLogistic, 500},
        };
        for (const auto& r : rows) {
            ExperimentPlan plan{r.id, r.n, r.p, r.beta, r.rho, r.sigma2, r.family, 1000, r.reps};
            out.push_back(plan);
        }
        for (const auto& r : rows) {
            ExperimentPlan plan{std::string(r.id) + "-desk", r.n, r.p / 10, r.beta, r.rho, r.sigma2,
                                r.family, 1000, 100};
            out.push_back(plan);
        }
        return out;
    }();
    return plans;
}

const ExperimentPlan& plan_by_name(std::string_view name) {
    for (const auto& plan : builtin_plans()) {
        if (plan.name == name) return plan;
    }
    throw std::out_of_range(fmt::format("unknown plan '{}'", name));
}

TrueModel beta_preset(BetaPreset kind, Index p, Rng& rng, double sigma2) {
    Vector beta = Vector::Zero(p);
    if (kind == BetaPreset::kBeta1) {
        if (p < 5) throw std::invalid_argument("beta1 needs p >= 5");
        beta[0] = 3.0;
        beta[1] = 1.5;
        beta[4] = 2.0;
    } else {
        if (p < 10) throw std::invalid_argument("beta2 needs p >= 10");
        std::bernoulli_distribution coin(0.5);
        for (Index l = 0; l < 10; ++l) beta[p - 10 + l] = coin(rng) ? 2.0 : -2.0;
    }
    return TrueModel::from_beta(std::move(beta), sigma2);
}

Matrix gen_ar1_design(Index n, Index p, double rho, Rng& rng, bool standardize) {
    if (!(std::abs(rho) < 1.0)) throw std::invalid_argument("gen_ar1_design: |rho| must be < 1");
    std::normal_distribution<double> normal(0.0, 1.0);
    const double innov = std::sqrt(1.0 - rho * rho);
    Matrix X(n, p);
    // Row-major draw order keeps a row's recursion contiguous in the stream.
    for (Index i = 0; i < n; ++i) {
        double prev = normal(rng);
        X(i, 0) = prev;
        for (Index j = 1; j < p; ++j) {
            prev = rho * prev + innov * normal(rng);
            X(i, j) = prev;
        }
    }
    if (standardize) {
        const double target = std::sqrt(static_cast<double>(n));
        for (Index j = 0; j < p; ++j) {
            auto col = X.col(j);
            col.array() -= col.mean();
            const double norm = col.norm();
            if (norm > 0.0) col *= target / norm;
        }
    }
    return X;
}

double ar1_quadratic_form(const Vector& beta, double rho) {
    double total = 0.0;
    std::vector<Index> nz;
    for (Index j = 0; j < beta.size(); ++j) {
        if (beta[j] != 0.0) nz.push_back(j);
    }
    for (Index a : nz) {
        for (Index b : nz) {
            total += beta[a] * beta[b] * std::pow(rho, static_cast<double>(std::abs(a - b)));
        }
    }
    return total;
}

double snr(const ExperimentPlan& plan) {
    if (plan.family != Family::kQuadratic) throw std::invalid_argument("snr: quadratic plans only");
    if (!(plan.sigma2 > 0.0)) throw std::invalid_argument("snr: sigma2 must be > 0");
    if (plan.beta_preset == BetaPreset::kBeta1) {
        Rng unused = make_rng(0);
        const double form = ar1_quadratic_form(beta_preset(BetaPreset::kBeta1, plan.p, unused).beta, plan.rho);
        return std::sqrt(form / plan.sigma2);
    }
    // Expectation of the ratio over the 2^10 equally likely sign patterns.
    // Averaging the quadratic form first would cancel the cross terms and
    // make the value independent of rho.
    Vector beta = Vector::Zero(plan.p);
    double sum = 0.0;
    for (unsigned mask = 0; mask < 1024u; ++mask) {
        for (Index l = 0; l < 10; ++l) beta[plan.p - 10 + l] = (mask >> l) & 1u ? 2.0 : -2.0;
        sum += std::sqrt(ar1_quadratic_form(beta, plan.rho) / plan.sigma2);
    }
    return sum / 1024.0;
}

Vector gen_response(const Matrix& X, const TrueModel& model, Family family, Rng& rng) {
    const Vector eta = X * model.beta;
    Vector y(eta.size());
    if (family == Family::kQuadratic) {
        const double sd = std::sqrt(model.sigma2);
        std::normal_distribution<double> normal(0.0, 1.0);
        for (Index i = 0; i < y.size(); ++i) y[i] = eta[i] + sd * normal(rng);
    } else if (family == Family::kLogistic) {
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        for (Index i = 0; i < y.size(); ++i) y[i] = unif(rng) < sigmoid(eta[i]) ? 1.0 : 0.0;
    } else {
        throw std::invalid_argument("gen_response: family must be quadratic or logistic");
    }
    return y;
}

Replication generate_replication(const ExperimentPlan& plan, std::uint64_t seed, int replication) {
    validate_plan(plan);
    Replication rep;
    rep.seed = derive_seed(seed, static_cast<std::uint64_t>(replication));
    Rng rng = make_rng(rep.seed);
    rep.truth = beta_preset(plan.beta_preset, plan.p, rng, plan.sigma2);
    rep.train.X = gen_ar1_design(plan.n, plan.p, plan.rho, rng);
    rep.train.y = gen_response(rep.train.X, rep.truth, plan.family, rng);
    rep.train.family = plan.family;
    rep.train.standardization = Standardization::kSqrtN;
    rep.X_new = gen_ar1_design(plan.n_new, plan.p, plan.rho, rng);
    rep.y_new = gen_response(rep.X_new, rep.truth, plan.family, rng);
    return rep;
}

}  // namespace ssnet
