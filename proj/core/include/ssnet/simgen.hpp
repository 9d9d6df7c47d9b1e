#pragma once

#include "ssnet/model.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace ssnet {

using Rng = std::mt19937_64;

// Generator for stream `stream` of a run seeded with `seed`; distinct
// streams are decorrelated through seed_seq.
Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0);
// Scalar seed logged for a replication; make_rng(derive_seed(s, r)) is the
// generator that replication uses.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t replication);

enum class BetaPreset { kBeta1, kBeta2 };

std::string_view to_string(BetaPreset preset);
BetaPreset parse_beta_preset(std::string_view name);

struct ExperimentPlan {
    std::string name;
    Index n = 100;
    Index p = 300;
    BetaPreset beta_preset = BetaPreset::kBeta1;
    double rho = 0.5;
    double sigma2 = 1.0;  // quadratic family only
    Family family = Family::kQuadratic;
    Index n_new = 1000;
    int replications = 100;
};

// Throws std::invalid_argument on an inconsistent plan.
void validate_plan(const ExperimentPlan& plan);

// Paper-scale plans N.1.5 ... N.2.9 and B.1.5 ... B.2.9, plus "-desk"
// variants with p / 10 and 100 replications.
const std::vector<ExperimentPlan>& builtin_plans();
// Throws std::out_of_range for an unknown id.
const ExperimentPlan& plan_by_name(std::string_view name);

// beta1 = (3, 1.5, 0, 0, 2, 0, ...) needs p >= 5.
// beta2 = (0, ..., 0, 2 s_1, ..., 2 s_10) with fair random signs, p >= 10.
TrueModel beta_preset(BetaPreset kind, Index p, Rng& rng, double sigma2 = 1.0);

// Rows i.i.d. N(0, Xi), Xi_ij = rho^|i-j|, by the AR(1) recursion.
// With `standardize` each column is then centred and scaled to squared
// norm n.
Matrix gen_ar1_design(Index n, Index p, double rho, Rng& rng, bool standardize = true);

// beta' Xi beta with Xi the population AR(1) covariance.
double ar1_quadratic_form(const Vector& beta, double rho);

// sqrt(beta' Xi beta / sigma2). For beta2 the root is averaged over all
// 2^10 equally likely sign patterns.
double snr(const ExperimentPlan& plan);

// Quadratic: X beta + N(0, sigma2); logistic: Bernoulli(sigmoid(x_i' beta)).
Vector gen_response(const Matrix& X, const TrueModel& model, Family family, Rng& rng);

struct Replication {
    std::uint64_t seed = 0;
    TrueModel truth;
    Dataset train;  // sqrt-n columns, no intercept
    Matrix X_new;   // evaluation design, same distribution and scaling
    Vector y_new;
};

Replication generate_replication(const ExperimentPlan& plan, std::uint64_t seed, int replication);

}  // namespace ssnet
