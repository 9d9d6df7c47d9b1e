#pragma once

#include "ssnet/model.hpp"
#include "ssnet/simgen.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ssnet {

class TooLargeT : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class MissingConstant : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// a1 in (1/2, 1) and the constants derived from it:
//   a2 = 1 - (1 - log(1 - a1)) (1 - a1),  a3 = 2 - 1/a1,  a4 = sqrt(a1 a2).
struct BoundConstants {
    double a1 = 0.9;
    double a2 = 0.0;
    double a3 = 0.0;
    double a4 = 0.0;
    double sigma = 1.0;
    // Strong-convexity constant, 1 for the linear model.
    double c = 1.0;

    // Throws std::invalid_argument outside the admissible ranges.
    static BoundConstants from_a1(double a1, double sigma = 1.0, double c = 1.0);
};

// delta_k = min over J in T with |T \ J| = k of ||(I - H_J) X_T beta_T||^2
// for k = 1..t, by enumeration of the subsets (the last entry, J empty, is
// ||X_T beta_T||^2). Throws TooLargeT when t > 12.
Vector compute_delta_k(const Matrix& X, const TrueModel& model);

// min_k delta_k / k over all supplied entries.
double compute_delta(const Vector& delta_k);

enum class ConeMode { kEnumerate, kSample };

struct ConeEstimate {
    double value = 0.0;
    // Enumerate mode: value is a certified lower bound within `gap` of the
    // infimum. Sample mode: value is attained at `minimizer` (upper bound).
    bool certified = false;
    double gap = 0.0;
    double a = 0.0;
    Vector minimizer;
};

// kappa_a = inf over the cone |v_Tc|_1 <= (1+a)/(1-a) |v_T|_1 of
// ||X v||^2 / |v_T|_1^2. Enumerate mode requires p <= 12.
ConeEstimate compatibility_factor(const Matrix& X, const SupportSet& T, double a, ConeMode mode,
                                  std::uint64_t seed = 1, int samples = 10000);

struct ScifEstimate {
    double value = 0.0;
    bool upper_bound_only = true;
    double a = 0.0;
    Vector minimizer;
};

// zeta_{a,inf}: infimum over the sign-restricted cone of
// |X'[mu(X(beta + v)) - mu(X beta)]|_inf / |v|_inf with mu the inverse link
// (identity for the quadratic family, sigmoid for the logistic family).
// Heuristic search; the orthonormal linear case is certified at 1.
ScifEstimate scif_estimate(const Matrix& X, const TrueModel& model, double a, Family family,
                           std::uint64_t seed = 1, int samples = 10000);

// T1: thresholded Lasso; T2: SS for GLM; T3: SS for the subgaussian linear
// model; T4: SS for general convex contrasts (universal constants set to
// 1, shape only).
enum class Theorem { kT1, kT2, kT3, kT4 };

std::string_view to_string(Theorem theorem);
Theorem parse_theorem(std::string_view name);

// Cone parameter at which the theorem needs zeta (T1, T2, T3) or kappa (T4).
double cone_parameter(const BoundConstants& constants, Theorem theorem);

struct LambdaInterval {
    Theorem theorem = Theorem::kT3;
    double lo = 0.0;
    double hi = 0.0;
    // lo >= hi (or the theorem's condition on its constants fails).
    bool empty = true;
    // The constants satisfy the theorem's side conditions.
    bool applicable = true;
    bool shape_only = false;
};

struct TheoryReport {
    Index n = 0;
    Index p = 0;
    Index t = 0;
    Index t_bar = 0;
    Family family = Family::kQuadratic;
    BoundConstants constants;
    Theorem theorem = Theorem::kT3;
    // delta_1..delta_{t-1}.
    Vector delta_k;
    // ||X_T beta_T||^2, the J = empty term.
    double full_drop = 0.0;
    // min over all k = 1..t of delta_k / k.
    double delta = 0.0;
    double beta_min = 0.0;
    double lipschitz_L = 1.0;
    std::optional<ConeEstimate> kappa;
    std::optional<ScifEstimate> zeta;
    std::optional<LambdaInterval> lambda_interval;
    std::optional<double> lambda;
    std::optional<double> bound_value;
};

// delta_{t-1}; +infinity when t = 1 (no proper nonempty submodel).
double delta_t_minus_1(const TheoryReport& report);

// Window for lambda^2 from the chosen theorem, evaluated term by term.
// Throws MissingConstant when the report lacks a required estimate or holds
// it at the wrong cone parameter.
LambdaInterval admissible_lambda_interval(const BoundConstants& constants,
                                          const TheoryReport& report, Theorem theorem);

// Right-hand side of the theorem's selection-error bound at lambda. For T4
// the universal constants are 1 and `lipschitz_L` enters the exponent.
double selection_error_bound(const BoundConstants& constants, double lambda, Theorem theorem,
                             double lipschitz_L = 1.0);

struct TheoryOptions {
    BoundConstants constants;
    Theorem theorem = Theorem::kT3;
    Family family = Family::kQuadratic;
    ConeMode kappa_mode = ConeMode::kSample;
    bool compute_kappa = false;
    int samples = 10000;
    std::uint64_t seed = 1;
    // Sparsity cap in the T2/T4 windows; floor(n / 2) when unset.
    std::optional<Index> t_bar;
    std::optional<double> lambda;
};

// Everything above on a unit-norm design. kappa is computed for T4 or when
// requested; zeta for T1-T3.
TheoryReport build_theory_report(const Matrix& X, const TrueModel& model,
                                 const TheoryOptions& options);

enum class TailKind { kLinearForm, kQuadraticForm };

struct TailCheck {
    double empirical = 0.0;
    double bound = 0.0;
    double standard_error = 0.0;
    bool pass = false;
};

// Monte-Carlo tail of eps'v/||v|| >= tau (linear) or eps'H eps >= m sigma^2 tau
// (quadratic, H a rank-m projection) under N(0, sigma^2 I_n) noise, next to
// exp(-tau^2 / (2 sigma^2)) or exp(-(m/2)(tau - 1 - log tau)).
TailCheck subgaussian_tail_check(TailKind kind, double sigma, Index n, Index m, double tau,
                                 int n_mc, std::uint64_t seed, unsigned threads = 1);

struct BoundValidation {
    double empirical_error_rate = 0.0;
    double standard_error = 0.0;
    double theorem_bound = 0.0;
    LambdaInterval interval;
    TheoryReport report;
    // Assertion made (interval nonempty and lambda inside it).
    bool asserted = false;
    bool pass = true;
    int runs = 0;
};

// Runs SS at lambda (unit-norm scale) on n_mc fresh replications of a
// quadratic plan and compares the misselection rate with the T3 bound. The
// interval is evaluated on the first replication's design.
BoundValidation empirical_bound_validation(const ExperimentPlan& plan, double lambda, int n_mc,
                                           std::uint64_t seed, double a1 = 0.9,
                                           unsigned threads = 1);

}  // namespace ssnet
