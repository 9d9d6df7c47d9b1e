#pragma once

#include "ssnet/lasso.hpp"
#include "ssnet/model.hpp"
#include "ssnet/refit.hpp"

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ssnet {

enum class Method { kTL, kSS, kSSnet };

std::string_view to_string(Method method);

// Supports over penalized columns only. Element k has size k + 1 and is a
// strict subset of element k + 1.
struct NestedFamily {
    std::vector<SupportSet> supports;
    double source_lambda = 0.0;
};

struct GicEntry {
    SupportSet support;
    double loss = 0.0;
    double penalty = 0.0;
    double gic = 0.0;
    bool converged = true;
};

struct GicTrace {
    std::vector<GicEntry> entries;
    std::size_t chosen = 0;
};

struct SelectionResult {
    Method method = Method::kSS;
    // Selected penalized columns. Unpenalized columns are always fitted but
    // never listed here.
    SupportSet support;
    // Refit on support plus the unpenalized columns, embedded in R^p.
    CoefficientVector coefficients;
    double loss = 0.0;
    // GIC penalty level.
    double lambda = 0.0;
    GicTrace trace;
    // Lasso screening fit(s) reached the KKT tolerance.
    bool lasso_converged = true;
    // Refit on the chosen support converged.
    bool refit_converged = true;
};

struct SelectionConfig {
    SolverConfig solver;
    RefitOptions refit;
    // Largest candidate size; floor(n / 2) when unset.
    std::optional<Index> max_size;
    // Workers for the refits of a candidate family.
    unsigned threads = 1;
};

class MissingParameter : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// l_J + lambda^2 / 2 * |J|.
double gic(double loss, Index size, double lambda);

// Argmin of the GIC values; ties go to the smaller support, then to the
// lexicographically smaller one.
std::size_t gic_argmin(std::span<const GicEntry> entries);

// Penalized columns with |beta_j| > tau, refit. Throws RankDeficient.
SelectionResult threshold_lasso(const Dataset& d, const LassoFit& fit, double tau,
                                const RefitOptions& refit = {});

// Prefixes of the nonzero penalized coefficients ordered by decreasing
// magnitude (ties by index), truncated at max_size and at the first prefix
// whose design (with the unpenalized columns) is rank deficient.
NestedFamily nested_family(const Dataset& d, const LassoFit& fit, Index max_size,
                           double rank_tol = 1e-10);

// Candidate sizes default to floor(n / 2).
Index default_max_size(const Dataset& d);

// Lasso at lambda, nested family, GIC with the same lambda over the family
// and the null model.
SelectionResult select_ss(const Dataset& d, double lambda, const SelectionConfig& cfg = {});

// GIC over a fixed candidate list (the null model is added when absent).
SelectionResult select_from_candidates(const Dataset& d, std::span<const SupportSet> candidates,
                                       double lambda, RefitCache& cache, Method method);

struct SsnetResult {
    std::vector<SelectionResult> selections;  // one per output-grid value
    std::vector<SupportSet> candidates;       // deduplicated union family
    std::vector<LassoFit> path;               // screening fits, input-grid order
};

// Screens along the input grid, pools the nested families and runs GIC at
// every output-grid value over the pooled family plus the null model.
SsnetResult select_ssnet_full(const Dataset& d, const LambdaGrid& input_grid,
                              const LambdaGrid& output_grid, const SelectionConfig& cfg = {});
std::vector<SelectionResult> select_ssnet(const Dataset& d, const LambdaGrid& input_grid,
                                          const LambdaGrid& output_grid,
                                          const SelectionConfig& cfg = {});

// Unit-norm scale: sqrt(2 sigma2 log p) for the quadratic family and
// sqrt(log p / (2 c)) for the logistic family (c defaults to 1/4).
// Throws MissingParameter when sigma2 is absent for the quadratic family,
// for the other families, and when p < 2.
double safest_lambda(Family family, Index n, Index p, std::optional<double> sigma2 = std::nullopt,
                     std::optional<double> c = std::nullopt);

// GIC levels lambda_k = sqrt(c_k log p sigma2) (quadratic) or
// sqrt(c_k log p) (logistic), increasing in c_k.
LambdaGrid gic_output_grid(Family family, Index p, std::span<const double> c_values,
                           std::optional<double> sigma2 = std::nullopt);

struct NoiseEstimate {
    double sigma2 = 0.0;
    SupportSet support;  // penalized part of the support used
};

// RSS / (n - s) from the refit of the largest candidate of size at most
// floor(n / 2); s counts the unpenalized columns.
NoiseEstimate estimate_sigma2(const Dataset& d, std::span<const SupportSet> candidates,
                              const RefitOptions& refit = {});

}  // namespace ssnet
