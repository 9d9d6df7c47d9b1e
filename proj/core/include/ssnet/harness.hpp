#pragma once

#include "ssnet/lasso.hpp"
#include "ssnet/selection.hpp"
#include "ssnet/simgen.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace ssnet {

// ||X_new (beta_true - beta_hat)||^2 / (n sigma2), n the training size.
double prediction_error_linear(const Matrix& X_new, const Vector& beta_true, const Vector& beta_hat,
                               Index n, double sigma2);
// Share of rows with 1{x'beta_hat > 0} != y; x'beta_hat = 0 predicts 0.
double prediction_error_logistic(const Matrix& X_new, const Vector& y_new, const Vector& beta_hat);

// 0.25, 0.5, ..., 7.5.
std::vector<double> default_c_list();
// lambda_k = sqrt(c_k log p sigma2).
LambdaGrid output_grid_linear(Index p, double sigma2, std::span<const double> c_list);
// lambda_k = sqrt(c_k log p).
LambdaGrid output_grid_logistic(Index p, std::span<const double> c_list);

struct CvResult {
    LambdaGrid grid;
    // Held-out loss per observation, times two (deviance for the GLMs).
    std::vector<double> mean_deviance;
    std::vector<double> se_deviance;
    std::size_t best = 0;
    // Full-data fits along the grid.
    std::vector<LassoFit> path;
};

// K-fold cross-validation of the Lasso path. Folds come from a seeded
// permutation of the rows.
CvResult cv_lasso(const Dataset& d, const LambdaGrid& grid, int folds, std::uint64_t seed,
                  const SolverConfig& cfg = {});

// Noise variance from the cross-validated Lasso: RSS / (n - s) with the
// Lasso residuals at the CV-deviance minimizer, s its support size plus the
// unpenalized columns. Quadratic family only.
NoiseEstimate estimate_sigma2_cv(const Dataset& d, const LambdaGrid& grid, int folds,
                                 std::uint64_t seed, const SolverConfig& cfg = {});

struct CvSelectionPoint {
    double lambda_k = 0.0;
    double mean_md = 0.0;
    // Held-out error: root mean squared error (quadratic), misclassification
    // share (logistic), mean contrast otherwise.
    double mean_pe = 0.0;
    double se_pe = 0.0;
};

// K-fold estimate of SSnet prediction error and model dimension at every
// output-grid value. The input grid is rebuilt on every training fold.
std::vector<CvSelectionPoint> cv_ssnet(const Dataset& d, int input_size, const LambdaGrid& output_grid,
                                       int folds, std::uint64_t seed, const SelectionConfig& cfg = {});

struct ResultRow {
    std::string plan;
    std::string method;
    int replication = 0;
    double c_k = 0.0;
    double lambda_k = 0.0;
    Index md = 0;
    double pe = 0.0;
    std::uint64_t seed = 0;
    bool converged = true;
};

struct CurvePoint {
    double c_k = 0.0;
    double lambda_k = 0.0;
    double mean_md = 0.0;
    double mean_pe = 0.0;
    double se_pe = 0.0;
    int n_reps = 0;
};

struct MethodCurve {
    std::string method;
    std::vector<CurvePoint> points;
};

struct ReplicationFailure {
    int replication = 0;
    std::uint64_t seed = 0;
    std::string message;
};

// Methods: "ss", "ssnet", "tl", "lasso-cv" (Lasso at the CV-deviance
// minimizer of the input grid; the same row at every c_k).
struct HarnessOptions {
    std::vector<std::string> methods{"ss", "ssnet"};
    // Empty: default_c_list().
    std::vector<double> c_list;
    // 0: the plan's replication count.
    int replications = 0;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    // 0: 50 for quadratic plans, 20 for logistic plans.
    int input_grid_size = 0;
    int cv_folds = 10;
    SelectionConfig selection;
};

struct RunResult {
    std::string plan;
    std::vector<ResultRow> rows;
    std::vector<MethodCurve> curves;
    std::vector<ReplicationFailure> failures;
};

RunResult run_plan(const ExperimentPlan& plan, const HarnessOptions& options);

// Per (method, c_k) means over the rows; methods in first-appearance order,
// c_k increasing.
std::vector<MethodCurve> aggregate(std::span<const ResultRow> rows);

void write_results_csv(std::ostream& out, std::span<const ResultRow> rows);
void write_aggregate_csv(std::ostream& out, const std::string& plan, std::span<const MethodCurve> curves);
// Parses a file written by write_results_csv.
std::vector<ResultRow> read_results_csv(std::istream& in);

// Mean PE against mean MD per method, with a dashed vertical marker at the
// point whose c_k equals marker_c.
std::string render_svg(const std::string& title, std::span<const MethodCurve> curves, double marker_c);

// 2.5 for quadratic plans, 2 for logistic plans.
double default_marker_c(Family family);

}  // namespace ssnet
