#include "ssnet/harness.hpp"

#include "ssnet/losses.hpp"
#include "ssnet/parallel.hpp"
#include "ssnet/refit.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

namespace ssnet {
namespace {

Dataset row_subset(const Dataset& d, const std::vector<Index>& rows) {
    Dataset s;
    s.X.resize(static_cast<Index>(rows.size()), d.p());
    s.y.resize(static_cast<Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        s.X.row(static_cast<Index>(i)) = d.X.row(rows[i]);
        s.y[static_cast<Index>(i)] = d.y[rows[i]];
    }
    s.family = d.family;
    s.standardization = Standardization::kNone;
    s.unpenalized = d.unpenalized;
    s.names = d.names;
    return s;
}

std::vector<int> fold_labels(Index n, int folds, std::uint64_t seed) {
    if (folds < 2 || folds > n) throw std::invalid_argument("cross-validation needs 2 <= folds <= n");
    std::vector<Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), Index{0});
    Rng rng = make_rng(seed, 0x6366ULL);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<int> label(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < perm.size(); ++i) label[static_cast<std::size_t>(perm[i])] = static_cast<int>(i % folds);
    return label;
}

struct Split {
    std::vector<Index> train, test;
};

Split split_for(const std::vector<int>& label, int fold) {
    Split s;
    for (std::size_t i = 0; i < label.size(); ++i) {
        (label[i] == fold ? s.test : s.train).push_back(static_cast<Index>(i));
    }
    return s;
}

std::pair<double, double> mean_se(const std::vector<double>& v) {
    const double n = static_cast<double>(v.size());
    if (v.empty()) return {0.0, 0.0};
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= n;
    if (v.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

double held_out_error(const Dataset& test, const Vector& beta) {
    const Vector eta = test.X * beta;
    const double m = static_cast<double>(test.n());
    switch (test.family) {
        case Family::kQuadratic: return std::sqrt((test.y - eta).squaredNorm() / m);
        case Family::kLogistic: return prediction_error_logistic(test.X, test.y, beta);
        default: return loss_value(test.family, eta, test.y) / m;
    }
}

Index penalized_size(const Dataset& d, const Vector& beta) {
    Index s = 0;
    for (Index j = 0; j < beta.size(); ++j) {
        if (beta[j] != 0.0 && d.is_penalized(j)) ++s;
    }
    return s;
}

}  // namespace

double prediction_error_linear(const Matrix& X_new, const Vector& beta_true, const Vector& beta_hat,
                               Index n, double sigma2) {
    if (n < 1 || !(sigma2 > 0.0)) throw std::invalid_argument("prediction_error_linear: need n >= 1, sigma2 > 0");
    return (X_new * (beta_true - beta_hat)).squaredNorm() / (static_cast<double>(n) * sigma2);
}

double prediction_error_logistic(const Matrix& X_new, const Vector& y_new, const Vector& beta_hat) {
    const Vector eta = X_new * beta_hat;
    Index wrong = 0;
    for (Index i = 0; i < eta.size(); ++i) {
        const double predicted = eta[i] > 0.0 ? 1.0 : 0.0;
        if (predicted != y_new[i]) ++wrong;
    }
    return static_cast<double>(wrong) / static_cast<double>(eta.size());
}

std::vector<double> default_c_list() {
    std::vector<double> c;
    for (int k = 1; k <= 30; ++k) c.push_back(0.25 * k);
    return c;
}

LambdaGrid output_grid_linear(Index p, double sigma2, std::span<const double> c_list) {
    return gic_output_grid(Family::kQuadratic, p, c_list, sigma2);
}

LambdaGrid output_grid_logistic(Index p, std::span<const double> c_list) {
    return gic_output_grid(Family::kLogistic, p, c_list);
}

CvResult cv_lasso(const Dataset& d, const LambdaGrid& grid, int folds, std::uint64_t seed,
                  const SolverConfig& cfg) {
    const auto label = fold_labels(d.n(), folds, seed);
    std::vector<std::vector<double>> per_lambda(grid.size());
    for (int f = 0; f < folds; ++f) {
        const Split s = split_for(label, f);
        const Dataset train = row_subset(d, s.train);
        const Dataset test = row_subset(d, s.test);
        const auto path = fit_lasso_path(train, grid, cfg);
        for (std::size_t k = 0; k < grid.size(); ++k) {
            const Vector eta = test.X * path[k].beta.values;
            per_lambda[k].push_back(2.0 * loss_value(d.family, eta, test.y) / static_cast<double>(test.n()));
        }
    }
    CvResult out{grid, {}, {}, 0, {}};
    for (const auto& v : per_lambda) {
        const auto [m, se] = mean_se(v);
        out.mean_deviance.push_back(m);
        out.se_deviance.push_back(se);
    }
    // Ties resolved towards the larger lambda.
    for (std::size_t k = 1; k < grid.size(); ++k) {
        if (out.mean_deviance[k] <= out.mean_deviance[out.best]) out.best = k;
    }
    out.path = fit_lasso_path(d, grid, cfg);
    return out;
}

NoiseEstimate estimate_sigma2_cv(const Dataset& d, const LambdaGrid& grid, int folds,
                                 std::uint64_t seed, const SolverConfig& cfg) {
    if (d.family != Family::kQuadratic) {
        throw std::invalid_argument("estimate_sigma2_cv: quadratic family only");
    }
    const CvResult cv = cv_lasso(d, grid, folds, seed, cfg);
    const LassoFit& fit = cv.path[cv.best];
    NoiseEstimate est;
    est.support = fit.beta.support().minus(d.unpenalized_set());
    const double s = static_cast<double>(est.support.size() + d.unpenalized_set().size());
    const double dof = static_cast<double>(d.n()) - s;
    if (dof <= 0.0) throw std::invalid_argument("estimate_sigma2_cv: no residual degrees of freedom");
    est.sigma2 = (d.y - d.X * fit.beta.values).squaredNorm() / dof;
    return est;
}

std::vector<CvSelectionPoint> cv_ssnet(const Dataset& d, int input_size, const LambdaGrid& output_grid,
                                       int folds, std::uint64_t seed, const SelectionConfig& cfg) {
    const auto label = fold_labels(d.n(), folds, seed);
    std::vector<std::vector<double>> md(output_grid.size()), pe(output_grid.size());
    for (int f = 0; f < folds; ++f) {
        const Split s = split_for(label, f);
        const Dataset train = row_subset(d, s.train);
        const Dataset test = row_subset(d, s.test);
        const LambdaGrid input = default_lambda_grid(train, input_size);
        const auto sel = select_ssnet(train, input, output_grid, cfg);
        for (std::size_t k = 0; k < sel.size(); ++k) {
            md[k].push_back(static_cast<double>(sel[k].support.size()));
            pe[k].push_back(held_out_error(test, sel[k].coefficients.values));
        }
    }
    std::vector<CvSelectionPoint> out;
    for (std::size_t k = 0; k < output_grid.size(); ++k) {
        const auto [pm, pse] = mean_se(pe[k]);
        out.push_back({output_grid[k], mean_se(md[k]).first, pm, pse});
    }
    return out;
}

RunResult run_plan(const ExperimentPlan& plan, const HarnessOptions& options) {
    validate_plan(plan);
    for (const auto& m : options.methods) {
        if (m != "ss" && m != "ssnet" && m != "tl" && m != "lasso-cv") {
            throw std::invalid_argument(fmt::format("unknown method '{}'", m));
        }
    }
    const std::vector<double> c_list = options.c_list.empty() ? default_c_list() : options.c_list;
    for (std::size_t k = 0; k < c_list.size(); ++k) {
        if (!(c_list[k] > 0.0) || (k > 0 && !(c_list[k] > c_list[k - 1]))) {
            throw std::invalid_argument("c list must be positive and increasing");
        }
    }
    const int reps = options.replications > 0 ? options.replications : plan.replications;
    const bool linear = plan.family == Family::kQuadratic;
    const int input_size = options.input_grid_size > 0 ? options.input_grid_size : (linear ? 50 : 20);
    const LambdaGrid out_grid = linear ? output_grid_linear(plan.p, plan.sigma2, c_list)
                                       : output_grid_logistic(plan.p, c_list);

    std::vector<std::vector<ResultRow>> per_rep(static_cast<std::size_t>(reps));
    std::vector<std::optional<ReplicationFailure>> failed(static_cast<std::size_t>(reps));
    parallel_for(static_cast<std::size_t>(reps), options.threads, [&](std::size_t r) {
        const int rep_index = static_cast<int>(r);
        std::uint64_t rep_seed = derive_seed(options.seed, r);
        try {
            const Replication rep = generate_replication(plan, options.seed, rep_index);
            rep_seed = rep.seed;
            const Dataset d = to_unit_norm(rep.train);
            const double root_n = std::sqrt(static_cast<double>(plan.n));
            auto pe = [&](const Vector& beta_unit) {
                const Vector b = beta_unit / root_n;
                return linear ? prediction_error_linear(rep.X_new, rep.truth.beta, b, plan.n, plan.sigma2)
                              : prediction_error_logistic(rep.X_new, rep.y_new, b);
            };
            auto& rows = per_rep[r];
            auto emit = [&](const std::string& method, std::size_t k, double lambda, Index md, double err,
                            bool converged) {
                rows.push_back({plan.name, method, rep_index, c_list[k], lambda, md, err, rep.seed, converged});
            };
            const Index max_size = options.selection.max_size.value_or(default_max_size(d));

            std::vector<LassoFit> out_path;
            std::optional<RefitCache> cache;
            auto need_out_path = [&] {
                if (out_path.empty()) {
                    out_path = fit_lasso_path(d, out_grid, options.selection.solver);
                    cache.emplace(d, options.selection.refit);
                }
            };
            for (const auto& method : options.methods) {
                if (method == "ss") {
                    need_out_path();
                    for (std::size_t k = 0; k < out_grid.size(); ++k) {
                        const auto fam = nested_family(d, out_path[k], max_size, options.selection.refit.rank_tol);
                        const auto res = select_from_candidates(d, fam.supports, out_grid[k], *cache, Method::kSS);
                        emit(method, k, out_grid[k], static_cast<Index>(res.support.size()),
                             pe(res.coefficients.values), out_path[k].converged && res.refit_converged);
                    }
                } else if (method == "tl") {
                    need_out_path();
                    for (std::size_t k = 0; k < out_grid.size(); ++k) {
                        const Vector& b = out_path[k].beta.values;
                        std::vector<Index> keep;
                        for (Index j = 0; j < b.size(); ++j) {
                            if (d.is_penalized(j) && std::abs(b[j]) > out_grid[k]) keep.push_back(j);
                        }
                        const SupportSet J = SupportSet::from_unsorted(std::move(keep));
                        const SupportSet full = J.united(d.unpenalized_set());
                        const RefitResult& fit = cache->get(full);
                        const Vector coef = fit.rank_ok ? embed(full, fit.beta_J, d.p()) : Vector::Zero(d.p());
                        emit(method, k, out_grid[k], static_cast<Index>(J.size()), pe(coef),
                             out_path[k].converged && fit.rank_ok && fit.converged);
                    }
                } else if (method == "ssnet") {
                    const LambdaGrid input = default_lambda_grid(d, input_size);
                    const auto res = select_ssnet_full(d, input, out_grid, options.selection);
                    for (std::size_t k = 0; k < out_grid.size(); ++k) {
                        const auto& s = res.selections[k];
                        emit(method, k, out_grid[k], static_cast<Index>(s.support.size()),
                             pe(s.coefficients.values), s.lasso_converged && s.refit_converged);
                    }
                } else {
                    const LambdaGrid input = default_lambda_grid(d, input_size);
                    const auto cv = cv_lasso(d, input, options.cv_folds, derive_seed(rep.seed, 1),
                                             options.selection.solver);
                    const LassoFit& fit = cv.path[cv.best];
                    const double err = pe(fit.beta.values);
                    const Index md = penalized_size(d, fit.beta.values);
                    for (std::size_t k = 0; k < out_grid.size(); ++k) {
                        emit(method, k, fit.lambda, md, err, fit.converged);
                    }
                }
            }
        } catch (const std::exception& e) {
            per_rep[r].clear();
            failed[r] = ReplicationFailure{rep_index, rep_seed, e.what()};
        }
    });

    RunResult out;
    out.plan = plan.name;
    for (std::size_t r = 0; r < per_rep.size(); ++r) {
        if (failed[r]) {
            out.failures.push_back(*failed[r]);
            continue;
        }
        out.rows.insert(out.rows.end(), per_rep[r].begin(), per_rep[r].end());
    }
    out.curves = aggregate(out.rows);
    return out;
}

std::vector<MethodCurve> aggregate(std::span<const ResultRow> rows) {
    std::vector<std::string> order;
    std::map<std::string, std::map<double, std::vector<const ResultRow*>>> groups;
    for (const auto& row : rows) {
        if (!groups.count(row.method)) order.push_back(row.method);
        groups[row.method][row.c_k].push_back(&row);
    }
    std::vector<MethodCurve> curves;
    for (const auto& method : order) {
        MethodCurve curve{method, {}};
        for (const auto& [c, members] : groups[method]) {
            std::vector<double> pe;
            double md = 0.0;
            for (const ResultRow* r : members) {
                pe.push_back(r->pe);
                md += static_cast<double>(r->md);
            }
            const auto [mean_pe, se_pe] = mean_se(pe);
            curve.points.push_back({c, members.front()->lambda_k, md / static_cast<double>(members.size()),
                                    mean_pe, se_pe, static_cast<int>(members.size())});
        }
        curves.push_back(std::move(curve));
    }
    return curves;
}

void write_results_csv(std::ostream& out, std::span<const ResultRow> rows) {
    out << "plan,method,replication,c_k,lambda_k,md,pe,seed,converged\n";
    for (const auto& r : rows) {
        out << fmt::format("{},{},{},{},{},{},{},{},{}\n", r.plan, r.method, r.replication, r.c_k, r.lambda_k,
                           r.md, r.pe, r.seed, r.converged ? 1 : 0);
    }
}

void write_aggregate_csv(std::ostream& out, const std::string& plan, std::span<const MethodCurve> curves) {
    out << "plan,method,c_k,lambda_k,mean_md,mean_pe,se_pe,n_reps\n";
    for (const auto& curve : curves) {
        for (const auto& p : curve.points) {
            out << fmt::format("{},{},{},{},{},{},{},{}\n", plan, curve.method, p.c_k, p.lambda_k, p.mean_md,
                               p.mean_pe, p.se_pe, p.n_reps);
        }
    }
}

std::vector<ResultRow> read_results_csv(std::istream& in) {
    std::vector<ResultRow> rows;
    std::string line;
    if (!std::getline(in, line)) return rows;
    if (line.rfind("plan,method,replication", 0) != 0) throw std::invalid_argument("not a results CSV");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (f.size() != 9) throw std::invalid_argument("results CSV: expected 9 fields");
        ResultRow r;
        r.plan = f[0];
        r.method = f[1];
        r.replication = std::stoi(f[2]);
        r.c_k = std::stod(f[3]);
        r.lambda_k = std::stod(f[4]);
        r.md = static_cast<Index>(std::stoll(f[5]));
        r.pe = std::stod(f[6]);
        r.seed = std::stoull(f[7]);
        r.converged = f[8] == "1";
        rows.push_back(std::move(r));
    }
    return rows;
}

double default_marker_c(Family family) { return family == Family::kLogistic ? 2.0 : 2.5; }

}  // namespace ssnet
