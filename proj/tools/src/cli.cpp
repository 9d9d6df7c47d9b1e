#include "ssnet/cli.hpp"

#include "ssnet/csv.hpp"
#include "ssnet/harness.hpp"
#include "ssnet/json_io.hpp"
#include "ssnet/lasso.hpp"
#include "ssnet/losses.hpp"
#include "ssnet/parallel.hpp"
#include "ssnet/refit.hpp"
#include "ssnet/selection.hpp"
#include "ssnet/simgen.hpp"
#include "ssnet/theory.hpp"

#include <CLI11.hpp>
#include <fmt/core.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace ssnet::cli {
namespace {

using nlohmann::json;

// Raised for failures outside the modules (files, arguments that only fail
// once data is loaded). Mapped to kDataError.
class RunError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct DataArgs {
    std::string csv;
    std::string response = "y";
    std::string family = "quadratic";
    std::string standardize = "unit-norm";
    bool intercept = false;
};

// Penalty level argument: a positive number or the literal "safest".
struct LambdaArgs {
    std::string lambda;
    std::optional<double> sigma2;
    std::optional<double> c;
};

void add_data_options(CLI::App* cmd, DataArgs& a) {
    cmd->add_option("--csv", a.csv, "Input data file (CSV with optional header)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--response", a.response, "Response column: header name or 0-based number")
        ->capture_default_str();
    cmd->add_option("--family", a.family, "Loss: quadratic, logistic, absolute, squared-hinge")
        ->check(CLI::IsMember({"quadratic", "logistic", "absolute", "squared-hinge"}))
        ->capture_default_str();
    cmd->add_option("--standardize", a.standardize,
                    "Column scaling: unit-norm, sqrt-n (fits run on unit-norm), none")
        ->check(CLI::IsMember({"unit-norm", "sqrt-n", "none"}))
        ->capture_default_str();
    cmd->add_flag("--intercept", a.intercept, "Prepend an unpenalized constant column");
}

void add_noise_options(CLI::App* cmd, LambdaArgs& a, const std::string& sigma_help) {
    auto* s = cmd->add_option("--sigma2", a.sigma2, sigma_help)->check(CLI::PositiveNumber);
    auto* c = cmd->add_option("--c", a.c, "Logistic convexity constant for safest (default 0.25)")
                  ->check(CLI::PositiveNumber);
    s->excludes(c);
}

Dataset load_data(const DataArgs& a) {
    CsvDatasetOptions o;
    o.response = a.response;
    o.family = parse_family(a.family);
    o.dataset.standardization = parse_standardization(a.standardize);
    o.dataset.intercept = a.intercept;
    return to_unit_norm(read_csv_dataset(a.csv, o));
}

Index penalized_count(const Dataset& d) {
    return d.p() - static_cast<Index>(d.unpenalized_set().size());
}

// Resolves the lambda argument and records how in `meta`.
double resolve_lambda(const LambdaArgs& a, const Dataset& d, json& meta) {
    if (a.lambda == "safest") {
        const double lambda = safest_lambda(d.family, d.n(), penalized_count(d), a.sigma2, a.c);
        meta["lambda_source"] = "safest";
        if (d.family == Family::kQuadratic) meta["sigma2"] = *a.sigma2;
        if (d.family == Family::kLogistic) meta["c"] = a.c.value_or(0.25);
        meta["lambda"] = lambda;
        return lambda;
    }
    double lambda = 0.0;
    std::size_t used = 0;
    try {
        lambda = std::stod(a.lambda, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != a.lambda.size() || !(lambda > 0.0) || !std::isfinite(lambda)) {
        throw RunError("--lambda must be a positive number or 'safest', got '" + a.lambda + "'");
    }
    meta["lambda_source"] = "value";
    meta["lambda"] = lambda;
    return lambda;
}

json data_meta(const std::string& command, const Dataset& d) {
    return json{{"command", command},
                {"family", std::string(to_string(d.family))},
                {"n", d.n()},
                {"p", d.p()},
                {"unpenalized", d.unpenalized},
                {"standardization", std::string(to_string(d.standardization))}};
}

std::string with_meta(const std::string& body, const json& meta) {
    json j = json::parse(body);
    j["meta"] = meta;
    return j.dump(2);
}

// Writes to `path`, or to `out` when the path is empty or "-".
void emit(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << text;
        if (!text.empty() && text.back() != '\n') out << '\n';
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw RunError("cannot open output file: " + path);
    f << text;
    if (!text.empty() && text.back() != '\n') f << '\n';
    if (!f) throw RunError("write failed: " + path);
}

std::vector<double> parse_c_list(const std::string& text) {
    if (text.empty()) return default_c_list();
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != item.size() || !(v > 0.0)) throw RunError("bad --c-list entry '" + item + "'");
        out.push_back(v);
    }
    std::sort(out.begin(), out.end());
    if (std::adjacent_find(out.begin(), out.end()) != out.end()) {
        throw RunError("--c-list has duplicate entries");
    }
    return out;
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

json c_list_json(const std::vector<double>& c) { return json(c); }

// ---- commands -------------------------------------------------------------

struct FitArgs {
    DataArgs data;
    LambdaArgs lambda;
    std::string out;
};

void run_fit(const FitArgs& a, std::ostream& out) {
    const Dataset d = load_data(a.data);
    json meta = data_meta("fit", d);
    const double lambda = resolve_lambda(a.lambda, d, meta);
    const LassoFit fit = fit_lasso(d, lambda);
    emit(a.out, with_meta(fit_to_json(fit, d.names), meta), out);
}

struct PathArgs {
    DataArgs data;
    int nlambda = 100;
    std::string out;
};

void run_path(const PathArgs& a, std::ostream& out) {
    const Dataset d = load_data(a.data);
    json meta = data_meta("path", d);
    const LambdaGrid grid = default_lambda_grid(d, a.nlambda);
    meta["lambda_max"] = lambda_max(d);
    meta["lambda_ratio"] = default_lambda_ratio(d);
    meta["nlambda"] = a.nlambda;
    emit(a.out, with_meta(path_to_json(fit_lasso_path(d, grid), d.names), meta), out);
}

struct SsArgs {
    DataArgs data;
    LambdaArgs lambda;
    std::optional<Index> max_size;
    std::string out;
};

void run_select_ss(const SsArgs& a, std::ostream& out) {
    const Dataset d = load_data(a.data);
    json meta = data_meta("select-ss", d);
    const double lambda = resolve_lambda(a.lambda, d, meta);
    SelectionConfig cfg;
    cfg.max_size = a.max_size;
    meta["max_size"] = cfg.max_size.value_or(default_max_size(d));
    const SelectionResult res = select_ss(d, lambda, cfg);
    emit(a.out, with_meta(selection_to_json(res, d.names), meta), out);
}

struct TlArgs {
    DataArgs data;
    LambdaArgs lambda;
    std::optional<double> tau;
    std::string out;
};

void run_select_tl(const TlArgs& a, std::ostream& out) {
    const Dataset d = load_data(a.data);
    json meta = data_meta("select-tl", d);
    const double lambda = resolve_lambda(a.lambda, d, meta);
    const double tau = a.tau.value_or(lambda);
    meta["tau"] = tau;
    const LassoFit fit = fit_lasso(d, lambda);
    SelectionResult res = threshold_lasso(d, fit, tau);
    emit(a.out, with_meta(selection_to_json(res, d.names), meta), out);
}

struct SsnetArgs {
    DataArgs data;
    int nlambda = 0;
    std::string c_list;
    std::optional<double> sigma2;
    std::string sigma2_method = "cv";
    std::optional<Index> max_size;
    int cv_folds = 0;
    std::uint64_t seed = 1;
    int threads = 0;
    std::string out;
};

void run_select_ssnet(const SsnetArgs& a, std::ostream& out) {
    const Dataset d = load_data(a.data);
    json meta = data_meta("select-ssnet", d);
    const std::vector<double> c = parse_c_list(a.c_list);
    const int m = a.nlambda > 0 ? a.nlambda : (d.family == Family::kLogistic ? 20 : 50);
    const LambdaGrid input = default_lambda_grid(d, m);
    SelectionConfig cfg;
    cfg.max_size = a.max_size;
    cfg.threads = resolve_threads(a.threads);
    meta["nlambda"] = m;
    meta["c_list"] = c_list_json(c);

    // The output grid depends on sigma2; without one it is estimated from
    // the screening candidates, so the candidates come first.
    const std::vector<LassoFit> path = fit_lasso_path(d, input, cfg.solver);
    const Index max_size = cfg.max_size.value_or(default_max_size(d));
    std::set<SupportSet> pooled{SupportSet{}};
    bool lasso_ok = true;
    for (const auto& f : path) {
        lasso_ok = lasso_ok && f.converged;
        for (auto& J : nested_family(d, f, max_size, cfg.refit.rank_tol).supports) pooled.insert(std::move(J));
    }
    const std::vector<SupportSet> candidates(pooled.begin(), pooled.end());
    RefitCache cache(d, cfg.refit);
    const SupportSet free_cols = d.unpenalized_set();
    parallel_for(candidates.size(), cfg.threads,
                 [&](std::size_t i) { cache.get(candidates[i].united(free_cols)); });

    std::optional<double> sigma2 = a.sigma2;
    if (d.family == Family::kQuadratic) {
        if (!sigma2) {
            const NoiseEstimate est = a.sigma2_method == "cv"
                                          ? estimate_sigma2_cv(d, input, 10, a.seed, cfg.solver)
                                          : estimate_sigma2(d, candidates, cfg.refit);
            sigma2 = est.sigma2;
            meta["sigma2_source"] = "estimated-" + a.sigma2_method;
            meta["sigma2_support_size"] = est.support.size();
        } else {
            meta["sigma2_source"] = "given";
        }
        meta["sigma2"] = *sigma2;
    }
    const LambdaGrid output = gic_output_grid(d.family, penalized_count(d), c, sigma2);
    std::vector<SelectionResult> sel;
    sel.reserve(output.size());
    for (double lambda : output.values()) {
        SelectionResult r = select_from_candidates(d, candidates, lambda, cache, Method::kSSnet);
        r.lasso_converged = lasso_ok;
        sel.push_back(std::move(r));
    }
    meta["candidates"] = candidates.size();

    json j = json::parse(selections_to_json(sel, d.names));
    for (std::size_t k = 0; k < sel.size(); ++k) j["selections"][k]["c_k"] = c[k];
    if (a.cv_folds > 0) {
        const auto cv = cv_ssnet(d, m, output, a.cv_folds, a.seed, cfg);
        json rows = json::array();
        for (std::size_t k = 0; k < cv.size(); ++k) {
            rows.push_back(json{{"c_k", c[k]},
                                {"lambda_k", cv[k].lambda_k},
                                {"mean_md", cv[k].mean_md},
                                {"mean_pe", cv[k].mean_pe},
                                {"se_pe", cv[k].se_pe}});
        }
        j["cross_validation"] = json{{"folds", a.cv_folds}, {"seed", a.seed}, {"points", rows}};
    }
    j["meta"] = meta;
    emit(a.out, j.dump(2), out);
}

struct SimulateArgs {
    std::string plan;
    std::uint64_t seed = 1;
    int replication = 0;
    std::string out;
    std::string truth;
    std::string new_out;
};

void run_simulate(const SimulateArgs& a, std::ostream& out) {
    const ExperimentPlan plan = load_plan(a.plan);
    validate_plan(plan);
    const Replication rep = generate_replication(plan, a.seed, a.replication);
    std::ostringstream csv;
    write_csv_dataset(csv, rep.train);
    emit(a.out, csv.str(), out);
    if (!a.new_out.empty()) {
        Dataset fresh;
        fresh.X = rep.X_new;
        fresh.y = rep.y_new;
        fresh.family = plan.family;
        std::ostringstream s;
        write_csv_dataset(s, fresh);
        emit(a.new_out, s.str(), out);
    }
    if (!a.truth.empty()) {
        json t{{"plan", json::parse(plan_to_json(plan))},
               {"seed", a.seed},
               {"replication", a.replication},
               {"replication_seed", rep.seed},
               {"scale", "sqrt-n"},
               {"support", rep.truth.support.indices()},
               {"beta", json::array()}};
        for (Index j : rep.truth.support) {
            t["beta"].push_back(json{{"index", j}, {"value", rep.truth.beta[j]}});
        }
        emit(a.truth, t.dump(2), out);
    }
}

struct BenchArgs {
    std::string plan;
    std::string methods = "ss,ssnet";
    int reps = 0;
    std::uint64_t seed = 1;
    int threads = 0;
    std::string out_dir = ".";
    std::string c_list;
    int nlambda = 0;
    int cv_folds = 10;
    std::optional<double> marker_c;
};

void run_bench(const BenchArgs& a, std::ostream& out) {
    const ExperimentPlan plan = load_plan(a.plan);
    HarnessOptions o;
    o.methods = split_list(a.methods);
    for (const auto& m : o.methods) {
        if (m != "ss" && m != "ssnet" && m != "tl" && m != "lasso-cv") {
            throw RunError("unknown method '" + m + "' (ss, ssnet, tl, lasso-cv)");
        }
    }
    o.c_list = parse_c_list(a.c_list);
    o.replications = a.reps;
    o.seed = a.seed;
    o.threads = resolve_threads(a.threads);
    o.input_grid_size = a.nlambda;
    o.cv_folds = a.cv_folds;
    const RunResult res = run_plan(plan, o);

    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(a.out_dir, ec);
    if (ec) throw RunError("cannot create output directory " + a.out_dir + ": " + ec.message());
    const fs::path dir(a.out_dir);
    const std::string stem = plan.name;
    std::ostringstream rows, agg;
    write_results_csv(rows, res.rows);
    write_aggregate_csv(agg, res.plan, res.curves);
    const std::string svg =
        render_svg(plan.name, res.curves, a.marker_c.value_or(default_marker_c(plan.family)));
    const fs::path results_path = dir / (stem + "_results.csv");
    const fs::path aggregate_path = dir / (stem + "_aggregate.csv");
    const fs::path svg_path = dir / (stem + ".svg");
    emit(results_path.string(), rows.str(), out);
    emit(aggregate_path.string(), agg.str(), out);
    emit(svg_path.string(), svg, out);
    out << fmt::format("plan {}: {} rows, {} failed replications\n", plan.name, res.rows.size(),
                       res.failures.size());
    for (const auto& f : res.failures) {
        out << fmt::format("  replication {} (seed {}): {}\n", f.replication, f.seed, f.message);
    }
    out << results_path.string() << '\n' << aggregate_path.string() << '\n' << svg_path.string() << '\n';
}

struct TheoryArgs {
    std::string plan;
    double a1 = 0.9;
    std::string theorem;
    std::string lambda;
    std::uint64_t seed = 1;
    int replication = 0;
    bool kappa = false;
    std::string kappa_mode = "sample";
    int samples = 10000;
    std::optional<Index> t_bar;
    std::string out;
};

void run_theory(const TheoryArgs& a, std::ostream& out) {
    const ExperimentPlan plan = load_plan(a.plan);
    validate_plan(plan);
    const Replication rep = generate_replication(plan, a.seed, a.replication);
    const Dataset d = to_unit_norm(rep.train);
    const double root_n = std::sqrt(static_cast<double>(plan.n));
    const TrueModel truth = TrueModel::from_beta(rep.truth.beta * root_n, plan.sigma2);

    const bool logistic = plan.family == Family::kLogistic;
    // Bernoulli noise is subgaussian with sigma = 1/2.
    const double sigma = logistic ? 0.5 : std::sqrt(plan.sigma2);
    double c = 1.0;
    if (logistic) {
        const CoefficientVector probes[] = {CoefficientVector(truth.beta)};
        c = logistic_convexity_constant(d.X, probes);
    }
    TheoryOptions o;
    o.constants = BoundConstants::from_a1(a.a1, sigma, c);
    o.theorem = a.theorem.empty() ? (logistic ? Theorem::kT2 : Theorem::kT3) : parse_theorem(a.theorem);
    o.family = plan.family;
    o.compute_kappa = a.kappa;
    o.kappa_mode = a.kappa_mode == "enumerate" ? ConeMode::kEnumerate : ConeMode::kSample;
    o.samples = a.samples;
    o.seed = a.seed;
    o.t_bar = a.t_bar;

    json meta{{"command", "theory"},
              {"plan", plan.name},
              {"seed", a.seed},
              {"replication", a.replication},
              {"scale", "unit-norm"}};
    if (!a.lambda.empty()) {
        LambdaArgs la;
        la.lambda = a.lambda;
        if (!logistic) la.sigma2 = plan.sigma2;
        else la.c = c;
        o.lambda = resolve_lambda(la, d, meta);
    }
    const TheoryReport report = build_theory_report(d.X, truth, o);
    emit(a.out, with_meta(theory_report_to_json(report), meta), out);
}

struct PlotArgs {
    std::string results;
    std::string out;
    std::optional<double> marker_c;
    std::string title;
};

void run_plot(const PlotArgs& a, std::ostream& out) {
    std::ifstream in(a.results);
    if (!in) throw RunError("cannot open results file: " + a.results);
    const std::vector<ResultRow> rows = read_results_csv(in);
    if (rows.empty()) throw RunError("results file has no rows: " + a.results);
    const auto curves = aggregate(rows);
    const std::string title = a.title.empty() ? rows.front().plan : a.title;
    double marker = 2.5;
    if (a.marker_c) {
        marker = *a.marker_c;
    } else {
        try {
            marker = default_marker_c(plan_by_name(rows.front().plan).family);
        } catch (const std::out_of_range&) {
        }
    }
    emit(a.out, render_svg(title, curves, marker), out);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"ssnet: Lasso screening with GIC selection, simulation and bound checks", "ssnet"};
    app.set_help_flag();
    app.set_help_all_flag("-h,--help", "Print help for every command and flag, then exit");
    app.require_subcommand(1);
    app.fallthrough(false);

    FitArgs fit;
    auto* c_fit = app.add_subcommand("fit", "Lasso fit at one lambda (JSON)");
    add_data_options(c_fit, fit.data);
    c_fit->add_option("--lambda", fit.lambda.lambda, "Penalty on the unit-norm scale, or 'safest'")->required();
    add_noise_options(c_fit, fit.lambda, "Noise variance for --lambda safest (quadratic)");
    c_fit->add_option("--out", fit.out, "Output JSON file (default: standard output)");

    PathArgs path;
    auto* c_path = app.add_subcommand("path", "Lasso path on the default log-spaced grid (JSON)");
    add_data_options(c_path, path.data);
    c_path->add_option("--nlambda", path.nlambda, "Grid size")->check(CLI::Range(2, 100000))->capture_default_str();
    c_path->add_option("--out", path.out, "Output JSON file (default: standard output)");

    SsArgs ss;
    auto* c_ss = app.add_subcommand("select-ss", "Screening and selection at one lambda (JSON)");
    add_data_options(c_ss, ss.data);
    c_ss->add_option("--lambda", ss.lambda.lambda, "Penalty on the unit-norm scale, or 'safest'")->required();
    add_noise_options(c_ss, ss.lambda, "Noise variance for --lambda safest (quadratic)");
    c_ss->add_option("--max-size", ss.max_size, "Largest candidate size (default floor(n/2))")
        ->check(CLI::PositiveNumber);
    c_ss->add_option("--out", ss.out, "Output JSON file (default: standard output)");

    SsnetArgs net;
    auto* c_net = app.add_subcommand("select-ssnet", "Selection over a screening net and a GIC grid (JSON)");
    add_data_options(c_net, net.data);
    c_net->add_option("--nlambda", net.nlambda, "Input grid size (default 50 quadratic, 20 otherwise)")
        ->check(CLI::Range(2, 100000));
    c_net->add_option("--c-list", net.c_list, "Comma-separated GIC constants (default 0.25,0.5,...,7.5)");
    auto* net_sigma2 = c_net->add_option("--sigma2", net.sigma2, "Noise variance (quadratic; estimated when absent)")
        ->check(CLI::PositiveNumber);
    c_net->add_option("--sigma2-method", net.sigma2_method,
                      "Estimator when --sigma2 is absent: cv (10-fold Lasso residuals) or largest "
                      "(refit of the largest candidate)")
        ->check(CLI::IsMember({"cv", "largest"}))
        ->capture_default_str()
        ->excludes(net_sigma2);
    c_net->add_option("--max-size", net.max_size, "Largest candidate size (default floor(n/2))")
        ->check(CLI::PositiveNumber);
    c_net->add_option("--cv-folds", net.cv_folds, "Also report K-fold PE and MD per grid value (0: off)")
        ->check(CLI::NonNegativeNumber)->capture_default_str();
    c_net->add_option("--seed", net.seed, "Fold assignment seed (noise estimate and --cv-folds)")->capture_default_str();
    c_net->add_option("--threads", net.threads, "Worker threads (0: all cores)")
        ->check(CLI::NonNegativeNumber)->capture_default_str();
    c_net->add_option("--out", net.out, "Output JSON file (default: standard output)");

    TlArgs tl;
    auto* c_tl = app.add_subcommand("select-tl", "Thresholded Lasso with refit (JSON)");
    add_data_options(c_tl, tl.data);
    c_tl->add_option("--lambda", tl.lambda.lambda, "Penalty on the unit-norm scale, or 'safest'")->required();
    add_noise_options(c_tl, tl.lambda, "Noise variance for --lambda safest (quadratic)");
    c_tl->add_option("--tau", tl.tau, "Threshold on |beta_j| (default: lambda)")->check(CLI::NonNegativeNumber);
    c_tl->add_option("--out", tl.out, "Output JSON file (default: standard output)");

    SimulateArgs sim;
    auto* c_sim = app.add_subcommand("simulate", "Draw one replication of a plan (CSV, sqrt-n columns)");
    c_sim->add_option("--plan", sim.plan, "Built-in plan id or plan JSON file")->required();
    c_sim->add_option("--seed", sim.seed, "Run seed")->capture_default_str();
    c_sim->add_option("--replication", sim.replication, "Replication number")
        ->check(CLI::NonNegativeNumber)->capture_default_str();
    c_sim->add_option("--out", sim.out, "Training data CSV (default: standard output)");
    c_sim->add_option("--new-out", sim.new_out, "Evaluation data CSV");
    c_sim->add_option("--truth", sim.truth, "True coefficients JSON");

    BenchArgs bench;
    auto* c_bench = app.add_subcommand("bench", "Run a plan; write results CSV, aggregate CSV and SVG");
    c_bench->add_option("--plan", bench.plan, "Built-in plan id or plan JSON file")->required();
    c_bench->add_option("--methods", bench.methods, "Comma-separated: ss, ssnet, tl, lasso-cv")
        ->capture_default_str();
    c_bench->add_option("--reps", bench.reps, "Replications (0: the plan's count)")
        ->check(CLI::NonNegativeNumber)->capture_default_str();
    c_bench->add_option("--seed", bench.seed, "Run seed")->capture_default_str();
    c_bench->add_option("--threads", bench.threads, "Worker threads (0: all cores)")
        ->check(CLI::NonNegativeNumber)->capture_default_str();
    c_bench->add_option("--out-dir", bench.out_dir, "Directory for the artifacts")->capture_default_str();
    c_bench->add_option("--c-list", bench.c_list, "Comma-separated GIC constants (default 0.25,0.5,...,7.5)");
    c_bench->add_option("--nlambda", bench.nlambda, "Input grid size (0: 50 quadratic, 20 logistic)")
        ->check(CLI::NonNegativeNumber)->capture_default_str();
    c_bench->add_option("--cv-folds", bench.cv_folds, "Folds for lasso-cv")
        ->check(CLI::Range(2, 1000))->capture_default_str();
    c_bench->add_option("--marker-c", bench.marker_c, "GIC constant marked in the SVG (default 2.5 / 2)");

    TheoryArgs th;
    auto* c_th = app.add_subcommand("theory", "Constants, admissible lambda window and bound (JSON)");
    c_th->add_option("--plan", th.plan, "Built-in plan id or plan JSON file")->required();
    c_th->add_option("--a1", th.a1, "Cone constant a1 in (1/2, 1)")->capture_default_str();
    c_th->add_option("--theorem", th.theorem, "T1, T2, T3 or T4 (default T3 quadratic, T2 logistic)")
        ->check(CLI::IsMember({"T1", "T2", "T3", "T4"}));
    c_th->add_option("--lambda", th.lambda, "Evaluate the bound at this lambda, or 'safest'");
    c_th->add_option("--seed", th.seed, "Seed for the design and the searches")->capture_default_str();
    c_th->add_option("--replication", th.replication, "Replication whose design is used")
        ->check(CLI::NonNegativeNumber)->capture_default_str();
    c_th->add_flag("--kappa", th.kappa, "Also estimate the compatibility factor");
    c_th->add_option("--kappa-mode", th.kappa_mode, "sample or enumerate (p <= 12)")
        ->check(CLI::IsMember({"sample", "enumerate"}))->capture_default_str();
    c_th->add_option("--samples", th.samples, "Random starts for the cone searches")
        ->check(CLI::PositiveNumber)->capture_default_str();
    c_th->add_option("--t-bar", th.t_bar, "Sparsity cap (default floor(n/2))")->check(CLI::PositiveNumber);
    c_th->add_option("--out", th.out, "Output JSON file (default: standard output)");

    PlotArgs plot;
    auto* c_plot = app.add_subcommand("plot", "Render an SVG from a results CSV");
    c_plot->add_option("--results", plot.results, "Results CSV written by bench")
        ->required()->check(CLI::ExistingFile);
    c_plot->add_option("--out", plot.out, "Output SVG file (default: standard output)");
    c_plot->add_option("--marker-c", plot.marker_c, "GIC constant to mark (default by plan family)");
    c_plot->add_option("--title", plot.title, "Chart title (default: plan id)");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) {
            app.exit(e, out, err);
            return kOk;
        }
        err << "error: " << e.what() << '\n';
        err << "run 'ssnet --help' for usage\n";
        return kUsageError;
    }

    try {
        if (*c_fit) run_fit(fit, out);
        else if (*c_path) run_path(path, out);
        else if (*c_ss) run_select_ss(ss, out);
        else if (*c_net) run_select_ssnet(net, out);
        else if (*c_tl) run_select_tl(tl, out);
        else if (*c_sim) run_simulate(sim, out);
        else if (*c_bench) run_bench(bench, out);
        else if (*c_th) run_theory(th, out);
        else if (*c_plot) run_plot(plot, out);
    } catch (const DataError& e) {
        err << "data error [" << to_string(e.code()) << "]: " << e.what() << '\n';
        return kDataError;
    } catch (const MissingParameter& e) {
        err << "missing parameter: " << e.what() << '\n';
        return kDataError;
    } catch (const RankDeficient& e) {
        err << "rank deficient support " << e.support().to_string() << ": " << e.what() << '\n';
        return kDataError;
    } catch (const NotConverged& e) {
        err << "not converged: " << e.what() << '\n';
        return kDataError;
    } catch (const TooLargeT& e) {
        err << "true model too large: " << e.what() << '\n';
        return kDataError;
    } catch (const MissingConstant& e) {
        err << "missing constant: " << e.what() << '\n';
        return kDataError;
    } catch (const RunError& e) {
        err << "error: " << e.what() << '\n';
        return kDataError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kDataError;
    }
    return kOk;
}

int main_entry(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run_cli(args, std::cout, std::cerr);
}

}  // namespace ssnet::cli
