#include "ssnet/json_io.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace ssnet {
namespace {

using nlohmann::json;

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json vector_json(const Vector& v) {
    json a = json::array();
    for (Index i = 0; i < v.size(); ++i) a.push_back(number(v[i]));
    return a;
}

json support_json(const SupportSet& s, const std::vector<std::string>& names) {
    json j;
    j["indices"] = s.indices();
    if (!names.empty()) {
        json n = json::array();
        for (Index k : s) n.push_back(k < static_cast<Index>(names.size()) ? names[k] : std::string());
        j["names"] = n;
    }
    return j;
}

// Nonzero entries only.
json sparse_coefficients(const Vector& v, const std::vector<std::string>& names) {
    json a = json::array();
    for (Index j = 0; j < v.size(); ++j) {
        if (v[j] == 0.0) continue;
        json e{{"index", j}, {"value", number(v[j])}};
        if (!names.empty() && j < static_cast<Index>(names.size())) e["name"] = names[j];
        a.push_back(e);
    }
    return a;
}

json fit_json(const LassoFit& fit, const std::vector<std::string>& names) {
    return json{{"lambda", number(fit.lambda)},
                {"converged", fit.converged},
                {"iterations", fit.iterations},
                {"kkt_residual", number(fit.kkt_residual)},
                {"support_size", fit.beta.support().size()},
                {"coefficients", sparse_coefficients(fit.beta.values, names)}};
}

json selection_json(const SelectionResult& r, const std::vector<std::string>& names) {
    json trace = json::array();
    for (const auto& e : r.trace.entries) {
        trace.push_back(json{{"support", e.support.indices()},
                             {"size", e.support.size()},
                             {"loss", number(e.loss)},
                             {"penalty", number(e.penalty)},
                             {"gic", number(e.gic)},
                             {"converged", e.converged}});
    }
    return json{{"method", std::string(to_string(r.method))},
                {"lambda", number(r.lambda)},
                {"support", support_json(r.support, names)},
                {"model_dimension", r.support.size()},
                {"loss", number(r.loss)},
                {"coefficients", sparse_coefficients(r.coefficients.values, names)},
                {"lasso_converged", r.lasso_converged},
                {"refit_converged", r.refit_converged},
                {"trace", json{{"chosen", r.trace.chosen}, {"entries", trace}}}};
}

}  // namespace

std::string plan_to_json(const ExperimentPlan& plan) {
    json j{{"name", plan.name},
           {"n", plan.n},
           {"p", plan.p},
           {"beta_preset", std::string(to_string(plan.beta_preset))},
           {"rho", plan.rho},
           {"sigma2", plan.sigma2},
           {"family", std::string(to_string(plan.family))},
           {"n_new", plan.n_new},
           {"replications", plan.replications}};
    return j.dump(2);
}

ExperimentPlan plan_from_json(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("plan JSON: ") + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument("plan JSON must be an object");
    ExperimentPlan plan;
    try {
        plan.name = j.value("name", plan.name);
        plan.n = j.value("n", plan.n);
        plan.p = j.value("p", plan.p);
        if (j.contains("beta_preset")) plan.beta_preset = parse_beta_preset(j["beta_preset"].get<std::string>());
        plan.rho = j.value("rho", plan.rho);
        plan.sigma2 = j.value("sigma2", plan.sigma2);
        if (j.contains("family")) plan.family = parse_family(j["family"].get<std::string>());
        plan.n_new = j.value("n_new", plan.n_new);
        plan.replications = j.value("replications", plan.replications);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("plan JSON: ") + e.what());
    }
    validate_plan(plan);
    return plan;
}

ExperimentPlan load_plan(const std::string& id_or_path) {
    for (const auto& plan : builtin_plans()) {
        if (plan.name == id_or_path) return plan;
    }
    std::ifstream in(id_or_path);
    if (!in) throw std::invalid_argument("unknown plan id and no such file: " + id_or_path);
    std::stringstream buf;
    buf << in.rdbuf();
    return plan_from_json(buf.str());
}

std::string fit_to_json(const LassoFit& fit, const std::vector<std::string>& names) {
    return fit_json(fit, names).dump(2);
}

std::string path_to_json(const std::vector<LassoFit>& path, const std::vector<std::string>& names) {
    json a = json::array();
    for (const auto& f : path) a.push_back(fit_json(f, names));
    return json{{"fits", a}}.dump(2);
}

std::string selection_to_json(const SelectionResult& result, const std::vector<std::string>& names) {
    return selection_json(result, names).dump(2);
}

std::string selections_to_json(const std::vector<SelectionResult>& results,
                               const std::vector<std::string>& names) {
    json a = json::array();
    for (const auto& r : results) a.push_back(selection_json(r, names));
    return json{{"selections", a}}.dump(2);
}

std::string theory_report_to_json(const TheoryReport& r) {
    const auto& k = r.constants;
    json j{{"n", r.n},
           {"p", r.p},
           {"t", r.t},
           {"t_bar", r.t_bar},
           {"family", std::string(to_string(r.family))},
           {"theorem", std::string(to_string(r.theorem))},
           {"constants",
            {{"a1", k.a1}, {"a2", k.a2}, {"a3", k.a3}, {"a4", k.a4}, {"sigma", k.sigma}, {"c", k.c}}},
           {"delta_k", vector_json(r.delta_k)},
           {"full_drop", number(r.full_drop)},
           {"delta", number(r.delta)},
           {"delta_t_minus_1", number(delta_t_minus_1(r))},
           {"beta_min", number(r.beta_min)},
           {"lipschitz_L", number(r.lipschitz_L)}};
    if (r.kappa) {
        j["kappa_a"] = {{"value", number(r.kappa->value)},
                        {"a", r.kappa->a},
                        {"certified", r.kappa->certified},
                        {"gap", number(r.kappa->gap)}};
    } else {
        j["kappa_a"] = nullptr;
    }
    if (r.zeta) {
        j["zeta_a_inf"] = {{"value", number(r.zeta->value)},
                           {"a", r.zeta->a},
                           {"upper_bound_only", r.zeta->upper_bound_only}};
    } else {
        j["zeta_a_inf"] = nullptr;
    }
    if (r.lambda_interval) {
        const auto& iv = *r.lambda_interval;
        j["lambda_interval"] = {{"theorem", std::string(to_string(iv.theorem))},
                                {"lo", number(iv.lo)},
                                {"hi", number(iv.hi)},
                                {"empty", iv.empty},
                                {"applicable", iv.applicable},
                                {"shape_only", iv.shape_only}};
    } else {
        j["lambda_interval"] = nullptr;
    }
    j["lambda"] = r.lambda ? number(*r.lambda) : json(nullptr);
    j["bound_value"] = r.bound_value ? number(*r.bound_value) : json(nullptr);
    return j.dump(2);
}

}  // namespace ssnet
