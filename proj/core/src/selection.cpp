#include "ssnet/selection.hpp"

#include "ssnet/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace ssnet {
namespace {

SupportSet with_unpenalized(const Dataset& d, const SupportSet& J) {
    return d.unpenalized.empty() ? J : J.united(d.unpenalized_set());
}

SelectionResult make_result(const Dataset& d, const SupportSet& J, const RefitResult& refit,
                            Method method, double lambda) {
    SelectionResult res;
    res.method = method;
    res.support = J;
    res.coefficients = CoefficientVector(embed(refit.support, refit.beta_J, d.p()));
    res.loss = refit.loss;
    res.lambda = lambda;
    res.refit_converged = refit.converged;
    return res;
}

void refit_all(const std::vector<SupportSet>& full, RefitCache& cache, unsigned threads) {
    parallel_for(full.size(), threads, [&](std::size_t i) { cache.get(full[i]); });
}

}  // namespace

std::string_view to_string(Method method) {
    switch (method) {
        case Method::kTL: return "TL";
        case Method::kSS: return "SS";
        case Method::kSSnet: return "SSnet";
    }
    return "?";
}

double gic(double loss, Index size, double lambda) {
    return loss + 0.5 * lambda * lambda * static_cast<double>(size);
}

std::size_t gic_argmin(std::span<const GicEntry> entries) {
    if (entries.empty()) throw std::invalid_argument("gic_argmin: no candidates");
    std::size_t best = 0;
    for (std::size_t k = 1; k < entries.size(); ++k) {
        const auto& a = entries[k];
        const auto& b = entries[best];
        if (a.gic < b.gic ||
            (a.gic == b.gic && (a.support.size() < b.support.size() ||
                                (a.support.size() == b.support.size() && a.support < b.support)))) {
            best = k;
        }
    }
    return best;
}

SelectionResult threshold_lasso(const Dataset& d, const LassoFit& fit, double tau,
                                const RefitOptions& refit) {
    if (!(tau >= 0.0)) throw std::invalid_argument("threshold_lasso: tau must be >= 0");
    std::vector<Index> keep;
    const Vector& b = fit.beta.values;
    for (Index j = 0; j < b.size(); ++j) {
        if (d.is_penalized(j) && std::abs(b[j]) > tau) keep.push_back(j);
    }
    SupportSet J = SupportSet::from_unsorted(std::move(keep));
    const RefitResult r = refit_ml(d, with_unpenalized(d, J), refit);
    SelectionResult res = make_result(d, J, r, Method::kTL, fit.lambda);
    res.lasso_converged = fit.converged;
    const Index size = static_cast<Index>(J.size());
    res.trace.entries.push_back({J, r.loss, gic(0.0, size, fit.lambda), gic(r.loss, size, fit.lambda),
                                 r.converged});
    return res;
}

Index default_max_size(const Dataset& d) { return std::max<Index>(1, d.n() / 2); }

NestedFamily nested_family(const Dataset& d, const LassoFit& fit, Index max_size,
                           double rank_tol) {
    NestedFamily fam;
    fam.source_lambda = fit.lambda;
    const Vector& b = fit.beta.values;
    std::vector<Index> order;
    for (Index j = 0; j < b.size(); ++j) {
        if (b[j] != 0.0 && d.is_penalized(j)) order.push_back(j);
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index c) { return std::abs(b[a]) > std::abs(b[c]); });
    const std::size_t limit = std::min<std::size_t>(order.size(),
                                                    static_cast<std::size_t>(std::max<Index>(0, max_size)));
    std::vector<Index> prefix;
    for (std::size_t k = 0; k < limit; ++k) {
        prefix.push_back(order[k]);
        SupportSet J = SupportSet::from_unsorted(prefix);
        if (!has_full_column_rank(d.X, with_unpenalized(d, J), rank_tol)) break;
        fam.supports.push_back(std::move(J));
    }
    return fam;
}

SelectionResult select_from_candidates(const Dataset& d, std::span<const SupportSet> candidates,
                                       double lambda, RefitCache& cache, Method method) {
    std::vector<SupportSet> list(candidates.begin(), candidates.end());
    if (std::find(list.begin(), list.end(), SupportSet{}) == list.end()) {
        list.insert(list.begin(), SupportSet{});
    }
    GicTrace trace;
    for (const auto& J : list) {
        const RefitResult& r = cache.get(with_unpenalized(d, J));
        if (!r.rank_ok) continue;
        const Index size = static_cast<Index>(J.size());
        trace.entries.push_back({J, r.loss, gic(0.0, size, lambda), gic(r.loss, size, lambda),
                                 r.converged});
    }
    trace.chosen = gic_argmin(trace.entries);
    const SupportSet& chosen = trace.entries[trace.chosen].support;
    SelectionResult res = make_result(d, chosen, cache.get(with_unpenalized(d, chosen)), method, lambda);
    res.trace = std::move(trace);
    return res;
}

SelectionResult select_ss(const Dataset& d, double lambda, const SelectionConfig& cfg) {
    if (!(lambda > 0.0)) throw std::invalid_argument("select_ss: lambda must be > 0");
    const LassoFit fit = fit_lasso(d, lambda, cfg.solver);
    const Index max_size = cfg.max_size.value_or(default_max_size(d));
    const NestedFamily fam = nested_family(d, fit, max_size, cfg.refit.rank_tol);
    RefitCache cache(d, cfg.refit);
    std::vector<SupportSet> full;
    full.push_back(with_unpenalized(d, {}));
    for (const auto& J : fam.supports) full.push_back(with_unpenalized(d, J));
    refit_all(full, cache, cfg.threads);
    SelectionResult res = select_from_candidates(d, fam.supports, lambda, cache, Method::kSS);
    res.lasso_converged = fit.converged;
    return res;
}

SsnetResult select_ssnet_full(const Dataset& d, const LambdaGrid& input_grid,
                              const LambdaGrid& output_grid, const SelectionConfig& cfg) {
    SsnetResult out;
    out.path = fit_lasso_path(d, input_grid, cfg.solver);
    const Index max_size = cfg.max_size.value_or(default_max_size(d));
    std::set<SupportSet> pooled;
    bool all_converged = true;
    for (const auto& fit : out.path) {
        all_converged = all_converged && fit.converged;
        for (auto& J : nested_family(d, fit, max_size, cfg.refit.rank_tol).supports) {
            pooled.insert(std::move(J));
        }
    }
    pooled.insert(SupportSet{});
    out.candidates.assign(pooled.begin(), pooled.end());

    RefitCache cache(d, cfg.refit);
    std::vector<SupportSet> full;
    full.reserve(out.candidates.size());
    for (const auto& J : out.candidates) full.push_back(with_unpenalized(d, J));
    refit_all(full, cache, cfg.threads);

    out.selections.reserve(output_grid.size());
    for (double lambda : output_grid.values()) {
        auto res = select_from_candidates(d, out.candidates, lambda, cache, Method::kSSnet);
        res.lasso_converged = all_converged;
        out.selections.push_back(std::move(res));
    }
    return out;
}

std::vector<SelectionResult> select_ssnet(const Dataset& d, const LambdaGrid& input_grid,
                                          const LambdaGrid& output_grid,
                                          const SelectionConfig& cfg) {
    return select_ssnet_full(d, input_grid, output_grid, cfg).selections;
}

double safest_lambda(Family family, Index /*n*/, Index p, std::optional<double> sigma2,
                     std::optional<double> c) {
    if (p < 2) throw MissingParameter("safest_lambda: needs p >= 2 (log p must be positive)");
    const double logp = std::log(static_cast<double>(p));
    switch (family) {
        case Family::kQuadratic:
            if (!sigma2) throw MissingParameter("safest_lambda: sigma2 is required for the quadratic family");
            if (!(*sigma2 > 0.0)) throw std::invalid_argument("safest_lambda: sigma2 must be > 0");
            return std::sqrt(2.0 * *sigma2 * logp);
        case Family::kLogistic: {
            const double cc = c.value_or(0.25);
            if (!(cc > 0.0)) throw std::invalid_argument("safest_lambda: c must be > 0");
            return std::sqrt(logp / (2.0 * cc));
        }
        default:
            throw MissingParameter("safest_lambda: no default level for the " +
                                   std::string(to_string(family)) + " family");
    }
}

LambdaGrid gic_output_grid(Family family, Index p, std::span<const double> c_values,
                           std::optional<double> sigma2) {
    if (p < 2) throw MissingParameter("gic_output_grid: needs p >= 2");
    double scale = std::log(static_cast<double>(p));
    if (family == Family::kQuadratic) {
        if (!sigma2) throw MissingParameter("gic_output_grid: sigma2 is required for the quadratic family");
        scale *= *sigma2;
    } else if (family != Family::kLogistic) {
        scale *= sigma2.value_or(1.0);
    }
    std::vector<double> c(c_values.begin(), c_values.end());
    std::sort(c.begin(), c.end());
    std::vector<double> values;
    values.reserve(c.size());
    for (double ck : c) values.push_back(std::sqrt(ck * scale));
    return LambdaGrid(std::move(values));
}

NoiseEstimate estimate_sigma2(const Dataset& d, std::span<const SupportSet> candidates,
                              const RefitOptions& refit) {
    if (d.family != Family::kQuadratic) {
        throw std::invalid_argument("estimate_sigma2: quadratic family only");
    }
    const std::size_t cap = static_cast<std::size_t>(d.n() / 2);
    const SupportSet* best = nullptr;
    for (const auto& J : candidates) {
        if (J.size() > cap) continue;
        if (!best || J.size() > best->size()) best = &J;
    }
    NoiseEstimate est;
    if (best) est.support = *best;
    const SupportSet full = with_unpenalized(d, est.support);
    const RefitResult r = refit_ml(d, full, refit);
    const double dof = static_cast<double>(d.n() - static_cast<Index>(full.size()));
    if (dof <= 0.0) throw std::invalid_argument("estimate_sigma2: no residual degrees of freedom");
    est.sigma2 = 2.0 * r.loss / dof;
    return est;
}

}  // namespace ssnet
