#include "ssnet/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ssnet {

std::string_view to_string(Family family) {
    switch (family) {
        case Family::kQuadratic: return "quadratic";
        case Family::kLogistic: return "logistic";
        case Family::kAbsolute: return "absolute";
        case Family::kSquaredHinge: return "squared-hinge";
    }
    return "unknown";
}

std::string_view to_string(Standardization mode) {
    switch (mode) {
        case Standardization::kUnitNorm: return "unit-norm";
        case Standardization::kSqrtN: return "sqrt-n";
        case Standardization::kNone: return "none";
    }
    return "unknown";
}

Family parse_family(std::string_view name) {
    if (name == "quadratic" || name == "linear" || name == "gaussian") return Family::kQuadratic;
    if (name == "logistic" || name == "binomial") return Family::kLogistic;
    if (name == "absolute" || name == "lad") return Family::kAbsolute;
    if (name == "squared-hinge" || name == "hinge") return Family::kSquaredHinge;
    throw std::invalid_argument("unknown family: " + std::string(name));
}

Standardization parse_standardization(std::string_view name) {
    if (name == "unit-norm") return Standardization::kUnitNorm;
    if (name == "sqrt-n") return Standardization::kSqrtN;
    if (name == "none") return Standardization::kNone;
    throw std::invalid_argument("unknown standardization: " + std::string(name));
}

std::string_view to_string(DataErrorCode code) {
    switch (code) {
        case DataErrorCode::kDimensionMismatch: return "DimensionMismatch";
        case DataErrorCode::kTooFewObservations: return "TooFewObservations";
        case DataErrorCode::kNoPredictors: return "NoPredictors";
        case DataErrorCode::kNonFinite: return "NonFinite";
        case DataErrorCode::kBadLabel: return "BadLabel";
        case DataErrorCode::kZeroColumn: return "ZeroColumn";
        case DataErrorCode::kNotStandardized: return "NotStandardized";
    }
    return "Unknown";
}

DataError::DataError(DataIssue issue)
    : std::runtime_error(std::string(to_string(issue.code)) + ": " + issue.message),
      issue_(std::move(issue)) {}

// ---------------------------------------------------------------------------
// SupportSet

SupportSet::SupportSet(std::initializer_list<Index> indices)
    : SupportSet(from_unsorted(std::vector<Index>(indices))) {}

SupportSet SupportSet::from_unsorted(std::vector<Index> indices) {
    std::sort(indices.begin(), indices.end());
    indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
    SupportSet s;
    s.indices_ = std::move(indices);
    return s;
}

SupportSet SupportSet::of(const Vector& values) {
    SupportSet s;
    for (Index j = 0; j < values.size(); ++j) {
        if (values[j] != 0.0) s.indices_.push_back(j);
    }
    return s;
}

bool SupportSet::contains(Index j) const {
    return std::binary_search(indices_.begin(), indices_.end(), j);
}

bool SupportSet::is_subset_of(const SupportSet& other) const {
    return std::includes(other.indices_.begin(), other.indices_.end(), indices_.begin(),
                         indices_.end());
}

SupportSet SupportSet::united(const SupportSet& other) const {
    SupportSet out;
    std::set_union(indices_.begin(), indices_.end(), other.indices_.begin(), other.indices_.end(),
                   std::back_inserter(out.indices_));
    return out;
}

SupportSet SupportSet::minus(const SupportSet& other) const {
    SupportSet out;
    std::set_difference(indices_.begin(), indices_.end(), other.indices_.begin(),
                        other.indices_.end(), std::back_inserter(out.indices_));
    return out;
}

std::string SupportSet::to_string() const {
    std::ostringstream os;
    os << '{';
    for (std::size_t k = 0; k < indices_.size(); ++k) {
        if (k) os << ',';
        os << indices_[k];
    }
    os << '}';
    return os.str();
}

std::size_t SupportSetHash::operator()(const SupportSet& s) const noexcept {
    std::size_t h = 0xcbf29ce484222325ull;
    for (Index j : s) {
        h ^= static_cast<std::size_t>(j) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return h;
}

// ---------------------------------------------------------------------------

LambdaGrid::LambdaGrid(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw std::invalid_argument("LambdaGrid: empty grid");
    for (std::size_t k = 0; k < values_.size(); ++k) {
        if (!std::isfinite(values_[k]) || values_[k] <= 0.0) {
            throw std::invalid_argument("LambdaGrid: values must be positive and finite");
        }
        if (k > 0 && !(values_[k] > values_[k - 1])) {
            throw std::invalid_argument("LambdaGrid: values must be strictly increasing");
        }
    }
}

TrueModel TrueModel::from_beta(Vector beta, double sigma2) {
    TrueModel tm;
    tm.support = SupportSet::of(beta);
    tm.beta = std::move(beta);
    tm.sigma2 = sigma2;
    return tm;
}

double TrueModel::beta_min() const {
    if (support.empty()) return 0.0;
    double m = std::abs(beta[support[0]]);
    for (Index j : support) m = std::min(m, std::abs(beta[j]));
    return m;
}

bool Dataset::is_penalized(Index j) const {
    return std::find(unpenalized.begin(), unpenalized.end(), j) == unpenalized.end();
}

// ---------------------------------------------------------------------------

std::vector<DataIssue> validate_dataset(const Dataset& d) {
    std::vector<DataIssue> issues;
    const Index n = d.X.rows();
    const Index p = d.X.cols();
    if (d.y.size() != n) {
        issues.push_back({DataErrorCode::kDimensionMismatch,
                          "y has " + std::to_string(d.y.size()) + " entries but X has " +
                              std::to_string(n) + " rows"});
    }
    if (n < 2) {
        issues.push_back({DataErrorCode::kTooFewObservations,
                          "need at least 2 observations, got " + std::to_string(n)});
    }
    if (p < 1) issues.push_back({DataErrorCode::kNoPredictors, "design has no columns"});
    if (!d.names.empty() && static_cast<Index>(d.names.size()) != p) {
        issues.push_back({DataErrorCode::kDimensionMismatch, "names/columns count mismatch"});
    }
    for (Index j : d.unpenalized) {
        if (j < 0 || j >= p) {
            issues.push_back({DataErrorCode::kDimensionMismatch,
                              "unpenalized index out of range", j});
        }
    }
    if (!d.X.allFinite()) {
        issues.push_back({DataErrorCode::kNonFinite, "X has non-finite entries"});
    }
    if (!d.y.allFinite()) {
        issues.push_back({DataErrorCode::kNonFinite, "y has non-finite entries"});
    }
    if (d.family == Family::kLogistic) {
        for (Index i = 0; i < d.y.size(); ++i) {
            if (d.y[i] != 0.0 && d.y[i] != 1.0) {
                issues.push_back({DataErrorCode::kBadLabel,
                                  "logistic responses must be 0 or 1 (row " +
                                      std::to_string(i) + ")"});
                break;
            }
        }
    } else if (d.family == Family::kSquaredHinge) {
        for (Index i = 0; i < d.y.size(); ++i) {
            if (d.y[i] != -1.0 && d.y[i] != 1.0) {
                issues.push_back({DataErrorCode::kBadLabel,
                                  "squared-hinge responses must be -1 or +1 (row " +
                                      std::to_string(i) + ")"});
                break;
            }
        }
    }
    if (d.standardization != Standardization::kNone && n >= 1 && d.X.allFinite()) {
        const double target =
            d.standardization == Standardization::kUnitNorm ? 1.0 : std::sqrt(double(n));
        for (Index j = 0; j < p; ++j) {
            const double norm = d.X.col(j).norm();
            if (norm < 1e-12) {
                issues.push_back({DataErrorCode::kZeroColumn,
                                  "column " + std::to_string(j) + " has zero norm", j});
            } else if (std::abs(norm - target) > 1e-10 * std::max(1.0, target)) {
                issues.push_back({DataErrorCode::kNotStandardized,
                                  "column " + std::to_string(j) + " has norm " +
                                      std::to_string(norm),
                                  j});
            }
        }
    }
    return issues;
}

void require_valid(const Dataset& d) {
    auto issues = validate_dataset(d);
    if (!issues.empty()) throw DataError(std::move(issues.front()));
}

StandardizedDesign standardize_design(const Matrix& X, Standardization mode) {
    const Index n = X.rows();
    const Index p = X.cols();
    StandardizedDesign sd{X, Vector::Ones(p), Vector::Zero(p)};
    if (mode == Standardization::kNone) return sd;

    if (mode == Standardization::kSqrtN) {
        sd.center = X.colwise().mean().transpose();
        sd.X.rowwise() -= sd.center.transpose();
    }
    const double target = mode == Standardization::kUnitNorm ? 1.0 : std::sqrt(double(n));
    for (Index j = 0; j < p; ++j) {
        const double norm = sd.X.col(j).norm();
        if (norm < 1e-12) {
            throw DataError({DataErrorCode::kZeroColumn,
                             "column " + std::to_string(j) + " has zero norm", j});
        }
        sd.X.col(j) *= target / norm;
        sd.scale[j] = norm / target;
    }
    return sd;
}

Vector coefficients_to_original_scale(const Vector& beta, const StandardizedDesign& sd) {
    return beta.cwiseQuotient(sd.scale);
}

Dataset make_dataset(Matrix X, Vector y, Family family, const DatasetOptions& options,
                     std::vector<std::string> names) {
    Dataset d;
    d.family = family;
    d.standardization = options.standardization;
    d.y = std::move(y);
    if (!X.allFinite()) {
        d.X = std::move(X);
        require_valid(d);
    }
    d.X = standardize_design(X, options.standardization).X;
    d.names = std::move(names);
    if (options.intercept) {
        const Index n = d.X.rows();
        const double target = options.standardization == Standardization::kUnitNorm
                                  ? 1.0 / std::sqrt(double(n))
                                  : 1.0;
        Matrix with(n, d.X.cols() + 1);
        with.col(0).setConstant(target);
        with.rightCols(d.X.cols()) = d.X;
        d.X = std::move(with);
        d.unpenalized = {0};
        if (!d.names.empty()) d.names.insert(d.names.begin(), "(intercept)");
    }
    require_valid(d);
    return d;
}

Dataset to_unit_norm(Dataset d) {
    if (d.standardization != Standardization::kSqrtN) return d;
    d.X /= std::sqrt(double(d.n()));
    d.standardization = Standardization::kUnitNorm;
    return d;
}

double lambda_unit_to_sqrt_n(double lambda, Index n) { return lambda * std::sqrt(double(n)); }
double lambda_sqrt_n_to_unit(double lambda, Index n) { return lambda / std::sqrt(double(n)); }

Vector embed(const SupportSet& J, const Vector& beta_J, Index p) {
    Vector out = Vector::Zero(p);
    for (std::size_t k = 0; k < J.size(); ++k) out[J[k]] = beta_J[static_cast<Index>(k)];
    return out;
}

Matrix select_columns(const Matrix& X, const SupportSet& J) {
    Matrix out(X.rows(), static_cast<Index>(J.size()));
    for (std::size_t k = 0; k < J.size(); ++k) out.col(static_cast<Index>(k)) = X.col(J[k]);
    return out;
}

}  // namespace ssnet
