#pragma once

#include <Eigen/Core>

#include <compare>
#include <cstddef>
#include <initializer_list>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ssnet {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

enum class Family { kQuadratic, kLogistic, kAbsolute, kSquaredHinge };

// How the columns of X were brought to a common scale.
//   kUnitNorm: ||x_j|| = 1 (the canonical scale used by all fits and theory).
//   kSqrtN:    columns centred, ||x_j||^2 = n (the simulation convention).
enum class Standardization { kUnitNorm, kSqrtN, kNone };

std::string_view to_string(Family family);
std::string_view to_string(Standardization mode);
Family parse_family(std::string_view name);
Standardization parse_standardization(std::string_view name);

enum class DataErrorCode {
    kDimensionMismatch,
    kTooFewObservations,
    kNoPredictors,
    kNonFinite,
    kBadLabel,
    kZeroColumn,
    kNotStandardized,
};

std::string_view to_string(DataErrorCode code);

struct DataIssue {
    DataErrorCode code;
    std::string message;
    Index column = -1;
};

class DataError : public std::runtime_error {
public:
    explicit DataError(DataIssue issue);
    DataErrorCode code() const noexcept { return issue_.code; }
    Index column() const noexcept { return issue_.column; }
    const DataIssue& issue() const noexcept { return issue_; }

private:
    DataIssue issue_;
};

// Sorted, duplicate-free set of 0-based predictor indices.
class SupportSet {
public:
    SupportSet() = default;
    SupportSet(std::initializer_list<Index> indices);
    // Sorts and removes duplicates.
    static SupportSet from_unsorted(std::vector<Index> indices);
    // Support of a coefficient vector under the exact-zero test.
    static SupportSet of(const Vector& values);

    const std::vector<Index>& indices() const noexcept { return indices_; }
    std::size_t size() const noexcept { return indices_.size(); }
    bool empty() const noexcept { return indices_.empty(); }
    bool contains(Index j) const;
    bool is_subset_of(const SupportSet& other) const;
    SupportSet united(const SupportSet& other) const;
    SupportSet minus(const SupportSet& other) const;

    auto begin() const noexcept { return indices_.begin(); }
    auto end() const noexcept { return indices_.end(); }
    Index operator[](std::size_t k) const { return indices_[k]; }

    // Lexicographic on the sorted index sequence.
    auto operator<=>(const SupportSet&) const = default;
    bool operator==(const SupportSet&) const = default;

    std::string to_string() const;

private:
    std::vector<Index> indices_;
};

struct SupportSetHash {
    std::size_t operator()(const SupportSet& s) const noexcept;
};

// Dense estimate over all p predictors. Zeros are exact.
struct CoefficientVector {
    Vector values;

    CoefficientVector() = default;
    explicit CoefficientVector(Vector v) : values(std::move(v)) {}
    static CoefficientVector zeros(Index p) { return CoefficientVector(Vector::Zero(p)); }

    Index size() const noexcept { return values.size(); }
    SupportSet support() const { return SupportSet::of(values); }
};

// Strictly increasing, positive, finite penalty values.
class LambdaGrid {
public:
    explicit LambdaGrid(std::vector<double> values);

    const std::vector<double>& values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t k) const { return values_[k]; }
    double min() const { return values_.front(); }
    double max() const { return values_.back(); }

private:
    std::vector<double> values_;
};

// Simulation ground truth.
struct TrueModel {
    Vector beta;
    SupportSet support;
    double sigma2 = 1.0;

    static TrueModel from_beta(Vector beta, double sigma2 = 1.0);
    Index t() const noexcept { return static_cast<Index>(support.size()); }
    // Smallest nonzero |beta_j|; 0 for the empty model.
    double beta_min() const;
};

struct Dataset {
    Matrix X;
    Vector y;
    Family family = Family::kQuadratic;
    Standardization standardization = Standardization::kNone;
    // Columns exempt from the l1 penalty. They belong to every candidate
    // model and do not count towards the model dimension.
    std::vector<Index> unpenalized;
    std::vector<std::string> names;

    Index n() const noexcept { return X.rows(); }
    Index p() const noexcept { return X.cols(); }
    bool is_penalized(Index j) const;
    SupportSet unpenalized_set() const { return SupportSet::from_unsorted(unpenalized); }
};

// All invariant violations, empty when the dataset is valid.
std::vector<DataIssue> validate_dataset(const Dataset& d);
// Throws DataError carrying the first violation.
void require_valid(const Dataset& d);

struct StandardizedDesign {
    Matrix X;
    // X_std * diag(scale) == X - centre, so beta_j / scale_j maps a
    // coefficient back to the original column scale.
    Vector scale;
    Vector center;
};

// Throws DataError(kZeroColumn) if a column has norm < 1e-12.
StandardizedDesign standardize_design(const Matrix& X, Standardization mode);

// Expresses a coefficient vector fitted on standardized columns on the
// original column scale.
Vector coefficients_to_original_scale(const Vector& beta, const StandardizedDesign& sd);

struct DatasetOptions {
    Standardization standardization = Standardization::kUnitNorm;
    // Prepend an unpenalized constant column (scaled to the target norm).
    bool intercept = false;
};

// Standardizes X, optionally prepends the intercept column and validates.
Dataset make_dataset(Matrix X, Vector y, Family family, const DatasetOptions& options = {},
                     std::vector<std::string> names = {});

// Rescales a sqrt-n dataset to unit-norm columns. Other datasets are
// returned unchanged.
Dataset to_unit_norm(Dataset d);

// Lasso penalty on sqrt-n columns equivalent to `lambda` on unit-norm
// columns (and back). GIC penalties need no conversion.
double lambda_unit_to_sqrt_n(double lambda, Index n);
double lambda_sqrt_n_to_unit(double lambda, Index n);

// Full-length vector with beta_J placed at the indices of J.
Vector embed(const SupportSet& J, const Vector& beta_J, Index p);
// Columns of X indexed by J.
Matrix select_columns(const Matrix& X, const SupportSet& J);

}  // namespace ssnet
