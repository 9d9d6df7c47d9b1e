#include "oracles.hpp"

#include "ssnet/model.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

using namespace ssnet;

TEST(SupportSet, SortsAndDeduplicates) {
    const SupportSet s = SupportSet::from_unsorted({5, 1, 3, 1, 5});
    EXPECT_EQ(s.indices(), (std::vector<Index>{1, 3, 5}));
    EXPECT_TRUE(s.contains(3));
    EXPECT_FALSE(s.contains(2));
    EXPECT_EQ(s.to_string(), "{1,3,5}");
}

TEST(SupportSet, OfUsesExactZeroTest) {
    Vector v(4);
    v << 0.0, 1e-300, -0.0, 2.0;
    EXPECT_EQ(SupportSet::of(v), (SupportSet{1, 3}));
}

TEST(SupportSet, SetAlgebraAndOrder) {
    const SupportSet a{0, 2}, b{0, 2, 4};
    EXPECT_TRUE(a.is_subset_of(b));
    EXPECT_FALSE(b.is_subset_of(a));
    EXPECT_EQ(a.united(SupportSet{1}), (SupportSet{0, 1, 2}));
    EXPECT_EQ(b.minus(a), (SupportSet{4}));
    EXPECT_LT(a, b);
    EXPECT_LT((SupportSet{0, 1}), (SupportSet{0, 2}));
    EXPECT_EQ(SupportSetHash{}(a), SupportSetHash{}(SupportSet{2, 0}));
}

TEST(LambdaGrid, RejectsInvalidValues) {
    EXPECT_THROW(LambdaGrid({}), std::invalid_argument);
    EXPECT_THROW(LambdaGrid({1.0, 1.0}), std::invalid_argument);
    EXPECT_THROW(LambdaGrid({2.0, 1.0}), std::invalid_argument);
    EXPECT_THROW(LambdaGrid({0.0, 1.0}), std::invalid_argument);
    EXPECT_THROW(LambdaGrid({1.0, std::numeric_limits<double>::infinity()}), std::invalid_argument);
    const LambdaGrid g({0.1, 0.5, 2.0});
    EXPECT_EQ(g.size(), 3u);
    EXPECT_DOUBLE_EQ(g.min(), 0.1);
    EXPECT_DOUBLE_EQ(g.max(), 2.0);
}

TEST(TrueModel, SupportAndBetaMin) {
    Vector b(5);
    b << 3, 1.5, 0, 0, -2;
    const TrueModel m = TrueModel::from_beta(b, 4.0);
    EXPECT_EQ(m.support, (SupportSet{0, 1, 4}));
    EXPECT_EQ(m.t(), 3);
    EXPECT_DOUBLE_EQ(m.beta_min(), 1.5);
    EXPECT_DOUBLE_EQ(TrueModel::from_beta(Vector::Zero(3)).beta_min(), 0.0);
}

TEST(Standardize, UnitNormExactExample) {
    Matrix X(4, 1);
    X << 3, 4, 0, 0;
    const auto sd = standardize_design(X, Standardization::kUnitNorm);
    EXPECT_DOUBLE_EQ(sd.X(0, 0), 0.6);
    EXPECT_DOUBLE_EQ(sd.X(1, 0), 0.8);
    EXPECT_DOUBLE_EQ(sd.X(2, 0), 0.0);
    EXPECT_DOUBLE_EQ(sd.scale[0], 5.0);
}

TEST(Standardize, AlreadyUnitNormUnchanged) {
    Matrix X(2, 1);
    X << 0.6, 0.8;
    const auto sd = standardize_design(X, Standardization::kUnitNorm);
    EXPECT_NEAR((sd.X - X).cwiseAbs().maxCoeff(), 0.0, 1e-15);
    EXPECT_NEAR(sd.scale[0], 1.0, 1e-15);
}

TEST(Standardize, RandomNormsAndScaleRecovery) {
    const Matrix X = oracle::gaussian_matrix(5, 3, 11);
    const auto sd = standardize_design(X, Standardization::kUnitNorm);
    for (Index j = 0; j < 3; ++j) EXPECT_NEAR(sd.X.col(j).norm(), 1.0, 1e-10);
    EXPECT_LT((sd.X * sd.scale.asDiagonal() - X).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Standardize, SqrtNCentresAndScales) {
    const Matrix X = oracle::gaussian_matrix(30, 4, 12).array() + 3.0;
    const auto sd = standardize_design(X, Standardization::kSqrtN);
    for (Index j = 0; j < 4; ++j) {
        EXPECT_NEAR(sd.X.col(j).squaredNorm(), 30.0, 1e-9);
        EXPECT_NEAR(sd.X.col(j).mean(), 0.0, 1e-12);
    }
}

TEST(Standardize, Idempotent) {
    const Matrix X = oracle::gaussian_matrix(20, 5, 13);
    for (auto mode : {Standardization::kUnitNorm, Standardization::kSqrtN}) {
        const auto once = standardize_design(X, mode);
        const auto twice = standardize_design(once.X, mode);
        EXPECT_LT((once.X - twice.X).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Standardize, BackMappingPreservesPredictions) {
    const Matrix X = oracle::gaussian_matrix(15, 4, 14);
    const Vector beta = oracle::gaussian_vector(4, 15);
    for (auto mode : {Standardization::kUnitNorm, Standardization::kSqrtN}) {
        const auto sd = standardize_design(X, mode);
        const Vector orig = coefficients_to_original_scale(beta, sd);
        const Matrix centred = X.rowwise() - sd.center.transpose();
        EXPECT_LT((sd.X * beta - centred * orig).cwiseAbs().maxCoeff(), 1e-10);
    }
}

TEST(Standardize, ZeroColumnFlagged) {
    Matrix X = oracle::gaussian_matrix(6, 3, 16);
    X.col(1).setZero();
    try {
        standardize_design(X, Standardization::kUnitNorm);
        FAIL() << "expected DataError";
    } catch (const DataError& e) {
        EXPECT_EQ(e.code(), DataErrorCode::kZeroColumn);
        EXPECT_EQ(e.column(), 1);
    }
    // A constant column vanishes after centring.
    Matrix C = oracle::gaussian_matrix(6, 2, 17);
    C.col(0).setConstant(2.0);
    EXPECT_THROW(standardize_design(C, Standardization::kSqrtN), DataError);
}

namespace {

Dataset valid_quadratic() { return make_dataset(oracle::gaussian_matrix(10, 3, 21), oracle::gaussian_vector(10, 22), Family::kQuadratic); }

bool has_code(const std::vector<DataIssue>& issues, DataErrorCode code) {
    for (const auto& i : issues)
        if (i.code == code) return true;
    return false;
}

}  // namespace

TEST(Validate, ValidQuadraticOk) { EXPECT_TRUE(validate_dataset(valid_quadratic()).empty()); }

TEST(Validate, LogisticBadLabel) {
    Dataset d = valid_quadratic();
    d.family = Family::kLogistic;
    d.y.setZero();
    d.y[3] = 0.5;
    EXPECT_TRUE(has_code(validate_dataset(d), DataErrorCode::kBadLabel));
}

TEST(Validate, HingeLabelsMustBeSigned) {
    Dataset d = valid_quadratic();
    d.family = Family::kSquaredHinge;
    d.y.setOnes();
    EXPECT_TRUE(validate_dataset(d).empty());
    d.y[0] = 0.0;
    EXPECT_TRUE(has_code(validate_dataset(d), DataErrorCode::kBadLabel));
}

TEST(Validate, TooFewObservations) {
    Dataset d;
    d.X = Matrix::Ones(1, 2);
    d.y = Vector::Ones(1);
    EXPECT_TRUE(has_code(validate_dataset(d), DataErrorCode::kTooFewObservations));
}

TEST(Validate, DimensionMismatchAndNonFinite) {
    Dataset d = valid_quadratic();
    d.y = Vector::Zero(9);
    EXPECT_TRUE(has_code(validate_dataset(d), DataErrorCode::kDimensionMismatch));
    Dataset e = valid_quadratic();
    e.X(2, 1) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_TRUE(has_code(validate_dataset(e), DataErrorCode::kNonFinite));
    EXPECT_THROW(require_valid(e), DataError);
}

TEST(Validate, NoPredictorsAndDeclaredScale) {
    Dataset d;
    d.X = Matrix(4, 0);
    d.y = Vector::Zero(4);
    EXPECT_TRUE(has_code(validate_dataset(d), DataErrorCode::kNoPredictors));
    Dataset e = valid_quadratic();
    e.X.col(0) *= 2.0;
    EXPECT_TRUE(has_code(validate_dataset(e), DataErrorCode::kNotStandardized));
}

TEST(Dataset, InterceptIsUnpenalizedAndScaled) {
    DatasetOptions o;
    o.intercept = true;
    const Dataset d = make_dataset(oracle::gaussian_matrix(9, 2, 23), oracle::gaussian_vector(9, 24),
                                   Family::kQuadratic, o, {"a", "b"});
    EXPECT_EQ(d.p(), 3);
    EXPECT_EQ(d.unpenalized, (std::vector<Index>{0}));
    EXPECT_FALSE(d.is_penalized(0));
    EXPECT_TRUE(d.is_penalized(1));
    EXPECT_NEAR(d.X.col(0).norm(), 1.0, 1e-12);
    EXPECT_EQ(d.names.front(), "(intercept)");
}

TEST(Dataset, ToUnitNormAndLambdaConversion) {
    DatasetOptions o;
    o.standardization = Standardization::kSqrtN;
    const Dataset d = make_dataset(oracle::gaussian_matrix(16, 3, 25), oracle::gaussian_vector(16, 26),
                                   Family::kQuadratic, o);
    const Dataset u = to_unit_norm(d);
    EXPECT_EQ(u.standardization, Standardization::kUnitNorm);
    for (Index j = 0; j < 3; ++j) EXPECT_NEAR(u.X.col(j).norm(), 1.0, 1e-12);
    EXPECT_DOUBLE_EQ(lambda_unit_to_sqrt_n(2.0, 16), 8.0);
    EXPECT_DOUBLE_EQ(lambda_sqrt_n_to_unit(8.0, 16), 2.0);
}

TEST(Dataset, EmbedAndSelectColumns) {
    Vector bJ(2);
    bJ << 7, -1;
    const Vector full = embed(SupportSet{1, 3}, bJ, 5);
    Vector want(5);
    want << 0, 7, 0, -1, 0;
    EXPECT_EQ(full, want);
    const Matrix X = oracle::gaussian_matrix(4, 5, 27);
    const Matrix S = select_columns(X, SupportSet{1, 3});
    EXPECT_EQ(S.col(0), X.col(1));
    EXPECT_EQ(S.col(1), X.col(3));
}

TEST(Names, FamilyAndStandardizationRoundTrip) {
    for (auto f : {Family::kQuadratic, Family::kLogistic, Family::kAbsolute, Family::kSquaredHinge})
        EXPECT_EQ(parse_family(to_string(f)), f);
    for (auto s : {Standardization::kUnitNorm, Standardization::kSqrtN, Standardization::kNone})
        EXPECT_EQ(parse_standardization(to_string(s)), s);
    EXPECT_THROW(parse_family("probit"), std::invalid_argument);
}
