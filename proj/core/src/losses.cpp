#include "ssnet/losses.hpp"

#include <cmath>
#include <limits>

namespace ssnet {

LossFamily LossFamily::of(Family kind) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    switch (kind) {
        case Family::kQuadratic: return {kind, true, inf};
        case Family::kLogistic: return {kind, true, 2.0};
        case Family::kAbsolute: return {kind, false, 1.0};
        case Family::kSquaredHinge: return {kind, true, inf};
    }
    return {kind, true, inf};
}

LossFamily with_lipschitz_bound(LossFamily family, const Matrix& X, const Vector& y,
                                double radius) {
    // |eta| <= ||x_i|| radius on the ball.
    const Vector row_norms = X.rowwise().norm();
    double bound = 0.0;
    switch (family.kind) {
        case Family::kQuadratic:
            for (Index i = 0; i < X.rows(); ++i) {
                bound = std::max(bound, std::abs(y[i]) + row_norms[i] * radius);
            }
            family.lipschitz_L = bound;
            break;
        case Family::kSquaredHinge:
            family.lipschitz_L = 2.0 * (1.0 + row_norms.maxCoeff() * radius);
            break;
        default:
            break;
    }
    return family;
}

double log1p_exp(double eta) {
    return eta > 0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
}

double sigmoid(double eta) {
    if (eta >= 0) return 1.0 / (1.0 + std::exp(-eta));
    const double e = std::exp(eta);
    return e / (1.0 + e);
}

double logistic_curvature(double eta) {
    const double mu = sigmoid(eta);
    return mu * (1.0 - mu);
}

CumulantEval cumulant(Family family, double eta) {
    switch (family) {
        case Family::kQuadratic: return {0.5 * eta * eta, eta};
        case Family::kLogistic: return {log1p_exp(eta), sigmoid(eta)};
        default: throw std::invalid_argument("cumulant: family has no GLM cumulant");
    }
}

double contrast(Family family, double eta, double y) {
    switch (family) {
        case Family::kQuadratic: {
            const double r = y - eta;
            return 0.5 * r * r;
        }
        case Family::kLogistic: return log1p_exp(eta) - y * eta;
        case Family::kAbsolute: return std::abs(y - eta);
        case Family::kSquaredHinge: {
            const double m = std::max(0.0, 1.0 - y * eta);
            return m * m;
        }
    }
    return 0.0;
}

double contrast_derivative(Family family, double eta, double y) {
    switch (family) {
        case Family::kQuadratic: return eta - y;
        case Family::kLogistic: return sigmoid(eta) - y;
        case Family::kAbsolute: return eta > y ? 1.0 : (eta < y ? -1.0 : 0.0);
        case Family::kSquaredHinge: return -2.0 * y * std::max(0.0, 1.0 - y * eta);
    }
    return 0.0;
}

double loss_value(Family family, const Vector& eta, const Vector& y) {
    if (eta.size() != y.size()) throw std::invalid_argument("loss_value: size mismatch");
    double total = 0.0;
    for (Index i = 0; i < eta.size(); ++i) total += contrast(family, eta[i], y[i]);
    return total;
}

Vector contrast_derivatives(Family family, const Vector& eta, const Vector& y) {
    Vector g(eta.size());
    for (Index i = 0; i < eta.size(); ++i) g[i] = contrast_derivative(family, eta[i], y[i]);
    return g;
}

Vector loss_gradient(Family family, const Matrix& X, const Vector& y, const Vector& beta) {
    if (X.cols() != beta.size() || X.rows() != y.size()) {
        throw std::invalid_argument("loss_gradient: dimension mismatch");
    }
    const Vector eta = X * beta;
    return X.transpose() * contrast_derivatives(family, eta, y);
}

double logistic_convexity_constant(const Matrix& X, std::span<const CoefficientVector> probes) {
    if (probes.empty()) throw std::invalid_argument("logistic_convexity_constant: no probes");
    double c = 0.25;
    for (const auto& beta : probes) {
        const Vector eta = X * beta.values;
        for (Index i = 0; i < eta.size(); ++i) c = std::min(c, logistic_curvature(eta[i]));
    }
    return c;
}

}  // namespace ssnet
