#pragma once

#include "ssnet/model.hpp"

#include <span>

namespace ssnet {

// Contrast phi(eta, y) per observation; the loss is the sum over rows.
//   quadratic      (y - eta)^2 / 2
//   logistic       log(1 + e^eta) - y eta          y in {0, 1}
//   absolute       |y - eta|                       (median regression)
//   squared-hinge  max(0, 1 - y eta)^2             y in {-1, +1}
struct LossFamily {
    Family kind = Family::kQuadratic;
    bool smooth = true;
    // Lipschitz constant of phi in eta. Infinite for the quadratic and
    // squared-hinge contrasts until bounded on a ball with
    // with_lipschitz_bound().
    double lipschitz_L = 0.0;

    static LossFamily of(Family kind);
};

// Bounds L over {beta : ||beta|| <= radius} for the data-dependent
// contrasts; absolute and logistic keep their global constants.
LossFamily with_lipschitz_bound(LossFamily family, const Matrix& X, const Vector& y,
                                double radius);

// GLM cumulant gamma(eta) and its derivative (quadratic and logistic only).
struct CumulantEval {
    double value;
    double derivative;
};
CumulantEval cumulant(Family family, double eta);

// gamma''(eta) = e^eta / (1 + e^eta)^2, at most 1/4.
double logistic_curvature(double eta);
// Overflow-safe log(1 + e^eta) and e^eta / (1 + e^eta).
double log1p_exp(double eta);
double sigmoid(double eta);

double contrast(Family family, double eta, double y);
// d phi / d eta; for the absolute contrast sign(eta - y) with 0 at a kink.
double contrast_derivative(Family family, double eta, double y);

double loss_value(Family family, const Vector& eta, const Vector& y);
// Per-row derivatives d phi(eta_i, y_i) / d eta_i.
Vector contrast_derivatives(Family family, const Vector& eta, const Vector& y);
// X' phi'(X beta, y); a subgradient for the absolute contrast.
Vector loss_gradient(Family family, const Matrix& X, const Vector& y, const Vector& beta);

// Estimate of the logistic strong-convexity constant c: the smallest
// gamma''(x_i' beta) over all rows and the supplied probe vectors. This is
// an estimate over a finite probe set, not the infimum over the ball.
double logistic_convexity_constant(const Matrix& X, std::span<const CoefficientVector> probes);

}  // namespace ssnet
