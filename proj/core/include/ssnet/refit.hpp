#pragma once

#include "ssnet/model.hpp"

#include <atomic>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <unordered_map>

namespace ssnet {

struct RefitOptions {
    int max_iter = 200;
    // Gradient sup-norm stop for the Newton refits.
    double grad_tol = 1e-8;
    // Logistic separation guard on |beta_J|_inf.
    double separation_bound = 1e3;
    // Relative pivot threshold for the rank check.
    double rank_tol = 1e-10;
};

// Minimum-loss estimator on a support J (unpenalized columns included in J
// by the caller).
struct RefitResult {
    SupportSet support;
    Vector beta_J;
    double loss = 0.0;
    bool converged = false;
    bool rank_ok = false;
    int iterations = 0;
};

class RankDeficient : public std::runtime_error {
public:
    explicit RankDeficient(SupportSet support);
    const SupportSet& support() const noexcept { return support_; }

private:
    SupportSet support_;
};

// Rank of X_J is |J| under a column-pivoted QR with relative threshold.
bool has_full_column_rank(const Matrix& X, const SupportSet& J, double rank_tol = 1e-10);

// quadratic      least squares through column-pivoted QR
// logistic       damped Newton with step halving; stops (converged = false)
//                once |beta_J|_inf exceeds the separation bound
// squared-hinge  damped Newton on the piecewise-quadratic objective
// absolute       IRLS with a shrinking smoothing schedule, then an exact
//                basic-solution polish certified by the LAD optimality test
// The loss is evaluated at the embedded full-length coefficient vector.
// Throws RankDeficient when X_J is not of full column rank. An empty J
// returns the loss at beta = 0.
RefitResult refit_ml(const Dataset& d, const SupportSet& J, const RefitOptions& options = {},
                     const Vector* init = nullptr);

// Same as refit_ml but reports rank deficiency through rank_ok instead of
// throwing.
RefitResult try_refit_ml(const Dataset& d, const SupportSet& J, const RefitOptions& options = {},
                         const Vector* init = nullptr);

// Loss of the empty model, l(0).
double null_loss(const Dataset& d);

// Refits memoized by support. Concurrent lookups share a reader lock;
// inserts are serialized.
class RefitCache {
public:
    explicit RefitCache(const Dataset& d, RefitOptions options = {});

    // Rank-deficient supports are cached with rank_ok = false.
    const RefitResult& get(const SupportSet& J, const Vector* init = nullptr);

    std::size_t size() const;
    std::size_t hits() const noexcept { return hits_.load(); }
    std::size_t misses() const noexcept { return misses_.load(); }
    const Dataset& dataset() const noexcept { return d_; }

private:
    const Dataset& d_;
    RefitOptions options_;
    mutable std::shared_mutex mutex_;
    std::unordered_map<SupportSet, std::unique_ptr<RefitResult>, SupportSetHash> cache_;
    std::atomic<std::size_t> hits_{0};
    std::atomic<std::size_t> misses_{0};
};

}  // namespace ssnet
