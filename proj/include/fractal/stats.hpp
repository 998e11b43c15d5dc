#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace fractal {

struct BootstrapResult {
    double point_estimate = 0.0;
    double margin = 0.0;  // standard deviation of the replicate estimates
    std::size_t n_resamples = 0;
    std::uint64_t seed = 0;
    std::size_t failed_replicates = 0;
    // Populated only when percentile intervals are requested.
    std::optional<std::pair<double, double>> percentile_interval;
};

struct BootstrapOptions {
    std::size_t resamples = 1000;
    std::uint64_t seed = 0;
    // Stream offset so independent bootstraps under one seed stay decoupled.
    std::uint64_t stream = 0;
    std::size_t workers = 1;
    bool percentile = false;       // also report a percentile interval
    double percentile_level = 0.90;
};

// Resamples item indices with replacement and re-runs `estimator` per
// replicate. The estimator receives an index multiset into the caller's
// collection. Deterministic per (seed, stream): replicate r draws from its
// own RNG stream, so worker count cannot affect the result.
//
// Replicates where the estimator throws are skipped; more than 10% failures
// raises BootstrapInstabilityError.
BootstrapResult bootstrap_ci(std::size_t n_items,
                             const std::function<double(std::span<const std::size_t>)>& estimator,
                             const BootstrapOptions& options);

// Median; even-length inputs average the two central values.
double median_across_domains(std::span<const double> values);

// Pearson correlation coefficient.
double pearson(std::span<const double> a, std::span<const double> b);

struct RegressionResult {
    double intercept = 0.0;
    double slope = 0.0;
    double r_squared = 0.0;
    double adjusted_r_squared = 0.0;
    std::size_t n = 0;
    std::size_t p = 1;  // predictor count
};

// Simple (single-predictor) OLS with adjusted R^2
//   = 1 - (1 - R^2)(n - 1)/(n - p - 1).
RegressionResult adjusted_r2(std::span<const double> x, std::span<const double> y);

// Combined quality metric 1/bpb + h: reciprocal bits-per-byte so that
// higher is better, plus the Hurst estimate.
double hb_metric(double bpb, double h);

}  // namespace fractal
