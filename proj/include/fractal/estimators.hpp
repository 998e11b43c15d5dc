#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fractal/powerlaw.hpp"
#include "fractal/series.hpp"

namespace fractal {

enum class FractalParameter { S, H, J, D };

std::string parameter_name(FractalParameter p);

struct FractalEstimate {
    FractalParameter parameter = FractalParameter::S;
    double value = 0.0;
    std::optional<PowerLawFit> fit;  // absent for D
    double margin = 0.0;             // filled by the bootstrap layer
    std::size_t n_documents = 0;
    std::size_t dropped_points = 0;   // grid points excluded from the fit
    std::size_t excluded_blocks = 0;  // zero-scale R/S blocks skipped
    bool outside_soft_range = false;  // S, H outside [0, 1.2]
};

struct CurvePoint {
    std::size_t x = 0;
    double y = 0.0;
};

struct EstimateResult {
    FractalEstimate estimate;
    std::vector<CurvePoint> curve;  // every grid point, including dropped ones
};

struct CorrelogramResult {
    std::vector<std::size_t> lags;  // 0..max_lag
    std::vector<double> autocov;    // biased estimator, divide by N
    std::vector<double> pacf;       // empty unless a PACF was requested
};

// --- per-document sufficient statistics -------------------------------
//
// Every pooled estimator decomposes into additive per-document counts or
// moments. Point estimates and bootstrap replicates are both computed from
// these, so a replicate is exactly "the estimator re-run on the resampled
// documents" at a fraction of the cost.

struct EventCountStats {
    // hits[e][g]: |X_{t+tau} - X_t| <= epsilon[e] count at grid point g
    std::vector<std::vector<std::int64_t>> hits;
    std::vector<std::int64_t> pairs;  // per grid point
};

struct IncrementMomentStats {
    std::vector<double> sum;      // per grid point, over tau-increments
    std::vector<double> sum_sq;
    std::vector<std::int64_t> count;
};

struct RescaledRangeStats {
    std::vector<double> rs_sum;          // per grid point
    std::vector<std::int64_t> blocks;    // usable blocks
    std::vector<std::int64_t> excluded;  // zero-scale blocks skipped
};

// How the running mean is removed inside the rescaled-range statistic.
// block_mean is the standard scheme; literal_prefix reproduces the 1/t
// prefactor variant over document prefixes and exists for diagnostics only.
enum class RsMeanAdjust { block_mean, literal_prefix };

EventCountStats selfsim_doc_stats(const IntegralProcess& doc, std::span<const double> epsilons,
                                  const EvalGrid& grid);
IncrementMomentStats increment_moment_stats(const IntegralProcess& doc, const EvalGrid& grid);
RescaledRangeStats rs_doc_stats(const IncrementProcess& doc, const EvalGrid& grid,
                                RsMeanAdjust adjust = RsMeanAdjust::block_mean);

// --- estimators over a pooled document set ----------------------------
//
// The *_from_stats variants take a document index multiset (with
// repetition), which is what the bootstrap resamples.

EstimateResult selfsim_from_stats(std::span<const EventCountStats> stats,
                                  std::span<const std::size_t> doc_indices,
                                  std::size_t eps_index, const EvalGrid& grid);
EstimateResult joseph_from_stats(std::span<const IncrementMomentStats> stats,
                                 std::span<const std::size_t> doc_indices, const EvalGrid& grid);
EstimateResult variance_growth_from_stats(std::span<const IncrementMomentStats> stats,
                                          std::span<const std::size_t> doc_indices,
                                          const EvalGrid& grid);
EstimateResult rs_from_stats(std::span<const RescaledRangeStats> stats,
                             std::span<const std::size_t> doc_indices, const EvalGrid& grid);

// Probability mass of |X_{t+tau} - X_t| <= epsilon, pooled across
// documents, fitted as p(tau) ~ tau^-S.
EstimateResult self_similarity_exponent(std::span<const IntegralProcess> docs, double epsilon,
                                        const EvalGrid& grid);

// One pass of the event counts shared across several epsilon values;
// returns one estimate per epsilon.
std::vector<EstimateResult> self_similarity_sweep(std::span<const IntegralProcess> docs,
                                                  std::span<const double> epsilons,
                                                  const EvalGrid& grid);

// Rescaled-range analysis: documents are cut into non-overlapping blocks of
// length n, each block contributes range(mean-adjusted cumsum)/std, and the
// block average is fitted as R/S(n) ~ n^H.
EstimateResult hurst_rs(std::span<const IncrementProcess> docs, const EvalGrid& grid,
                        RsMeanAdjust adjust = RsMeanAdjust::block_mean);

// Standard deviation of pooled tau-increments, fitted as sigma ~ tau^J.
EstimateResult joseph_exponent(std::span<const IntegralProcess> docs, const EvalGrid& grid);

// Variance of pooled tau-increments fitted against tau; H = slope / 2.
// Cross-check only; shares its pooled moments with joseph_exponent, so the
// two slopes agree identically.
EstimateResult hurst_variance(std::span<const IntegralProcess> docs, const EvalGrid& grid);

// D = 2 - S, margin carried over.
FractalEstimate fractal_dimension(const FractalEstimate& s_estimate);

CorrelogramResult autocovariance(const IncrementProcess& x, std::size_t max_lag);

// Partial autocorrelations by Durbin-Levinson from the biased
// autocovariance sequence.
CorrelogramResult pacf(const IncrementProcess& x, std::size_t max_lag);

// PACF of a document set: per-document autocovariances averaged with equal
// weight, then the same recursion.
CorrelogramResult pooled_pacf(std::span<const IncrementProcess> docs, std::size_t max_lag);

}  // namespace fractal
