#include "fractal/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fractal/error.hpp"

namespace fractal {

namespace {

constexpr double kSoftRangeLo = 0.0;
constexpr double kSoftRangeHi = 1.2;

std::vector<std::size_t> identity_indices(std::size_t n) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    return idx;
}

void require_docs_cover_grid(std::size_t min_doc_length, const EvalGrid& grid,
                             const char* who) {
    if (grid.points.empty()) {
        throw InvalidInputError(std::string(who) + ": empty evaluation grid");
    }
    if (min_doc_length <= grid.max()) {
        throw InvalidInputError(std::string(who) + ": every document must be longer than the " +
                                "largest grid point (" + std::to_string(grid.max()) + ")");
    }
}

PowerLawFit fit_curve(const std::vector<CurvePoint>& curve, std::size_t* dropped,
                      const char* who) {
    std::vector<PointXY> pts;
    pts.reserve(curve.size());
    std::size_t zero_points = 0;
    for (const auto& c : curve) {
        if (c.y > 0.0) {
            pts.push_back({static_cast<double>(c.x), c.y});
        } else {
            ++zero_points;
        }
    }
    if (pts.empty()) {
        throw InsufficientSignalError(std::string(who) +
                                      ": no events at any scale; try a larger epsilon");
    }
    if (dropped != nullptr) *dropped = zero_points;
    return fit_power_law(pts);
}

}  // namespace

std::string parameter_name(FractalParameter p) {
    switch (p) {
        case FractalParameter::S: return "S";
        case FractalParameter::H: return "H";
        case FractalParameter::J: return "J";
        case FractalParameter::D: return "D";
    }
    return "?";
}

// --- per-document statistics -------------------------------------------

EventCountStats selfsim_doc_stats(const IntegralProcess& doc, std::span<const double> epsilons,
                                  const EvalGrid& grid) {
    const std::size_t n = doc.values.size();
    EventCountStats stats;
    stats.hits.assign(epsilons.size(), std::vector<std::int64_t>(grid.points.size(), 0));
    stats.pairs.assign(grid.points.size(), 0);

    for (std::size_t g = 0; g < grid.points.size(); ++g) {
        const std::size_t tau = grid.points[g];
        if (tau >= n) continue;
        stats.pairs[g] = static_cast<std::int64_t>(n - tau);
        for (std::size_t t = 0; t + tau < n; ++t) {
            const double diff = std::abs(doc.values[t + tau] - doc.values[t]);
            for (std::size_t e = 0; e < epsilons.size(); ++e) {
                if (diff <= epsilons[e]) ++stats.hits[e][g];
            }
        }
    }
    return stats;
}

IncrementMomentStats increment_moment_stats(const IntegralProcess& doc, const EvalGrid& grid) {
    const std::size_t n = doc.values.size();
    IncrementMomentStats stats;
    stats.sum.assign(grid.points.size(), 0.0);
    stats.sum_sq.assign(grid.points.size(), 0.0);
    stats.count.assign(grid.points.size(), 0);

    for (std::size_t g = 0; g < grid.points.size(); ++g) {
        const std::size_t tau = grid.points[g];
        if (tau >= n) continue;
        double s = 0.0, s2 = 0.0;
        for (std::size_t t = 0; t + tau < n; ++t) {
            const double d = doc.values[t + tau] - doc.values[t];
            s += d;
            s2 += d * d;
        }
        stats.sum[g] = s;
        stats.sum_sq[g] = s2;
        stats.count[g] = static_cast<std::int64_t>(n - tau);
    }
    return stats;
}

RescaledRangeStats rs_doc_stats(const IncrementProcess& doc, const EvalGrid& grid,
                                RsMeanAdjust adjust) {
    const std::size_t n = doc.values.size();
    RescaledRangeStats stats;
    stats.rs_sum.assign(grid.points.size(), 0.0);
    stats.blocks.assign(grid.points.size(), 0);
    stats.excluded.assign(grid.points.size(), 0);

    for (std::size_t g = 0; g < grid.points.size(); ++g) {
        const std::size_t block_len = grid.points[g];
        if (block_len > n) continue;

        if (adjust == RsMeanAdjust::literal_prefix) {
            // Diagnostic variant: one prefix of length block_len per
            // document, running-mean adjustment with the literal 1/t
            // prefactor (y_0 := 0).
            double prefix_sum = 0.0, prefix_sq = 0.0;
            double y_cum = 0.0, y_min = 0.0, y_max = 0.0;
            for (std::size_t t = 0; t < block_len; ++t) {
                const double x = doc.values[t];
                prefix_sum += x;
                prefix_sq += x * x;
                const double y =
                    (t == 0) ? 0.0 : x - prefix_sum / static_cast<double>(t);
                y_cum += y;
                y_min = std::min(y_min, y_cum);
                y_max = std::max(y_max, y_cum);
            }
            const double mean = prefix_sum / static_cast<double>(block_len);
            const double var = prefix_sq / static_cast<double>(block_len) - mean * mean;
            if (var > 0.0) {
                stats.rs_sum[g] += (y_max - y_min) / std::sqrt(var);
                ++stats.blocks[g];
            } else {
                ++stats.excluded[g];
            }
            continue;
        }

        const std::size_t n_blocks = n / block_len;
        for (std::size_t b = 0; b < n_blocks; ++b) {
            const double* block = doc.values.data() + b * block_len;
            double sum = 0.0, sum_sq = 0.0;
            for (std::size_t t = 0; t < block_len; ++t) {
                sum += block[t];
                sum_sq += block[t] * block[t];
            }
            const double mean = sum / static_cast<double>(block_len);
            const double var = sum_sq / static_cast<double>(block_len) - mean * mean;
            if (var <= 0.0) {
                ++stats.excluded[g];
                continue;
            }

            double y_cum = 0.0;
            double y_min = 0.0, y_max = 0.0;
            for (std::size_t t = 0; t < block_len; ++t) {
                y_cum += block[t] - mean;
                y_min = std::min(y_min, y_cum);
                y_max = std::max(y_max, y_cum);
            }
            stats.rs_sum[g] += (y_max - y_min) / std::sqrt(var);
            ++stats.blocks[g];
        }
    }
    return stats;
}

// --- pooled estimators ---------------------------------------------------

EstimateResult selfsim_from_stats(std::span<const EventCountStats> stats,
                                  std::span<const std::size_t> doc_indices,
                                  std::size_t eps_index, const EvalGrid& grid) {
    const std::size_t n_grid = grid.points.size();
    std::vector<std::int64_t> hits(n_grid, 0), pairs(n_grid, 0);
    for (const std::size_t d : doc_indices) {
        for (std::size_t g = 0; g < n_grid; ++g) {
            hits[g] += stats[d].hits[eps_index][g];
            pairs[g] += stats[d].pairs[g];
        }
    }

    EstimateResult result;
    result.curve.reserve(n_grid);
    for (std::size_t g = 0; g < n_grid; ++g) {
        const double p = pairs[g] > 0
                             ? static_cast<double>(hits[g]) / static_cast<double>(pairs[g])
                             : 0.0;
        result.curve.push_back({grid.points[g], p});
    }

    auto& est = result.estimate;
    est.parameter = FractalParameter::S;
    est.n_documents = doc_indices.size();
    est.fit = fit_curve(result.curve, &est.dropped_points, "self_similarity_exponent");
    est.value = -est.fit->exponent;
    est.outside_soft_range = est.value < kSoftRangeLo || est.value > kSoftRangeHi;
    return result;
}

EstimateResult joseph_from_stats(std::span<const IncrementMomentStats> stats,
                                 std::span<const std::size_t> doc_indices,
                                 const EvalGrid& grid) {
    const std::size_t n_grid = grid.points.size();
    EstimateResult result;
    result.curve.reserve(n_grid);
    for (std::size_t g = 0; g < n_grid; ++g) {
        double s = 0.0, s2 = 0.0;
        std::int64_t n = 0;
        for (const std::size_t d : doc_indices) {
            s += stats[d].sum[g];
            s2 += stats[d].sum_sq[g];
            n += stats[d].count[g];
        }
        if (n == 0) {
            throw InsufficientDataError("joseph_exponent: no increments at tau = " +
                                        std::to_string(grid.points[g]));
        }
        const double mean = s / static_cast<double>(n);
        const double var = s2 / static_cast<double>(n) - mean * mean;
        if (var <= 0.0) {
            throw DegenerateSeriesError("joseph_exponent: zero increment variance at tau = " +
                                        std::to_string(grid.points[g]));
        }
        result.curve.push_back({grid.points[g], std::sqrt(var)});
    }

    auto& est = result.estimate;
    est.parameter = FractalParameter::J;
    est.n_documents = doc_indices.size();
    est.fit = fit_curve(result.curve, &est.dropped_points, "joseph_exponent");
    est.value = est.fit->exponent;
    return result;
}

EstimateResult variance_growth_from_stats(std::span<const IncrementMomentStats> stats,
                                          std::span<const std::size_t> doc_indices,
                                          const EvalGrid& grid) {
    EstimateResult sigma = joseph_from_stats(stats, doc_indices, grid);

    EstimateResult result;
    result.curve.reserve(sigma.curve.size());
    for (const auto& c : sigma.curve) {
        result.curve.push_back({c.x, c.y * c.y});
    }

    auto& est = result.estimate;
    est.parameter = FractalParameter::H;
    est.n_documents = doc_indices.size();
    est.fit = fit_curve(result.curve, &est.dropped_points, "hurst_variance");
    est.value = est.fit->exponent / 2.0;
    est.outside_soft_range = est.value < kSoftRangeLo || est.value > kSoftRangeHi;
    return result;
}

EstimateResult rs_from_stats(std::span<const RescaledRangeStats> stats,
                             std::span<const std::size_t> doc_indices, const EvalGrid& grid) {
    const std::size_t n_grid = grid.points.size();
    EstimateResult result;
    result.curve.reserve(n_grid);
    std::size_t excluded_total = 0;
    for (std::size_t g = 0; g < n_grid; ++g) {
        double rs = 0.0;
        std::int64_t blocks = 0;
        for (const std::size_t d : doc_indices) {
            rs += stats[d].rs_sum[g];
            blocks += stats[d].blocks[g];
            excluded_total += static_cast<std::size_t>(stats[d].excluded[g]);
        }
        if (blocks == 0) {
            throw InsufficientDataError("hurst_rs: every block excluded at n = " +
                                        std::to_string(grid.points[g]));
        }
        result.curve.push_back({grid.points[g], rs / static_cast<double>(blocks)});
    }

    auto& est = result.estimate;
    est.parameter = FractalParameter::H;
    est.n_documents = doc_indices.size();
    est.excluded_blocks = excluded_total;
    est.fit = fit_curve(result.curve, &est.dropped_points, "hurst_rs");
    est.value = est.fit->exponent;
    est.outside_soft_range = est.value < kSoftRangeLo || est.value > kSoftRangeHi;
    return result;
}

// --- public entry points --------------------------------------------------

std::vector<EstimateResult> self_similarity_sweep(std::span<const IntegralProcess> docs,
                                                  std::span<const double> epsilons,
                                                  const EvalGrid& grid) {
    if (docs.empty()) {
        throw InvalidInputError("self_similarity_exponent: no documents");
    }
    for (const double eps : epsilons) {
        if (!(eps > 0.0)) {
            throw InvalidInputError("self_similarity_exponent: epsilon must be > 0");
        }
    }
    std::size_t min_len = docs[0].values.size();
    for (const auto& d : docs) min_len = std::min(min_len, d.values.size());
    require_docs_cover_grid(min_len, grid, "self_similarity_exponent");

    std::vector<EventCountStats> stats;
    stats.reserve(docs.size());
    for (const auto& d : docs) stats.push_back(selfsim_doc_stats(d, epsilons, grid));

    const auto idx = identity_indices(docs.size());
    std::vector<EstimateResult> out;
    out.reserve(epsilons.size());
    for (std::size_t e = 0; e < epsilons.size(); ++e) {
        out.push_back(selfsim_from_stats(stats, idx, e, grid));
    }
    return out;
}

EstimateResult self_similarity_exponent(std::span<const IntegralProcess> docs, double epsilon,
                                        const EvalGrid& grid) {
    const double eps[1] = {epsilon};
    return std::move(self_similarity_sweep(docs, eps, grid).front());
}

EstimateResult hurst_rs(std::span<const IncrementProcess> docs, const EvalGrid& grid,
                        RsMeanAdjust adjust) {
    if (docs.empty()) {
        throw InvalidInputError("hurst_rs: no documents");
    }
    if (grid.points.empty() || grid.min() < 4) {
        throw InvalidInputError("hurst_rs: grid minimum must be >= 4");
    }
    std::size_t min_len = docs[0].values.size();
    for (const auto& d : docs) min_len = std::min(min_len, d.values.size());
    require_docs_cover_grid(min_len, grid, "hurst_rs");

    std::vector<RescaledRangeStats> stats;
    stats.reserve(docs.size());
    for (const auto& d : docs) stats.push_back(rs_doc_stats(d, grid, adjust));
    return rs_from_stats(stats, identity_indices(docs.size()), grid);
}

EstimateResult joseph_exponent(std::span<const IntegralProcess> docs, const EvalGrid& grid) {
    if (docs.empty()) {
        throw InvalidInputError("joseph_exponent: no documents");
    }
    std::size_t min_len = docs[0].values.size();
    for (const auto& d : docs) min_len = std::min(min_len, d.values.size());
    require_docs_cover_grid(min_len, grid, "joseph_exponent");

    std::vector<IncrementMomentStats> stats;
    stats.reserve(docs.size());
    for (const auto& d : docs) stats.push_back(increment_moment_stats(d, grid));
    return joseph_from_stats(stats, identity_indices(docs.size()), grid);
}

EstimateResult hurst_variance(std::span<const IntegralProcess> docs, const EvalGrid& grid) {
    if (docs.empty()) {
        throw InvalidInputError("hurst_variance: no documents");
    }
    std::size_t min_len = docs[0].values.size();
    for (const auto& d : docs) min_len = std::min(min_len, d.values.size());
    require_docs_cover_grid(min_len, grid, "hurst_variance");

    std::vector<IncrementMomentStats> stats;
    stats.reserve(docs.size());
    for (const auto& d : docs) stats.push_back(increment_moment_stats(d, grid));
    return variance_growth_from_stats(stats, identity_indices(docs.size()), grid);
}

FractalEstimate fractal_dimension(const FractalEstimate& s_estimate) {
    if (s_estimate.parameter != FractalParameter::S) {
        throw InvalidInputError("fractal_dimension: input must be a self-similarity estimate");
    }
    FractalEstimate d;
    d.parameter = FractalParameter::D;
    d.value = 2.0 - s_estimate.value;
    d.margin = s_estimate.margin;
    d.n_documents = s_estimate.n_documents;
    return d;
}

CorrelogramResult autocovariance(const IncrementProcess& x, std::size_t max_lag) {
    const std::size_t n = x.values.size();
    if (n == 0 || max_lag >= n) {
        throw InvalidInputError("autocovariance: max_lag must be < series length");
    }
    CorrelogramResult result;
    result.lags.resize(max_lag + 1);
    result.autocov.resize(max_lag + 1);
    for (std::size_t k = 0; k <= max_lag; ++k) {
        result.lags[k] = k;
        double acc = 0.0;
        for (std::size_t t = 0; t + k < n; ++t) {
            acc += x.values[t + k] * x.values[t];
        }
        result.autocov[k] = acc / static_cast<double>(n);
    }
    return result;
}

namespace {

// Durbin-Levinson on an autocovariance sequence rho[0..L].
std::vector<double> durbin_levinson(const std::vector<double>& rho) {
    const std::size_t max_lag = rho.size() - 1;
    std::vector<double> pacf(max_lag + 1, 0.0);
    pacf[0] = 1.0;
    if (max_lag == 0) return pacf;
    if (rho[0] <= 0.0) {
        throw NumericalDegeneracyError("pacf: non-positive variance at lag 0");
    }

    std::vector<double> phi(max_lag + 1, 0.0), prev(max_lag + 1, 0.0);
    double v = rho[0];
    for (std::size_t k = 1; k <= max_lag; ++k) {
        double num = rho[k];
        for (std::size_t j = 1; j < k; ++j) num -= prev[j] * rho[k - j];
        if (v <= 0.0) {
            throw NumericalDegeneracyError("pacf: prediction variance collapsed at lag " +
                                           std::to_string(k));
        }
        const double a = num / v;
        if (std::abs(a) > 1.0 + 1e-9) {
            throw NumericalDegeneracyError("pacf: coefficient " + std::to_string(a) +
                                           " outside [-1, 1] at lag " + std::to_string(k));
        }
        phi[k] = a;
        for (std::size_t j = 1; j < k; ++j) phi[j] = prev[j] - a * prev[k - j];
        v *= (1.0 - a * a);
        pacf[k] = a;
        prev = phi;
    }
    return pacf;
}

}  // namespace

CorrelogramResult pacf(const IncrementProcess& x, std::size_t max_lag) {
    const std::size_t n = x.values.size();
    if (n == 0 || max_lag >= n / 2) {
        throw InvalidInputError("pacf: max_lag must be < length/2");
    }
    CorrelogramResult result = autocovariance(x, max_lag);
    result.pacf = durbin_levinson(result.autocov);
    return result;
}

CorrelogramResult pooled_pacf(std::span<const IncrementProcess> docs, std::size_t max_lag) {
    if (docs.empty()) {
        throw InvalidInputError("pooled_pacf: no documents");
    }
    CorrelogramResult pooled;
    pooled.lags.resize(max_lag + 1);
    for (std::size_t k = 0; k <= max_lag; ++k) pooled.lags[k] = k;
    pooled.autocov.assign(max_lag + 1, 0.0);

    for (const auto& doc : docs) {
        const CorrelogramResult one = autocovariance(doc, max_lag);
        for (std::size_t k = 0; k <= max_lag; ++k) pooled.autocov[k] += one.autocov[k];
    }
    for (auto& v : pooled.autocov) v /= static_cast<double>(docs.size());
    pooled.pacf = durbin_levinson(pooled.autocov);
    return pooled;
}

}  // namespace fractal
