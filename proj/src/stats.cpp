#include "fractal/stats.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fractal/error.hpp"
#include "fractal/parallel.hpp"
#include "fractal/rng.hpp"

namespace fractal {

BootstrapResult bootstrap_ci(std::size_t n_items,
                             const std::function<double(std::span<const std::size_t>)>& estimator,
                             const BootstrapOptions& options) {
    if (n_items < 10) {
        throw InvalidInputError("bootstrap_ci: need >= 10 items, got " + std::to_string(n_items));
    }
    if (options.resamples < 100) {
        throw InvalidInputError("bootstrap_ci: need >= 100 resamples, got " +
                                std::to_string(options.resamples));
    }

    std::vector<std::size_t> identity(n_items);
    for (std::size_t i = 0; i < n_items; ++i) identity[i] = i;
    const double point = estimator(identity);

    const std::size_t B = options.resamples;
    std::vector<double> replicates(B, 0.0);
    std::vector<unsigned char> ok(B, 0);

    parallel_for(B, options.workers, [&](std::size_t r) {
        Philox rng(options.seed, options.stream + r);
        std::vector<std::size_t> idx(n_items);
        for (std::size_t i = 0; i < n_items; ++i) {
            // Rejection-free modulo map; the bias at n_items << 2^64 is nil.
            idx[i] = static_cast<std::size_t>(rng.next_u64() % n_items);
        }
        try {
            replicates[r] = estimator(idx);
            ok[r] = 1;
        } catch (const std::exception&) {
            ok[r] = 0;
        }
    });

    std::vector<double> kept;
    kept.reserve(B);
    for (std::size_t r = 0; r < B; ++r) {
        if (ok[r]) kept.push_back(replicates[r]);
    }
    const std::size_t failures = B - kept.size();
    if (failures * 10 > B) {
        throw BootstrapInstabilityError("bootstrap_ci: estimator failed on " +
                                            std::to_string(failures) + " of " +
                                            std::to_string(B) + " resamples",
                                        failures);
    }

    double mean = 0.0;
    for (const double v : kept) mean += v;
    mean /= static_cast<double>(kept.size());
    double ss = 0.0;
    for (const double v : kept) ss += (v - mean) * (v - mean);
    const double margin =
        kept.size() > 1 ? std::sqrt(ss / static_cast<double>(kept.size() - 1)) : 0.0;

    BootstrapResult result;
    result.point_estimate = point;
    result.margin = margin;
    result.n_resamples = B;
    result.seed = options.seed;
    result.failed_replicates = failures;

    if (options.percentile && !kept.empty()) {
        std::sort(kept.begin(), kept.end());
        const double alpha = (1.0 - options.percentile_level) / 2.0;
        auto at = [&](double q) {
            const double pos = q * static_cast<double>(kept.size() - 1);
            const std::size_t lo = static_cast<std::size_t>(pos);
            const std::size_t hi = std::min(lo + 1, kept.size() - 1);
            const double frac = pos - static_cast<double>(lo);
            return kept[lo] * (1.0 - frac) + kept[hi] * frac;
        };
        result.percentile_interval = {at(alpha), at(1.0 - alpha)};
    }
    return result;
}

double median_across_domains(std::span<const double> values) {
    if (values.empty()) {
        throw InvalidInputError("median_across_domains: empty input");
    }
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    if (n % 2 == 1) return sorted[n / 2];
    return 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

double pearson(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw InvalidInputError("pearson: length mismatch");
    }
    const std::size_t n = a.size();
    if (n < 3) {
        throw InvalidInputError("pearson: need >= 3 samples");
    }
    double mean_a = 0.0, mean_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_a += a[i];
        mean_b += b[i];
    }
    mean_a /= static_cast<double>(n);
    mean_b /= static_cast<double>(n);

    double saa = 0.0, sbb = 0.0, sab = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double da = a[i] - mean_a;
        const double db = b[i] - mean_b;
        saa += da * da;
        sbb += db * db;
        sab += da * db;
    }
    if (saa <= 0.0 || sbb <= 0.0) {
        throw DegenerateSeriesError("pearson: constant input");
    }
    return sab / std::sqrt(saa * sbb);
}

RegressionResult adjusted_r2(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) {
        throw InvalidInputError("adjusted_r2: length mismatch");
    }
    const std::size_t n = x.size();
    if (n < 4) {
        throw InvalidInputError("adjusted_r2: need >= 4 samples, got " + std::to_string(n));
    }

    double mean_x = 0.0, mean_y = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_x += x[i];
        mean_y += y[i];
    }
    mean_x /= static_cast<double>(n);
    mean_y /= static_cast<double>(n);

    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mean_x;
        const double dy = y[i] - mean_y;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx <= 0.0) {
        throw DegenerateFitError("adjusted_r2: constant predictor");
    }

    RegressionResult result;
    result.n = n;
    result.p = 1;
    result.slope = sxy / sxx;
    result.intercept = mean_y - result.slope * mean_x;
    if (syy <= 0.0) {
        result.r_squared = 1.0;
    } else {
        result.r_squared = 1.0 - (syy - result.slope * sxy) / syy;
    }
    const double dof = static_cast<double>(n - 1) / static_cast<double>(n - 2);
    result.adjusted_r_squared = 1.0 - (1.0 - result.r_squared) * dof;
    return result;
}

double hb_metric(double bpb, double h) {
    if (!(bpb > 0.0)) {
        throw InvalidInputError("hb_metric: bits-per-byte must be > 0, got " +
                                std::to_string(bpb));
    }
    return 1.0 / bpb + h;
}

}  // namespace fractal
