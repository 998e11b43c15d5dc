#include "fractal/battery.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>

#include "fractal/error.hpp"
#include "fractal/estimators.hpp"
#include "fractal/parallel.hpp"
#include "fractal/powerlaw.hpp"
#include "fractal/series.hpp"
#include "fractal/synth.hpp"

namespace fractal {

namespace {

// Synthetic paths are population-normalized by construction (zero mean,
// unit variance), so they are consumed as increment processes directly.
// Re-centering each finite path would perturb the large-scale statistics
// the battery is checking, most visibly at high persistence.
std::vector<IncrementProcess> generate_fgn_paths(double hurst, std::size_t length,
                                                 std::size_t count, std::uint64_t seed,
                                                 std::size_t workers) {
    const FgnSampler sampler(hurst, length);
    std::vector<IncrementProcess> paths(count);
    parallel_for(count, workers, [&](std::size_t i) {
        paths[i].values = sampler.sample(seed, i);
    });
    return paths;
}

std::vector<IntegralProcess> integrate_all(const std::vector<IncrementProcess>& paths,
                                           std::size_t workers) {
    std::vector<IntegralProcess> out(paths.size());
    parallel_for(paths.size(), workers, [&](std::size_t i) { out[i] = integrate(paths[i]); });
    return out;
}

BatteryRow make_row(std::string name, double truth, double estimate, double tolerance) {
    BatteryRow row;
    row.name = std::move(name);
    row.truth = truth;
    row.estimate = estimate;
    row.tolerance = tolerance;
    row.pass = std::abs(estimate - truth) <= tolerance;
    return row;
}

std::string format_h(double h) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%.2f", h);
    return buf;
}

}  // namespace

std::vector<BatteryRow> run_oracle_battery(const BatteryOptions& opt) {
    if (opt.fgn_length < 4096 || opt.noise_length < 2048) {
        throw InvalidInputError(
            "oracle battery: need fgn length >= 4096 and noise length >= 2048");
    }
    if (opt.fgn_paths < 2 || opt.noise_paths < 2) {
        throw InvalidInputError("oracle battery: need at least 2 paths per family");
    }

    std::vector<BatteryRow> rows;

    const EvalGrid tau_grid = make_grid(1, 512, 8);
    // Long paths support wider rescaled-range windows than the document
    // pipeline; starting at 64 keeps the small-block upward drift of the
    // statistic well inside the tolerance.
    const EvalGrid rs_grid_long =
        make_grid(64, std::min<std::size_t>(16384, opt.fgn_length / 4), 8);
    const EvalGrid rs_grid_noise =
        make_grid(64, std::min<std::size_t>(4096, opt.noise_length / 4), 8);

    const double epsilons[4] = {1e-3, 2e-3, 5e-3, 1e-2};
    constexpr std::size_t kReferenceEps = 2;  // 5e-3

    // fGn recovery across the persistence range.
    for (const double h : {0.5, 0.6, 0.7, 0.8, 0.9}) {
        const auto increments =
            generate_fgn_paths(h, opt.fgn_length, opt.fgn_paths, opt.seed, opt.workers);
        const auto integrals = integrate_all(increments, opt.workers);

        const double rs_tol = h >= 0.9 ? 0.07 : 0.05;
        const auto rs = hurst_rs(increments, rs_grid_long);
        rows.push_back(make_row("hurst_rs fgn H=" + format_h(h), h, rs.estimate.value, rs_tol));

        const auto joseph = joseph_exponent(integrals, tau_grid);
        rows.push_back(
            make_row("joseph fgn H=" + format_h(h), h, joseph.estimate.value, 0.03));

        const auto var_growth = hurst_variance(integrals, tau_grid);
        rows.push_back(make_row("hurst_variance fgn H=" + format_h(h), h,
                                var_growth.estimate.value, 0.03));
        rows.push_back(make_row("joseph/variance identity H=" + format_h(h), 0.0,
                                std::abs(joseph.estimate.value - var_growth.estimate.value),
                                1e-9));

        const auto sweep = self_similarity_sweep(integrals, epsilons, tau_grid);
        const double s_ref = sweep[kReferenceEps].estimate.value;
        rows.push_back(make_row("selfsim fgn H=" + format_h(h) + " eps=5e-3", h, s_ref, 0.08));
        double max_dev = 0.0;
        for (const auto& result : sweep) {
            max_dev = std::max(max_dev, std::abs(result.estimate.value - s_ref));
        }
        rows.push_back(make_row("selfsim eps stability H=" + format_h(h), 0.0, max_dev, 0.03));

        const auto d = fractal_dimension(sweep[kReferenceEps].estimate);
        rows.push_back(make_row("dimension identity H=" + format_h(h), 0.0,
                                std::abs(d.value - (2.0 - s_ref)), 0.0));
    }

    // Independent increments: both exponents must sit at 1/2.
    {
        std::vector<IncrementProcess> noise(opt.noise_paths);
        parallel_for(opt.noise_paths, opt.workers, [&](std::size_t i) {
            noise[i].values = white_noise(opt.noise_length, opt.seed, i);
        });
        const auto integrals = integrate_all(noise, opt.workers);
        rows.push_back(make_row("hurst_rs white noise", 0.5,
                                hurst_rs(noise, rs_grid_noise).estimate.value, 0.05));
        rows.push_back(make_row("joseph white noise", 0.5,
                                joseph_exponent(integrals, tau_grid).estimate.value, 0.05));
    }

    // Sampler exactness: sample autocovariance against the closed form.
    for (const double h : {0.6, 0.7, 0.8}) {
        const std::size_t n = std::max<std::size_t>(opt.fgn_length * 4, 1 << 12);
        const FgnSampler sampler(h, n);
        IncrementProcess path;
        path.values = sampler.sample(opt.seed + 1, 0);
        const auto corr = autocovariance(path, 10);
        double max_dev = 0.0;
        for (std::size_t k = 1; k <= 10; ++k) {
            max_dev = std::max(max_dev, std::abs(corr.autocov[k] - fgn_autocovariance(h, k)));
        }
        rows.push_back(make_row("fgn sampler acvf lags1-10 H=" + format_h(h), 0.0, max_dev, 0.02));
    }
    rows.push_back(make_row("fgn rho(1) closed form H=0.70", 0.3195079107728942,
                            fgn_autocovariance(0.7, 1), 1e-12));

    // Noiseless power-law recovery.
    {
        const EvalGrid grid = make_grid(1, 1000, 8);
        for (const double c : {-1.5, -0.59, 0.0, 0.49, 0.7, 1.0}) {
            std::vector<PointXY> pts;
            pts.reserve(grid.points.size());
            for (const std::size_t x : grid.points) {
                pts.push_back({static_cast<double>(x),
                               2.5 * std::pow(static_cast<double>(x), c)});
            }
            const auto fit = fit_power_law(pts);
            char name[64];
            std::snprintf(name, sizeof(name), "power-law recovery c=%+.2f", c);
            rows.push_back(make_row(name, c, fit.exponent, 1e-10));
        }
    }

    // AR(1) partial autocorrelations: spike at lag 1, nothing after.
    {
        IncrementProcess series;
        series.values = ar1(0.6, 100000, opt.seed + 2);
        const auto norm = normalize(series.values);
        const auto corr = pacf(norm, 5);
        rows.push_back(make_row("pacf ar1 phi=0.6 lag 1", 0.6, corr.pacf[1], 0.03));
        double max_tail = 0.0;
        for (std::size_t k = 2; k <= 5; ++k) {
            max_tail = std::max(max_tail, std::abs(corr.pacf[k]));
        }
        rows.push_back(make_row("pacf ar1 phi=0.6 lags 2-5", 0.0, max_tail, 0.02));
    }

    if (opt.inject_failure) {
        rows.push_back(make_row("injected failure (test hook)", 0.0, 1.0, 0.0));
    }
    return rows;
}

bool all_pass(const std::vector<BatteryRow>& rows) {
    for (const auto& row : rows) {
        if (!row.pass) return false;
    }
    return true;
}

std::string format_battery(const std::vector<BatteryRow>& rows) {
    std::string out;
    out += "check                                     truth    estimate   tol       verdict\n";
    out += "-----------------------------------------------------------------------------\n";
    char line[160];
    for (const auto& row : rows) {
        std::snprintf(line, sizeof(line), "%-40s %9.4f %10.4f  %-9.2e %s\n", row.name.c_str(),
                      row.truth, row.estimate, row.tolerance, row.pass ? "pass" : "FAIL");
        out += line;
    }
    return out;
}

}  // namespace fractal
