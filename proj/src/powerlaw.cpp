#include "fractal/powerlaw.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "fractal/error.hpp"

namespace fractal {

EvalGrid make_grid(std::size_t min_x, std::size_t max_x, std::size_t points_per_decade) {
    if (min_x < 1 || min_x >= max_x) {
        throw InvalidInputError("make_grid: need 1 <= min_x < max_x, got [" +
                                std::to_string(min_x) + ", " + std::to_string(max_x) + "]");
    }
    if (points_per_decade < 1) {
        throw InvalidInputError("make_grid: points_per_decade must be >= 1");
    }

    const double decades = std::log10(static_cast<double>(max_x) / static_cast<double>(min_x));
    const std::size_t n_points =
        std::max<std::size_t>(2, static_cast<std::size_t>(std::llround(
                                     static_cast<double>(points_per_decade) * decades)) +
                                     1);

    std::set<std::size_t> unique;
    const double log_min = std::log(static_cast<double>(min_x));
    const double log_max = std::log(static_cast<double>(max_x));
    for (std::size_t i = 0; i < n_points; ++i) {
        const double frac = static_cast<double>(i) / static_cast<double>(n_points - 1);
        const double value = std::exp(log_min + frac * (log_max - log_min));
        unique.insert(static_cast<std::size_t>(std::llround(value)));
    }
    unique.insert(min_x);
    unique.insert(max_x);

    EvalGrid grid;
    grid.points.assign(unique.begin(), unique.end());
    return grid;
}

PowerLawFit fit_power_law(std::span<const PointXY> points) {
    std::set<double> distinct_x;
    for (const auto& p : points) {
        if (!(p.x > 0.0) || !(p.y > 0.0) || !std::isfinite(p.x) || !std::isfinite(p.y)) {
            throw InvalidInputError("fit_power_law: coordinates must be positive and finite");
        }
        distinct_x.insert(p.x);
    }
    if (distinct_x.size() < 3) {
        throw InsufficientDataError("fit_power_law: need >= 3 points with distinct x, got " +
                                    std::to_string(distinct_x.size()));
    }

    const double n = static_cast<double>(points.size());
    double sum_lx = 0.0, sum_ly = 0.0;
    for (const auto& p : points) {
        sum_lx += std::log(p.x);
        sum_ly += std::log(p.y);
    }
    const double mean_lx = sum_lx / n;
    const double mean_ly = sum_ly / n;

    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& p : points) {
        const double dx = std::log(p.x) - mean_lx;
        const double dy = std::log(p.y) - mean_ly;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx <= 0.0) {
        throw DegenerateFitError("fit_power_law: zero variance in ln x");
    }

    PowerLawFit fit;
    fit.exponent = sxy / sxx;
    fit.log_intercept = mean_ly - fit.exponent * mean_lx;
    fit.n_points = points.size();

    const auto [min_it, max_it] =
        std::minmax_element(points.begin(), points.end(),
                            [](const PointXY& a, const PointXY& b) { return a.x < b.x; });
    fit.window_min = min_it->x;
    fit.window_max = max_it->x;

    // Constant y has zero total variance; the flat line is an exact fit.
    if (syy <= 0.0) {
        fit.r_squared = 1.0;
    } else {
        const double ss_res = syy - fit.exponent * sxy;
        fit.r_squared = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
    }
    return fit;
}

}  // namespace fractal
