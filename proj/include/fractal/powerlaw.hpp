#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fractal {

// Result of an ordinary least-squares fit of ln y = c ln x + b.
struct PowerLawFit {
    double exponent = 0.0;       // c
    double log_intercept = 0.0;  // b, natural log
    double r_squared = 0.0;
    std::size_t n_points = 0;
    double window_min = 0.0;     // x range actually used
    double window_max = 0.0;
};

// Strictly increasing positive integers, log-uniformly spaced.
struct EvalGrid {
    std::vector<std::size_t> points;
    std::size_t min() const { return points.front(); }
    std::size_t max() const { return points.back(); }
};

struct PointXY {
    double x = 0.0;
    double y = 0.0;
};

// Log-uniform integer grid between min_x and max_x inclusive. The nominal
// point count is round(points_per_decade * log10(max/min)) + 1; collisions
// after rounding are dropped and both endpoints always survive.
EvalGrid make_grid(std::size_t min_x, std::size_t max_x, std::size_t points_per_decade);

// OLS in log-log coordinates. Requires >= 3 distinct x values and strictly
// positive finite coordinates. r_squared is the coefficient of determination
// of the linear fit on (ln x, ln y); a constant y is reported as a perfect
// fit with exponent 0.
PowerLawFit fit_power_law(std::span<const PointXY> points);

}  // namespace fractal
