#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "fractal/error.hpp"
#include "fractal/powerlaw.hpp"
#include "fractal/rng.hpp"

using namespace fractal;

TEST_CASE("make_grid places one point per decade") {
    const auto grid = make_grid(1, 100, 1);
    CHECK(grid.points == std::vector<std::size_t>{1, 10, 100});
}

TEST_CASE("make_grid always keeps both endpoints, strictly increasing") {
    const auto grid = make_grid(1, 8, 10);
    CHECK(grid.points.front() == 1);
    CHECK(grid.points.back() == 8);
    CHECK(std::is_sorted(grid.points.begin(), grid.points.end()));
    CHECK(std::adjacent_find(grid.points.begin(), grid.points.end()) == grid.points.end());
}

TEST_CASE("make_grid spaces points log-uniformly") {
    // Independent enumeration: 8 points/decade over three decades plus a
    // binary factor gives 25 nominal points at ratio 1024^(1/24).
    const auto grid = make_grid(2, 2048, 8);
    CHECK(grid.points.size() == 25);
    const double ratio = std::pow(1024.0, 1.0 / 24.0);
    for (std::size_t i = 0; i < grid.points.size(); ++i) {
        const double expected = 2.0 * std::pow(ratio, static_cast<double>(i));
        CHECK(std::abs(static_cast<double>(grid.points[i]) - expected) <= 0.5);
    }
    CHECK(std::abs(ratio - std::pow(10.0, 1.0 / 8.0)) < 2e-3);
}

TEST_CASE("make_grid rejects bad windows") {
    CHECK_THROWS_AS(make_grid(10, 10, 4), InvalidInputError);
    CHECK_THROWS_AS(make_grid(10, 2, 4), InvalidInputError);
    CHECK_THROWS_AS(make_grid(0, 10, 4), InvalidInputError);
    CHECK_THROWS_AS(make_grid(1, 10, 0), InvalidInputError);
}

TEST_CASE("fit_power_law recovers a clean law") {
    std::vector<PointXY> pts;
    for (const double x : {1.0, 2.0, 4.0}) {
        pts.push_back({x, 3.0 * std::pow(x, 0.7)});
    }
    const auto fit = fit_power_law(pts);
    CHECK(std::abs(fit.exponent - 0.7) < 1e-10);
    CHECK(std::abs(fit.r_squared - 1.0) < 1e-12);
    CHECK(std::abs(fit.log_intercept - std::log(3.0)) < 1e-10);
    CHECK(fit.n_points == 3);
    CHECK(fit.window_min == 1.0);
    CHECK(fit.window_max == 4.0);
}

TEST_CASE("fit_power_law on constant y gives exponent zero") {
    const std::vector<PointXY> pts{{1.0, 5.0}, {2.0, 5.0}, {4.0, 5.0}};
    const auto fit = fit_power_law(pts);
    CHECK(std::abs(fit.exponent) < 1e-12);
    CHECK(fit.r_squared == 1.0);
}

TEST_CASE("fit_power_law on the identity law") {
    const std::vector<PointXY> pts{{1.0, 1.0}, {2.0, 2.0}, {4.0, 4.0}};
    const auto fit = fit_power_law(pts);
    CHECK(std::abs(fit.exponent - 1.0) < 1e-12);
    CHECK(std::abs(fit.log_intercept) < 1e-12);
}

TEST_CASE("fit_power_law exact recovery across exponents and scales") {
    Philox rng(2024, 1);
    const auto grid = make_grid(1, 4096, 6);
    for (int trial = 0; trial < 40; ++trial) {
        const double c = -2.0 + 4.0 * rng.next_unit();
        const double a = 0.1 + 10.0 * rng.next_unit();
        std::vector<PointXY> pts;
        for (const std::size_t x : grid.points) {
            pts.push_back({static_cast<double>(x), a * std::pow(static_cast<double>(x), c)});
        }
        const auto fit = fit_power_law(pts);
        CHECK(std::abs(fit.exponent - c) < 1e-10);
    }
}

TEST_CASE("fit_power_law scale equivariance and order invariance") {
    std::vector<PointXY> pts;
    Philox rng(99, 2);
    for (const double x : {1.0, 3.0, 9.0, 27.0, 81.0}) {
        pts.push_back({x, std::pow(x, 0.42) * (1.0 + 0.2 * rng.next_unit())});
    }
    const auto base = fit_power_law(pts);

    std::vector<PointXY> scaled = pts;
    const double k = 7.25;
    for (auto& p : scaled) p.y *= k;
    const auto fit_scaled = fit_power_law(scaled);
    CHECK(std::abs(fit_scaled.exponent - base.exponent) < 1e-12);
    CHECK(std::abs(fit_scaled.log_intercept - base.log_intercept - std::log(k)) < 1e-12);

    std::vector<PointXY> shuffled = pts;
    std::reverse(shuffled.begin(), shuffled.end());
    std::swap(shuffled[0], shuffled[2]);
    const auto fit_shuffled = fit_power_law(shuffled);
    CHECK(std::abs(fit_shuffled.exponent - base.exponent) < 1e-12);
    CHECK(std::abs(fit_shuffled.r_squared - base.r_squared) < 1e-12);
}

TEST_CASE("fit_power_law input validation") {
    CHECK_THROWS_AS(fit_power_law(std::vector<PointXY>{{1, 1}, {2, -1}, {3, 1}}),
                    InvalidInputError);
    CHECK_THROWS_AS(fit_power_law(std::vector<PointXY>{{0, 1}, {2, 1}, {3, 1}}),
                    InvalidInputError);
    CHECK_THROWS_AS(fit_power_law(std::vector<PointXY>{{1, 1}, {2, 2}}), InsufficientDataError);
    CHECK_THROWS_AS(fit_power_law(std::vector<PointXY>{{1, 1}, {1, 2}, {1, 3}}),
                    InsufficientDataError);
}
