#include <doctest.h>

#include <cmath>

#include "fractal/error.hpp"
#include "fractal/fft.hpp"
#include "fractal/rng.hpp"
#include "fractal/synth.hpp"
#include "testutil.hpp"

using namespace fractal;

namespace {

double sample_autocorr(const std::vector<double>& x, std::size_t lag) {
    const auto acv = testutil::autocov_bruteforce(x, lag);
    return acv[lag] / acv[0];
}

}  // namespace

TEST_CASE("fft round trip and known transform") {
    std::vector<std::complex<double>> data = {{1, 0}, {2, 0}, {3, 0}, {4, 0}};
    auto copy = data;
    fft_radix2(copy);
    CHECK(copy[0].real() == doctest::Approx(10.0));  // DC term
    fft_radix2(copy, true);
    for (std::size_t i = 0; i < data.size(); ++i) {
        CHECK(copy[i].real() == doctest::Approx(data[i].real()).epsilon(1e-12));
        CHECK(std::abs(copy[i].imag()) < 1e-12);
    }
    CHECK(next_power_of_two(5) == 8);
    CHECK(next_power_of_two(8) == 8);
    CHECK(is_power_of_two(64));
    CHECK_FALSE(is_power_of_two(96));
}

TEST_CASE("philox matches the published known-answer vector") {
    // counter {0,0,0,0}, key {0,0}
    Philox rng(0, 0);
    CHECK(rng.next_u32() == 0x6627e8d5u);
    CHECK(rng.next_u32() == 0xe169c58du);
    CHECK(rng.next_u32() == 0xbc57ac4cu);
    CHECK(rng.next_u32() == 0x9b00dbd8u);

    // Streams are independent: same seed, different stream, different block.
    Philox other(0, 1);
    CHECK(other.next_u32() != 0x6627e8d5u);

    // Uniform draws stay inside their contracts.
    Philox u(123, 7);
    for (int i = 0; i < 1000; ++i) {
        const double open = u.next_unit_open();
        CHECK(open > 0.0);
        CHECK(open <= 1.0);
        const double half = u.next_unit();
        CHECK(half >= 0.0);
        CHECK(half < 1.0);
    }
}

TEST_CASE("fgn_autocovariance closed form") {
    CHECK(fgn_autocovariance(0.3, 0) == 1.0);
    CHECK(fgn_autocovariance(0.5, 1) == doctest::Approx(0.0).scale(1).epsilon(1e-15));
    CHECK(fgn_autocovariance(0.5, 7) == doctest::Approx(0.0).scale(1).epsilon(1e-12));
    CHECK(fgn_autocovariance(0.7, 1) == doctest::Approx(0.3195079107728942).epsilon(1e-12));
    CHECK_THROWS_AS(fgn_autocovariance(0.0, 1), InvalidInputError);
    CHECK_THROWS_AS(fgn_autocovariance(1.0, 1), InvalidInputError);
}

TEST_CASE("fgn sampler is deterministic per (seed, path)") {
    const FgnSampler sampler(0.7, 1024);
    CHECK(sampler.embedding_size() == 2048);
    CHECK(sampler.clamped_eigenvalues() == 0);
    const auto a = sampler.sample(9, 0);
    const auto b = sampler.sample(9, 0);
    CHECK(a == b);
    const auto c = sampler.sample(9, 1);
    CHECK(a != c);
    const auto d = sampler.sample(10, 0);
    CHECK(a != d);
}

TEST_CASE("fgn at H=0.5 has uncorrelated increments") {
    const FgnSampler sampler(0.5, std::size_t{1} << 16);
    const auto x = sampler.sample(7, 0);
    CHECK(std::abs(sample_autocorr(x, 1)) < 0.01);
}

TEST_CASE("fgn matches the closed-form autocovariance") {
    const FgnSampler sampler(0.7, std::size_t{1} << 18);
    const auto x = sampler.sample(1, 0);
    const auto acv = testutil::autocov_bruteforce(x, 1);
    CHECK(acv[1] == doctest::Approx(0.3195079107728942).epsilon(0.04));
    CHECK(std::abs(acv[1] - 0.3195) < 0.01);
    CHECK(acv[0] == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("white noise moments and seeding") {
    const auto x = white_noise(100000, 3);
    double mean = 0.0;
    for (const double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    double var = 0.0;
    for (const double v : x) var += (v - mean) * (v - mean);
    var /= static_cast<double>(x.size());
    CHECK(std::abs(mean) < 0.02);
    CHECK(var == doctest::Approx(1.0).epsilon(0.02));

    const auto y = white_noise(100000, 4);
    CHECK(x != y);
}

TEST_CASE("ar1 has the right lag-1 correlation and stationary start") {
    const auto x = ar1(0.6, 100000, 5);
    CHECK(sample_autocorr(x, 1) == doctest::Approx(0.6).epsilon(0.035));

    // phi = 0 degenerates to uncorrelated noise
    const auto z = ar1(0.0, 100000, 6);
    CHECK(std::abs(sample_autocorr(z, 1)) < 0.02);

    CHECK_THROWS_AS(ar1(1.2, 100, 1), InvalidInputError);
    CHECK_THROWS_AS(ar1(-1.0, 100, 1), InvalidInputError);
}

TEST_CASE("spec validation") {
    SynthSpec spec;
    spec.kind = SynthKind::fgn;
    spec.hurst = 0.7;
    spec.length = 1;
    CHECK_THROWS_AS(validate_spec(spec), InvalidInputError);
    spec.length = 64;
    CHECK_NOTHROW(validate_spec(spec));
    spec.hurst = 1.0;
    CHECK_THROWS_AS(validate_spec(spec), InvalidInputError);

    spec.kind = SynthKind::ar1;
    spec.phi = 1.2;
    CHECK_THROWS_AS(validate_spec(spec), InvalidInputError);
}

TEST_CASE("generate dispatch is deterministic") {
    SynthSpec spec;
    spec.kind = SynthKind::white_noise;
    spec.length = 128;
    spec.seed = 11;
    CHECK(generate(spec, 3) == generate(spec, 3));
    CHECK(generate(spec, 3) != generate(spec, 4));
}
