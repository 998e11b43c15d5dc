#include "fractal/synth.hpp"

#include <cmath>
#include <complex>
#include <string>

#include "fractal/error.hpp"
#include "fractal/fft.hpp"
#include "fractal/rng.hpp"

namespace fractal {

namespace {
// Streams for distinct generator kinds must not collide when the same seed
// is reused across kinds in one run.
constexpr std::uint64_t kFgnStreamSalt = 0x6667'6e00ull;
constexpr std::uint64_t kWhiteStreamSalt = 0x7768'7400ull;
constexpr std::uint64_t kAr1StreamSalt = 0x6172'3100ull;
}  // namespace

void validate_spec(const SynthSpec& spec) {
    if (spec.length < 2) {
        throw InvalidInputError("synth: length must be >= 2, got " + std::to_string(spec.length));
    }
    if (spec.kind == SynthKind::fgn && !(spec.hurst > 0.0 && spec.hurst < 1.0)) {
        throw InvalidInputError("synth: hurst must lie in (0, 1), got " +
                                std::to_string(spec.hurst));
    }
    if (spec.kind == SynthKind::ar1 && !(spec.phi > -1.0 && spec.phi < 1.0)) {
        throw InvalidInputError("synth: phi must lie in (-1, 1), got " + std::to_string(spec.phi));
    }
}

double fgn_autocovariance(double hurst, std::size_t lag) {
    if (!(hurst > 0.0 && hurst < 1.0)) {
        throw InvalidInputError("fgn_autocovariance: hurst must lie in (0, 1), got " +
                                std::to_string(hurst));
    }
    if (lag == 0) return 1.0;
    const double k = static_cast<double>(lag);
    const double two_h = 2.0 * hurst;
    return 0.5 * (std::pow(k + 1.0, two_h) - 2.0 * std::pow(k, two_h) +
                  std::pow(k - 1.0, two_h));
}

FgnSampler::FgnSampler(double hurst, std::size_t length) : hurst_(hurst), length_(length) {
    if (!(hurst > 0.0 && hurst < 1.0)) {
        throw InvalidInputError("FgnSampler: hurst must lie in (0, 1)");
    }
    if (length < 2 || length > (std::size_t{1} << 24)) {
        throw InvalidInputError("FgnSampler: length must be in [2, 2^24]");
    }

    embedding_size_ = next_power_of_two(2 * length);
    const std::size_t m = embedding_size_;

    // First row of the symmetric circulant: acvf out to m/2 and mirrored back.
    std::vector<std::complex<double>> row(m);
    for (std::size_t k = 0; k <= m / 2; ++k) {
        row[k] = fgn_autocovariance(hurst, k);
    }
    for (std::size_t k = m / 2 + 1; k < m; ++k) {
        row[k] = row[m - k];
    }

    fft_radix2(row);

    sqrt_eigenvalues_.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
        const double lambda = row[k].real();
        if (lambda < -1e-8) {
            throw EmbeddingFailureError("FgnSampler: circulant eigenvalue " +
                                        std::to_string(lambda) + " at index " +
                                        std::to_string(k));
        }
        if (lambda < 0.0) ++clamped_;
        sqrt_eigenvalues_[k] = std::sqrt(std::max(lambda, 0.0));
    }
}

std::vector<double> FgnSampler::sample(std::uint64_t seed, std::uint64_t path_index) const {
    const std::size_t m = embedding_size_;
    Philox rng(seed, kFgnStreamSalt ^ (path_index * 0x9E3779B97F4A7C15ull));

    // Hermitian-coupled complex Gaussians: the spectral coefficients of a
    // real stationary sample.
    std::vector<std::complex<double>> coeff(m);
    coeff[0] = sqrt_eigenvalues_[0] * rng.next_gaussian();
    coeff[m / 2] = sqrt_eigenvalues_[m / 2] * rng.next_gaussian();
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (std::size_t k = 1; k < m / 2; ++k) {
        const double re = rng.next_gaussian() * inv_sqrt2;
        const double im = rng.next_gaussian() * inv_sqrt2;
        coeff[k] = sqrt_eigenvalues_[k] * std::complex<double>(re, im);
        coeff[m - k] = std::conj(coeff[k]);
    }

    fft_radix2(coeff);

    const double scale = 1.0 / std::sqrt(static_cast<double>(m));
    std::vector<double> out(length_);
    for (std::size_t t = 0; t < length_; ++t) {
        out[t] = coeff[t].real() * scale;
    }
    return out;
}

std::vector<double> white_noise(std::size_t length, std::uint64_t seed,
                                std::uint64_t path_index) {
    if (length < 2) {
        throw InvalidInputError("white_noise: length must be >= 2");
    }
    Philox rng(seed, kWhiteStreamSalt ^ (path_index * 0x9E3779B97F4A7C15ull));
    std::vector<double> out(length);
    for (auto& v : out) v = rng.next_gaussian();
    return out;
}

std::vector<double> ar1(double phi, std::size_t length, std::uint64_t seed,
                        std::uint64_t path_index) {
    if (!(phi > -1.0 && phi < 1.0)) {
        throw InvalidInputError("ar1: phi must lie in (-1, 1), got " + std::to_string(phi));
    }
    if (length < 2) {
        throw InvalidInputError("ar1: length must be >= 2");
    }
    Philox rng(seed, kAr1StreamSalt ^ (path_index * 0x9E3779B97F4A7C15ull));
    std::vector<double> out(length);
    out[0] = rng.next_gaussian() / std::sqrt(1.0 - phi * phi);
    for (std::size_t t = 1; t < length; ++t) {
        out[t] = phi * out[t - 1] + rng.next_gaussian();
    }
    return out;
}

std::vector<double> generate(const SynthSpec& spec, std::uint64_t path_index) {
    validate_spec(spec);
    switch (spec.kind) {
        case SynthKind::fgn: {
            FgnSampler sampler(spec.hurst, spec.length);
            return sampler.sample(spec.seed, path_index);
        }
        case SynthKind::white_noise:
            return white_noise(spec.length, spec.seed, path_index);
        case SynthKind::ar1:
            return ar1(spec.phi, spec.length, spec.seed, path_index);
    }
    throw InvalidInputError("generate: unknown synth kind");
}

}  // namespace fractal
