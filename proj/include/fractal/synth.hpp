#pragma once

#include <cstdint>
#include <vector>

namespace fractal {

enum class SynthKind { fgn, white_noise, ar1 };

// Parameters for one family of synthetic paths. Each (seed, path index)
// pair maps to its own counter-based RNG stream, so paths can be generated
// in any order, on any number of workers, with identical output.
struct SynthSpec {
    SynthKind kind = SynthKind::white_noise;
    double hurst = 0.5;   // fgn only, in (0, 1)
    double phi = 0.0;     // ar1 only, in (-1, 1)
    std::size_t length = 0;
    std::uint64_t seed = 0;
};

void validate_spec(const SynthSpec& spec);

// Autocovariance of fractional Gaussian noise with unit variance:
// 0.5 * (|k+1|^2H - 2|k|^2H + |k-1|^2H).
double fgn_autocovariance(double hurst, std::size_t lag);

// Exact fGn sampler by circulant embedding. The embedding size is the first
// power of two >= 2 * length; eigenvalues are computed once per (hurst,
// length) and shared across paths.
class FgnSampler {
public:
    FgnSampler(double hurst, std::size_t length);

    std::vector<double> sample(std::uint64_t seed, std::uint64_t path_index) const;

    double hurst() const { return hurst_; }
    std::size_t length() const { return length_; }
    std::size_t embedding_size() const { return embedding_size_; }
    // Eigenvalues that were (negligibly) negative and clamped to zero.
    std::size_t clamped_eigenvalues() const { return clamped_; }

private:
    double hurst_ = 0.5;
    std::size_t length_ = 0;
    std::size_t embedding_size_ = 0;
    std::size_t clamped_ = 0;
    std::vector<double> sqrt_eigenvalues_;
};

// Independent standard Gaussian draws.
std::vector<double> white_noise(std::size_t length, std::uint64_t seed,
                                std::uint64_t path_index = 0);

// AR(1) with stationary initialization: x0 ~ N(0, 1/(1-phi^2)).
std::vector<double> ar1(double phi, std::size_t length, std::uint64_t seed,
                        std::uint64_t path_index = 0);

// Dispatch on spec.kind.
std::vector<double> generate(const SynthSpec& spec, std::uint64_t path_index = 0);

}  // namespace fractal
