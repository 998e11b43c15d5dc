#include "fractal/series.hpp"

#include <cmath>
#include <numeric>

#include "fractal/error.hpp"

namespace fractal {

namespace {
constexpr double kLn2 = 0.6931471805599453094172321214581766;
}

std::vector<double> to_bits(std::span<const double> logprobs, LogBase base) {
    std::vector<double> bits;
    bits.reserve(logprobs.size());
    for (std::size_t i = 0; i < logprobs.size(); ++i) {
        const double lp = logprobs[i];
        if (!std::isfinite(lp) || lp > 0.0) {
            throw InvalidInputError("to_bits: log-probability at index " + std::to_string(i) +
                                    " must be finite and <= 0, got " + std::to_string(lp));
        }
        bits.push_back(base == LogBase::natural ? -lp / kLn2 : -lp);
    }
    return bits;
}

IncrementProcess normalize(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n < 2) {
        throw InvalidInputError("normalize: need at least 2 samples, got " + std::to_string(n));
    }
    double mean = 0.0;
    for (const double v : values) mean += v;
    mean /= static_cast<double>(n);

    double var = 0.0;
    for (const double v : values) {
        const double d = v - mean;
        var += d * d;
    }
    var /= static_cast<double>(n);
    if (var <= 0.0) {
        throw DegenerateSeriesError("normalize: sequence is constant (zero variance)");
    }

    const double inv_std = 1.0 / std::sqrt(var);
    IncrementProcess out;
    out.values.reserve(n);
    for (const double v : values) out.values.push_back((v - mean) * inv_std);
    return out;
}

IntegralProcess integrate(const IncrementProcess& x) {
    if (x.values.empty()) {
        throw InvalidInputError("integrate: empty increment process");
    }
    IntegralProcess out;
    out.values.resize(x.values.size());
    double running = 0.0;
    for (std::size_t t = 0; t < x.values.size(); ++t) {
        running += x.values[t];
        out.values[t] = running;
    }
    return out;
}

std::vector<double> tau_increments(const IntegralProcess& X, std::size_t tau) {
    const std::size_t n = X.values.size();
    if (tau == 0 || tau >= n) {
        throw InvalidWindowError("tau_increments: tau " + std::to_string(tau) +
                                 " does not fit in series of length " + std::to_string(n));
    }
    std::vector<double> out;
    out.reserve(n - tau);
    for (std::size_t t = 0; t + tau < n; ++t) {
        out.push_back(X.values[t + tau] - X.values[t]);
    }
    return out;
}

double bits_per_byte(const BitsSeries& z) {
    if (z.values.empty()) {
        throw InvalidInputError("bits_per_byte: empty series");
    }
    if (z.byte_counts.size() != z.values.size()) {
        throw InvalidInputError("bits_per_byte: values and byte_counts lengths differ");
    }
    double bits = 0.0;
    std::int64_t bytes = 0;
    for (std::size_t i = 0; i < z.values.size(); ++i) {
        if (z.byte_counts[i] < 1) {
            throw InvalidInputError("bits_per_byte: byte count at index " + std::to_string(i) +
                                    " must be >= 1");
        }
        bits += z.values[i];
        bytes += z.byte_counts[i];
    }
    return bits / static_cast<double>(bytes);
}

}  // namespace fractal
