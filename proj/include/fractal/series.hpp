#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace fractal {

enum class LogBase { natural, base2 };

// Per-token information content of one document, in base-2 units, together
// with the byte length of each token. This is the raw trace every estimator
// starts from.
struct BitsSeries {
    std::vector<double> values;            // bits per token, all >= 0
    std::vector<std::int64_t> byte_counts; // same length, all >= 1
    std::string doc_id;
};

// Zero-mean, unit-variance view of a bit sequence. Instances produced by
// normalize() satisfy the sample moments exactly; synthetic generators
// produce values normalized in population instead, which downstream
// estimators treat identically.
struct IncrementProcess {
    std::vector<double> values;
    std::size_t length() const { return values.size(); }
};

// Running sums of an increment process: the random-walk view of a document.
struct IntegralProcess {
    std::vector<double> values;
    std::size_t length() const { return values.size(); }
};

// Converts log-probabilities (all <= 0, finite) to bits. Natural-log inputs
// are divided by ln 2 so stored bits are always base-2.
std::vector<double> to_bits(std::span<const double> logprobs, LogBase base);

// Centers and scales to zero mean and unit population variance (divide by
// N). Requires length >= 2 and a non-constant sequence.
IncrementProcess normalize(std::span<const double> values);

IntegralProcess integrate(const IncrementProcess& x);

// Overlapping differences X[t+tau] - X[t] for t = 0 .. len-1-tau.
std::vector<double> tau_increments(const IntegralProcess& X, std::size_t tau);

// Total bits divided by total bytes.
double bits_per_byte(const BitsSeries& z);

}  // namespace fractal
