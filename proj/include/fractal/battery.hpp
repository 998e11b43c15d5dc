#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fractal {

struct BatteryRow {
    std::string name;
    double truth = 0.0;
    double estimate = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

struct BatteryOptions {
    std::uint64_t seed = 42;
    std::size_t fgn_paths = 50;
    std::size_t fgn_length = std::size_t{1} << 16;
    std::size_t noise_paths = 50;
    std::size_t noise_length = std::size_t{1} << 14;
    std::size_t workers = 1;
    bool inject_failure = false;  // test hook: force one failing row
};

// Estimator-recovery suite against generators with known parameters:
// rescaled range, increment-deviation and variance-growth slopes, and the
// event-probability exponent on fGn paths; the white-noise null; sampler
// autocovariance exactness; power-law fit recovery; AR(1) partial
// autocorrelations. Deterministic per (seed, worker-independent).
std::vector<BatteryRow> run_oracle_battery(const BatteryOptions& options);

bool all_pass(const std::vector<BatteryRow>& rows);

// Fixed-width text table, one row per check.
std::string format_battery(const std::vector<BatteryRow>& rows);

}  // namespace fractal
