#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fractal/corpus.hpp"
#include "fractal/estimators.hpp"
#include "fractal/stats.hpp"

namespace fractal {

// Every analysis-affecting knob. Worker count is deliberately absent from
// the serialized form: results are identical at any parallelism level, and
// the report must be too.
struct AnalyzeConfig {
    TrimPolicy trim;
    double epsilon = 5e-3;
    std::size_t tau_min = 1;
    std::size_t tau_max = 512;
    std::size_t rs_min = 8;
    std::size_t rs_max = 1024;
    std::size_t points_per_decade = 8;
    std::size_t bootstrap_resamples = 1000;
    std::uint64_t seed = 0;
    std::size_t min_domain_docs = 1000;
    std::size_t pacf_max_lag = 64;
    bool rs_literal_prefix = false;  // diagnostic R/S variant
    bool bootstrap_percentile = false;
    std::size_t workers = 1;

    void validate() const;
};

struct DomainReport {
    std::string domain;
    std::size_t n_documents = 0;
    std::size_t rejected_documents = 0;    // too short for the trim policy
    std::size_t degenerate_documents = 0;  // constant bit sequences
    bool eligible = false;                 // counted into medians
    double bits_per_byte = 0.0;

    EstimateResult s;
    EstimateResult h;
    EstimateResult j;
    FractalEstimate d;
    EstimateResult h_variance;  // cross-check, kept out of the headline set

    CorrelogramResult pacf;

    std::optional<BootstrapResult> s_bootstrap;
    std::optional<BootstrapResult> h_bootstrap;
    std::optional<BootstrapResult> j_bootstrap;

    std::vector<std::string> warnings;
};

struct MedianSummary {
    double s = 0.0, h = 0.0, j = 0.0, d = 0.0;
    std::string basis;                 // "eligible_domains" or "all_domains"
    std::vector<std::string> domains;  // the values the medians are over
};

struct FractalReport {
    AnalyzeConfig config;
    std::vector<DomainReport> domains;  // sorted by domain name
    MedianSummary medians;
    ReadStats read_stats;  // aggregated over input files
};

// Full pipeline over already-read documents: trim, normalize per document,
// estimate per domain, bootstrap margins, medians.
FractalReport analyze_documents(const std::vector<Document>& docs, const AnalyzeConfig& config,
                                const ReadStats& read_stats = {});

nlohmann::ordered_json report_to_json(const FractalReport& report);

// report.json plus per-domain curve CSVs under out_dir.
void write_report_files(const FractalReport& report, const std::filesystem::path& out_dir);

// Filesystem-safe, collision-free name for a domain label.
std::string domain_slug(const std::string& domain, std::size_t collision_index = 0);

// Shortest round-trip decimal form; locale-independent.
std::string format_double(double value);

}  // namespace fractal
