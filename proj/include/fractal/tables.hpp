#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fractal/stats.hpp"

namespace fractal {

// Minimal CSV reader for the bundled reference tables: comma-separated, no
// quoting, '#' lines are comments.
struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    std::size_t column_index(const std::string& name) const;  // throws if absent
};

CsvTable read_csv(const std::filesystem::path& path);

// One language model with its compression score, fractal medians, and
// downstream benchmark results.
struct ModelRecord {
    std::string model;
    double bpb = 0.0;
    double median_s = 0.0;
    double median_h = 0.0;
    double median_j = 0.0;
    std::vector<std::pair<std::string, double>> metrics;  // benchmark -> score

    std::optional<double> metric(const std::string& name) const;
};

// Joins the bundled median-parameter and downstream-evaluation tables on
// the model column. bpb_column selects which downstream-table column feeds
// the compression side of the predictors; the default is the corpus-wide
// value, and alternative aggregates can be supplied as extra columns.
std::vector<ModelRecord> load_model_records(const std::filesystem::path& data_dir,
                                            const std::string& bpb_column = "bpb");

// Expected adjusted-R^2 values per benchmark and predictor, used to flag
// reproduction drift.
struct ReferenceR2 {
    std::string benchmark;
    double bpb = 0.0;
    double hurst = 0.0;
    double hb = 0.0;
};

std::vector<ReferenceR2> load_reference_r2(const std::filesystem::path& data_dir);

enum class Predictor { bpb, hurst, hb };

std::string predictor_name(Predictor p);

struct PredictOutcome {
    std::string benchmark;
    Predictor predictor = Predictor::bpb;
    RegressionResult regression;
    std::optional<double> reference;  // expected adjusted R^2, when known
    bool flagged = false;             // |adjusted R^2 - reference| > tolerance
};

// Reproduction drift beyond this is flagged (never hidden) in predict
// output.
inline constexpr double kAdjustedR2Tolerance = 0.02;

// Expected |Pearson r| between median Hurst and bits-per-byte across the
// bundled models, with the band used for flagging.
inline constexpr double kReferenceHurstBpbPearson = 0.83;
inline constexpr double kHurstBpbPearsonTolerance = 0.05;

std::vector<double> predictor_values(const std::vector<ModelRecord>& records, Predictor p);

// Regresses the benchmark column on the chosen predictor across models.
PredictOutcome run_predict(const std::vector<ModelRecord>& records,
                           const std::vector<ReferenceR2>& reference,
                           const std::string& benchmark, Predictor predictor);

// Benchmarks present in all records, in table order.
std::vector<std::string> available_benchmarks(const std::vector<ModelRecord>& records);

}  // namespace fractal
