#include "fractal/tables.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "fractal/error.hpp"

namespace fractal {

namespace {

std::string strip(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream stream(line);
    while (std::getline(stream, field, ',')) {
        fields.push_back(strip(field));
    }
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

double parse_double(const std::string& text, const std::string& context) {
    try {
        std::size_t pos = 0;
        const double value = std::stod(text, &pos);
        if (pos != text.size()) throw std::invalid_argument(text);
        return value;
    } catch (const std::exception&) {
        throw InvalidInputError("reference table: cannot parse number '" + text + "' in " +
                                context);
    }
}

}  // namespace

std::size_t CsvTable::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (columns[i] == name) return i;
    }
    throw InvalidInputError("reference table: missing column '" + name + "'");
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in.is_open()) {
        throw IoError("cannot open reference table: " + path.string());
    }
    CsvTable table;
    std::string line;
    while (std::getline(in, line)) {
        const std::string trimmed = strip(line);
        if (trimmed.empty() || trimmed.front() == '#') continue;
        if (table.columns.empty()) {
            table.columns = split_csv_line(trimmed);
        } else {
            auto row = split_csv_line(trimmed);
            if (row.size() != table.columns.size()) {
                throw InvalidInputError("reference table " + path.string() +
                                        ": row with wrong field count: " + trimmed);
            }
            table.rows.push_back(std::move(row));
        }
    }
    if (table.columns.empty()) {
        throw InvalidInputError("reference table " + path.string() + " has no header");
    }
    return table;
}

std::optional<double> ModelRecord::metric(const std::string& name) const {
    for (const auto& [key, value] : metrics) {
        if (key == name) return value;
    }
    return std::nullopt;
}

std::vector<ModelRecord> load_model_records(const std::filesystem::path& data_dir,
                                            const std::string& bpb_column) {
    const CsvTable medians = read_csv(data_dir / "model_median_parameters.csv");
    const CsvTable downstream = read_csv(data_dir / "model_downstream_eval.csv");

    const std::size_t med_model = medians.column_index("model");
    const std::size_t med_s = medians.column_index("s");
    const std::size_t med_h = medians.column_index("h");
    const std::size_t med_j = medians.column_index("j");

    const std::size_t down_model = downstream.column_index("model");
    const std::size_t down_bpb = downstream.column_index(bpb_column);

    std::vector<ModelRecord> records;
    for (const auto& med_row : medians.rows) {
        const std::string& model = med_row[med_model];
        const auto match = std::find_if(
            downstream.rows.begin(), downstream.rows.end(),
            [&](const std::vector<std::string>& row) { return row[down_model] == model; });
        if (match == downstream.rows.end()) {
            throw InvalidInputError("reference table: model '" + model +
                                    "' has no downstream row");
        }
        ModelRecord rec;
        rec.model = model;
        rec.median_s = parse_double(med_row[med_s], "medians/" + model);
        rec.median_h = parse_double(med_row[med_h], "medians/" + model);
        rec.median_j = parse_double(med_row[med_j], "medians/" + model);
        rec.bpb = parse_double((*match)[down_bpb], "downstream/" + model);
        for (std::size_t c = 0; c < downstream.columns.size(); ++c) {
            if (c == down_model || c == down_bpb || downstream.columns[c] == "bpb") continue;
            rec.metrics.emplace_back(downstream.columns[c],
                                     parse_double((*match)[c], "downstream/" + model));
        }
        records.push_back(std::move(rec));
    }
    if (records.empty()) {
        throw InvalidInputError("reference table: no models found in " + data_dir.string());
    }
    return records;
}

std::vector<ReferenceR2> load_reference_r2(const std::filesystem::path& data_dir) {
    const auto path = data_dir / "adjusted_r2_reference.csv";
    if (!std::filesystem::exists(path)) return {};
    const CsvTable table = read_csv(path);
    const std::size_t c_bench = table.column_index("benchmark");
    const std::size_t c_bpb = table.column_index("bpb");
    const std::size_t c_h = table.column_index("hurst");
    const std::size_t c_hb = table.column_index("hb");
    std::vector<ReferenceR2> out;
    for (const auto& row : table.rows) {
        out.push_back({row[c_bench], parse_double(row[c_bpb], "reference_r2"),
                       parse_double(row[c_h], "reference_r2"),
                       parse_double(row[c_hb], "reference_r2")});
    }
    return out;
}

std::string predictor_name(Predictor p) {
    switch (p) {
        case Predictor::bpb: return "bpb";
        case Predictor::hurst: return "hurst";
        case Predictor::hb: return "hb";
    }
    return "?";
}

std::vector<double> predictor_values(const std::vector<ModelRecord>& records, Predictor p) {
    std::vector<double> x;
    x.reserve(records.size());
    for (const auto& rec : records) {
        switch (p) {
            case Predictor::bpb: x.push_back(rec.bpb); break;
            case Predictor::hurst: x.push_back(rec.median_h); break;
            case Predictor::hb: x.push_back(hb_metric(rec.bpb, rec.median_h)); break;
        }
    }
    return x;
}

std::vector<std::string> available_benchmarks(const std::vector<ModelRecord>& records) {
    std::vector<std::string> names;
    if (records.empty()) return names;
    for (const auto& [key, value] : records.front().metrics) names.push_back(key);
    return names;
}

PredictOutcome run_predict(const std::vector<ModelRecord>& records,
                           const std::vector<ReferenceR2>& reference,
                           const std::string& benchmark, Predictor predictor) {
    std::vector<double> y;
    y.reserve(records.size());
    for (const auto& rec : records) {
        const auto value = rec.metric(benchmark);
        if (!value.has_value()) {
            throw InvalidInputError("predict: unknown benchmark '" + benchmark + "'");
        }
        y.push_back(*value);
    }

    PredictOutcome outcome;
    outcome.benchmark = benchmark;
    outcome.predictor = predictor;
    outcome.regression = adjusted_r2(predictor_values(records, predictor), y);

    for (const auto& ref : reference) {
        if (ref.benchmark != benchmark) continue;
        switch (predictor) {
            case Predictor::bpb: outcome.reference = ref.bpb; break;
            case Predictor::hurst: outcome.reference = ref.hurst; break;
            case Predictor::hb: outcome.reference = ref.hb; break;
        }
    }
    if (outcome.reference.has_value()) {
        outcome.flagged = std::abs(outcome.regression.adjusted_r_squared - *outcome.reference) >
                          kAdjustedR2Tolerance;
    }
    return outcome;
}

}  // namespace fractal
