#include "fractal/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>

#include "fractal/error.hpp"
#include "fractal/parallel.hpp"
#include "fractal/rng.hpp"
#include "fractal/version.hpp"

namespace fractal {

namespace {

using ordered_json = nlohmann::ordered_json;

struct PreparedDomain {
    std::string domain;
    std::size_t rejected = 0;
    std::size_t degenerate = 0;
    std::vector<BitsSeries> bits;          // analyzed docs, sorted by doc_id
    std::vector<IncrementProcess> increments;
    std::vector<IntegralProcess> integrals;
    std::vector<std::string> warnings;
};

ordered_json fit_to_json(const PowerLawFit& fit) {
    ordered_json obj;
    obj["exponent"] = fit.exponent;
    obj["log_intercept"] = fit.log_intercept;
    obj["r_squared"] = fit.r_squared;
    obj["n_points"] = fit.n_points;
    obj["window"] = {fit.window_min, fit.window_max};
    return obj;
}

ordered_json estimate_to_json(const FractalEstimate& est, bool has_margin) {
    ordered_json obj;
    obj["value"] = est.value;
    if (has_margin) {
        obj["margin"] = est.margin;
    } else {
        obj["margin"] = nullptr;
    }
    if (est.fit.has_value()) {
        obj["fit"] = fit_to_json(*est.fit);
        obj["dropped_points"] = est.dropped_points;
    }
    if (est.parameter == FractalParameter::H && est.excluded_blocks > 0) {
        obj["excluded_blocks"] = est.excluded_blocks;
    }
    obj["n_documents"] = est.n_documents;
    if (est.outside_soft_range) obj["outside_soft_range"] = true;
    return obj;
}

double margin_or_zero(const std::optional<BootstrapResult>& b) {
    return b.has_value() ? b->margin : 0.0;
}

}  // namespace

void AnalyzeConfig::validate() const {
    trim.validate();
    if (!(epsilon > 0.0)) {
        throw InvalidInputError("analyze: epsilon must be > 0");
    }
    if (tau_min < 1 || tau_min >= tau_max) {
        throw InvalidInputError("analyze: need 1 <= tau_min < tau_max");
    }
    if (rs_min < 4 || rs_min >= rs_max) {
        throw InvalidInputError("analyze: need 4 <= rs_min < rs_max");
    }
    if (points_per_decade < 1) {
        throw InvalidInputError("analyze: points_per_decade must be >= 1");
    }
    if (trim.keep <= tau_max || trim.keep <= rs_max) {
        throw InvalidInputError(
            "analyze: kept token count must exceed the largest fitting window");
    }
}

std::string format_double(double value) {
    char buffer[64];
    const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
    return std::string(buffer, result.ptr);
}

std::string domain_slug(const std::string& domain, std::size_t collision_index) {
    std::string slug;
    slug.reserve(domain.size());
    for (const char ch : domain) {
        const bool keep = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') ||
                          (ch >= '0' && ch <= '9') || ch == '.' || ch == '-' || ch == '_';
        slug.push_back(keep ? ch : '_');
    }
    if (slug.empty()) slug = "domain";
    if (collision_index > 0) slug += "_" + std::to_string(collision_index);
    return slug;
}

FractalReport analyze_documents(const std::vector<Document>& docs, const AnalyzeConfig& config,
                                const ReadStats& read_stats) {
    config.validate();

    // Group by domain, apply the trim policy, and fix the document order by
    // doc_id so estimates and resamples never depend on input order.
    std::map<std::string, std::vector<Document>> accepted;
    std::map<std::string, std::size_t> rejected;
    for (const auto& doc : docs) {
        if (auto trimmed = filter_and_trim(doc, config.trim)) {
            accepted[doc.domain].push_back(std::move(*trimmed));
        } else {
            ++rejected[doc.domain];
        }
    }
    if (accepted.empty()) {
        throw InsufficientDataError("analyze: no documents pass the length filter");
    }

    std::vector<PreparedDomain> prepared;
    prepared.reserve(accepted.size());
    for (auto& [name, domain_docs] : accepted) {
        std::stable_sort(domain_docs.begin(), domain_docs.end(),
                         [](const Document& a, const Document& b) { return a.doc_id < b.doc_id; });
        PreparedDomain prep;
        prep.domain = name;
        prep.rejected = rejected.count(name) ? rejected[name] : 0;

        std::vector<std::optional<BitsSeries>> bits_slots(domain_docs.size());
        std::vector<std::optional<IncrementProcess>> inc_slots(domain_docs.size());
        parallel_for(domain_docs.size(), config.workers, [&](std::size_t i) {
            BitsSeries bits = document_bits(domain_docs[i]);
            try {
                inc_slots[i] = normalize(bits.values);
                bits_slots[i] = std::move(bits);
            } catch (const DegenerateSeriesError&) {
                // leave both slots empty
            }
        });
        for (std::size_t i = 0; i < domain_docs.size(); ++i) {
            if (!inc_slots[i].has_value()) {
                ++prep.degenerate;
                prep.warnings.push_back("document '" + domain_docs[i].doc_id +
                                        "' has constant bits; excluded");
                continue;
            }
            prep.bits.push_back(std::move(*bits_slots[i]));
            prep.increments.push_back(std::move(*inc_slots[i]));
        }
        prep.integrals.reserve(prep.increments.size());
        for (const auto& inc : prep.increments) prep.integrals.push_back(integrate(inc));
        if (prep.increments.empty()) {
            throw InsufficientDataError("analyze: domain '" + name +
                                        "' has no usable documents after normalization");
        }
        prepared.push_back(std::move(prep));
    }

    const EvalGrid tau_grid = make_grid(config.tau_min, config.tau_max, config.points_per_decade);
    const EvalGrid rs_grid = make_grid(config.rs_min, config.rs_max, config.points_per_decade);
    const RsMeanAdjust adjust =
        config.rs_literal_prefix ? RsMeanAdjust::literal_prefix : RsMeanAdjust::block_mean;

    FractalReport report;
    report.config = config;
    report.read_stats = read_stats;

    for (const auto& prep : prepared) {
        DomainReport domain;
        domain.domain = prep.domain;
        domain.n_documents = prep.increments.size();
        domain.rejected_documents = prep.rejected;
        domain.degenerate_documents = prep.degenerate;
        domain.eligible = domain.n_documents >= config.min_domain_docs;
        domain.warnings = prep.warnings;

        double total_bits = 0.0;
        double total_bytes = 0.0;
        for (const auto& b : prep.bits) {
            total_bits += std::accumulate(b.values.begin(), b.values.end(), 0.0);
            total_bytes += static_cast<double>(
                std::accumulate(b.byte_counts.begin(), b.byte_counts.end(), std::int64_t{0}));
        }
        domain.bits_per_byte = total_bits / total_bytes;

        const std::size_t n_docs = prep.increments.size();

        // Per-document sufficient statistics, computed in parallel and
        // reduced in sorted-document order.
        const double epsilons[1] = {config.epsilon};
        std::vector<EventCountStats> ss_stats(n_docs);
        std::vector<IncrementMomentStats> mom_stats(n_docs);
        std::vector<RescaledRangeStats> rs_stats(n_docs);
        parallel_for(n_docs, config.workers, [&](std::size_t i) {
            ss_stats[i] = selfsim_doc_stats(prep.integrals[i], epsilons, tau_grid);
            mom_stats[i] = increment_moment_stats(prep.integrals[i], tau_grid);
            rs_stats[i] = rs_doc_stats(prep.increments[i], rs_grid, adjust);
        });

        std::vector<std::size_t> all_docs(n_docs);
        std::iota(all_docs.begin(), all_docs.end(), 0);

        domain.s = selfsim_from_stats(ss_stats, all_docs, 0, tau_grid);
        domain.h = rs_from_stats(rs_stats, all_docs, rs_grid);
        domain.j = joseph_from_stats(mom_stats, all_docs, tau_grid);
        domain.h_variance = variance_growth_from_stats(mom_stats, all_docs, tau_grid);

        const std::size_t pacf_lag =
            std::min(config.pacf_max_lag, prep.increments.front().length() / 2 - 1);
        domain.pacf = pooled_pacf(prep.increments, pacf_lag);

        if (n_docs >= 10) {
            auto run_bootstrap = [&](const char* param,
                                     const std::function<double(std::span<const std::size_t>)>&
                                         estimator) {
                BootstrapOptions options;
                options.resamples = config.bootstrap_resamples;
                options.seed = config.seed;
                options.stream = fnv1a64(prep.domain + "/" + param);
                options.workers = config.workers;
                options.percentile = config.bootstrap_percentile;
                return bootstrap_ci(n_docs, estimator, options);
            };
            domain.s_bootstrap = run_bootstrap("S", [&](std::span<const std::size_t> idx) {
                return selfsim_from_stats(ss_stats, idx, 0, tau_grid).estimate.value;
            });
            domain.h_bootstrap = run_bootstrap("H", [&](std::span<const std::size_t> idx) {
                return rs_from_stats(rs_stats, idx, rs_grid).estimate.value;
            });
            domain.j_bootstrap = run_bootstrap("J", [&](std::span<const std::size_t> idx) {
                return joseph_from_stats(mom_stats, idx, tau_grid).estimate.value;
            });
        } else {
            domain.warnings.push_back("fewer than 10 documents; bootstrap margins skipped");
        }

        domain.s.estimate.margin = margin_or_zero(domain.s_bootstrap);
        domain.h.estimate.margin = margin_or_zero(domain.h_bootstrap);
        domain.j.estimate.margin = margin_or_zero(domain.j_bootstrap);
        domain.d = fractal_dimension(domain.s.estimate);

        report.domains.push_back(std::move(domain));
    }

    // Medians over eligible domains; when nothing qualifies they fall back
    // to every domain and say so.
    std::vector<const DomainReport*> median_set;
    for (const auto& d : report.domains) {
        if (d.eligible) median_set.push_back(&d);
    }
    if (median_set.empty()) {
        for (const auto& d : report.domains) median_set.push_back(&d);
        report.medians.basis = "all_domains";
    } else {
        report.medians.basis = "eligible_domains";
    }
    std::vector<double> s_vals, h_vals, j_vals, d_vals;
    for (const auto* d : median_set) {
        report.medians.domains.push_back(d->domain);
        s_vals.push_back(d->s.estimate.value);
        h_vals.push_back(d->h.estimate.value);
        j_vals.push_back(d->j.estimate.value);
        d_vals.push_back(d->d.value);
    }
    report.medians.s = median_across_domains(s_vals);
    report.medians.h = median_across_domains(h_vals);
    report.medians.j = median_across_domains(j_vals);
    report.medians.d = median_across_domains(d_vals);

    return report;
}

ordered_json report_to_json(const FractalReport& report) {
    const AnalyzeConfig& cfg = report.config;

    ordered_json root;
    root["tool"] = {{"name", kToolName}, {"version", kToolVersion}};

    ordered_json config;
    config["epsilon"] = cfg.epsilon;
    config["tau_window"] = {cfg.tau_min, cfg.tau_max};
    config["rs_window"] = {cfg.rs_min, cfg.rs_max};
    config["points_per_decade"] = cfg.points_per_decade;
    config["filters"] = {{"min_doc_tokens", cfg.trim.min_tokens},
                         {"keep_tokens", cfg.trim.keep},
                         {"trim_tokens", cfg.trim.trim}};
    config["min_domain_docs"] = cfg.min_domain_docs;
    config["bootstrap_resamples"] = cfg.bootstrap_resamples;
    config["seed"] = cfg.seed;
    config["pacf_max_lag"] = cfg.pacf_max_lag;
    config["pooling"] = {{"normalization", "per_document"},
                         {"selfsim", "pairs_pooled_across_documents"},
                         {"joseph", "increments_pooled_across_documents"},
                         {"rs", "block_average_across_documents"},
                         {"rs_mean_adjust", cfg.rs_literal_prefix ? "literal_prefix" : "block_mean"},
                         {"bootstrap_unit", "document"},
                         {"margin", cfg.bootstrap_percentile ? "bootstrap_std_plus_percentile"
                                                             : "bootstrap_std"},
                         {"byte_counts", "input_or_utf8_token_length"},
                         {"stored_bits_base", "base2"}};
    root["config"] = std::move(config);

    ordered_json domains = ordered_json::array();
    std::map<std::string, std::size_t> slug_uses;
    for (const auto& d : report.domains) {
        ordered_json entry;
        entry["domain"] = d.domain;
        entry["n_documents"] = d.n_documents;
        entry["rejected_documents"] = d.rejected_documents;
        entry["degenerate_documents"] = d.degenerate_documents;
        entry["eligible_for_medians"] = d.eligible;
        entry["bits_per_byte"] = d.bits_per_byte;

        ordered_json estimates;
        estimates["S"] = estimate_to_json(d.s.estimate, d.s_bootstrap.has_value());
        estimates["H"] = estimate_to_json(d.h.estimate, d.h_bootstrap.has_value());
        estimates["J"] = estimate_to_json(d.j.estimate, d.j_bootstrap.has_value());
        estimates["D"] = estimate_to_json(d.d, d.s_bootstrap.has_value());
        entry["estimates"] = std::move(estimates);

        ordered_json checks;
        checks["H_variance"] = estimate_to_json(d.h_variance.estimate, false);
        entry["cross_checks"] = std::move(checks);

        if (d.s_bootstrap.has_value()) {
            ordered_json boot;
            boot["resamples"] = d.s_bootstrap->n_resamples;
            boot["seed"] = d.s_bootstrap->seed;
            boot["failed_replicates"] = {{"S", d.s_bootstrap->failed_replicates},
                                         {"H", d.h_bootstrap->failed_replicates},
                                         {"J", d.j_bootstrap->failed_replicates}};
            auto interval_json = [](const std::optional<BootstrapResult>& b) -> ordered_json {
                if (b.has_value() && b->percentile_interval.has_value()) {
                    return {b->percentile_interval->first, b->percentile_interval->second};
                }
                return nullptr;
            };
            if (report.config.bootstrap_percentile) {
                boot["percentile_intervals"] = {{"S", interval_json(d.s_bootstrap)},
                                                {"H", interval_json(d.h_bootstrap)},
                                                {"J", interval_json(d.j_bootstrap)}};
            }
            entry["bootstrap"] = std::move(boot);
        }

        const std::size_t collision = slug_uses[domain_slug(d.domain)]++;
        const std::string slug = domain_slug(d.domain, collision);
        entry["curves"] = {{"selfsim", "selfsim_" + slug + ".csv"},
                           {"rs", "rs_" + slug + ".csv"},
                           {"joseph", "joseph_" + slug + ".csv"},
                           {"pacf", "pacf_" + slug + ".csv"}};

        entry["warnings"] = d.warnings;
        domains.push_back(std::move(entry));
    }
    root["domains"] = std::move(domains);

    ordered_json medians;
    medians["S"] = report.medians.s;
    medians["H"] = report.medians.h;
    medians["J"] = report.medians.j;
    medians["D"] = report.medians.d;
    medians["basis"] = report.medians.basis;
    medians["domains"] = report.medians.domains;
    root["medians"] = std::move(medians);

    root["diagnostics"] = {{"corpus_lines", report.read_stats.lines},
                           {"corpus_documents", report.read_stats.documents},
                           {"corpus_skipped_lines", report.read_stats.skipped}};
    return root;
}

namespace {

void write_curve_csv(const std::filesystem::path& path, const char* x_name, const char* y_name,
                     const std::vector<CurvePoint>& curve) {
    std::ofstream out(path);
    if (!out.is_open()) {
        throw IoError("cannot write curve file: " + path.string());
    }
    out << x_name << ',' << y_name << '\n';
    for (const auto& p : curve) {
        out << p.x << ',' << format_double(p.y) << '\n';
    }
}

void write_pacf_csv(const std::filesystem::path& path, const CorrelogramResult& corr) {
    std::ofstream out(path);
    if (!out.is_open()) {
        throw IoError("cannot write curve file: " + path.string());
    }
    out << "lag,autocov,pacf\n";
    for (std::size_t i = 0; i < corr.lags.size(); ++i) {
        out << corr.lags[i] << ',' << format_double(corr.autocov[i]) << ','
            << format_double(corr.pacf[i]) << '\n';
    }
}

}  // namespace

void write_report_files(const FractalReport& report, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);

    std::map<std::string, std::size_t> slug_uses;
    for (const auto& d : report.domains) {
        const std::size_t collision = slug_uses[domain_slug(d.domain)]++;
        const std::string slug = domain_slug(d.domain, collision);
        write_curve_csv(out_dir / ("selfsim_" + slug + ".csv"), "tau", "p_epsilon", d.s.curve);
        write_curve_csv(out_dir / ("rs_" + slug + ".csv"), "n", "rs", d.h.curve);
        write_curve_csv(out_dir / ("joseph_" + slug + ".csv"), "tau", "sigma", d.j.curve);
        write_pacf_csv(out_dir / ("pacf_" + slug + ".csv"), d.pacf);
    }

    std::ofstream out(out_dir / "report.json");
    if (!out.is_open()) {
        throw IoError("cannot write report: " + (out_dir / "report.json").string());
    }
    out << report_to_json(report).dump(2) << '\n';
}

}  // namespace fractal
