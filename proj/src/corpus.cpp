#include "fractal/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <json.hpp>

#include "fractal/error.hpp"

namespace fractal {

namespace {

using json = nlohmann::json;

Document document_from_json(const json& obj) {
    if (!obj.is_object()) {
        throw InvalidInputError("corpus line is not a JSON object");
    }

    Document doc;
    doc.doc_id = obj.at("doc_id").get<std::string>();
    doc.domain = obj.at("domain").get<std::string>();
    doc.tokens = obj.at("tokens").get<std::vector<std::string>>();
    doc.logprobs = obj.at("logprobs").get<std::vector<double>>();

    if (obj.contains("token_bytes") && !obj.at("token_bytes").is_null()) {
        doc.token_bytes = obj.at("token_bytes").get<std::vector<std::int64_t>>();
    } else {
        doc.token_bytes = utf8_byte_counts(doc.tokens);
    }

    if (obj.contains("logprob_base") && !obj.at("logprob_base").is_null()) {
        const std::string base = obj.at("logprob_base").get<std::string>();
        if (base == "natural") {
            doc.logprob_base = LogBase::natural;
        } else if (base == "base2") {
            doc.logprob_base = LogBase::base2;
        } else {
            throw InvalidInputError("unknown logprob_base '" + base + "'");
        }
    }

    if (doc.tokens.size() != doc.logprobs.size() ||
        doc.tokens.size() != doc.token_bytes.size()) {
        throw InvalidInputError("tokens/logprobs/token_bytes lengths differ");
    }
    if (doc.tokens.empty()) {
        throw InvalidInputError("document has no tokens");
    }
    for (std::size_t i = 0; i < doc.logprobs.size(); ++i) {
        const double lp = doc.logprobs[i];
        if (!std::isfinite(lp) || lp > 0.0) {
            throw InvalidInputError("logprob at index " + std::to_string(i) +
                                    " must be finite and <= 0");
        }
        if (doc.token_bytes[i] < 1) {
            throw InvalidInputError("token byte count at index " + std::to_string(i) +
                                    " must be >= 1");
        }
    }
    return doc;
}

}  // namespace

std::vector<std::int64_t> utf8_byte_counts(std::span<const std::string> tokens) {
    std::vector<std::int64_t> bytes;
    bytes.reserve(tokens.size());
    for (const auto& t : tokens) bytes.push_back(static_cast<std::int64_t>(t.size()));
    return bytes;
}

CorpusReader::CorpusReader(const std::filesystem::path& path) : path_(path), stream_(path) {
    if (!stream_.is_open()) {
        throw IoError("cannot open corpus file: " + path.string());
    }
}

std::optional<Document> CorpusReader::next() {
    std::string line;
    while (std::getline(stream_, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        ++stats_.lines;
        try {
            Document doc = document_from_json_line(line);
            ++stats_.documents;
            return doc;
        } catch (const std::exception&) {
            ++stats_.skipped;
        }
    }
    if (!finished_) {
        finished_ = true;
        if (stats_.lines > 0 && stats_.skipped * 2 > stats_.lines) {
            throw CorpusFormatError(path_.string() + ": " + std::to_string(stats_.skipped) +
                                    " of " + std::to_string(stats_.lines) +
                                    " lines are malformed");
        }
    }
    return std::nullopt;
}

std::vector<Document> read_corpus(const std::filesystem::path& path, ReadStats* stats_out) {
    CorpusReader reader(path);
    std::vector<Document> docs;
    while (auto doc = reader.next()) docs.push_back(std::move(*doc));
    if (stats_out != nullptr) *stats_out = reader.stats();
    return docs;
}

void TrimPolicy::validate() const {
    if (min_tokens <= trim + 1) {
        throw InvalidInputError("trim policy: min_tokens must exceed trim + 1");
    }
    if (keep == 0 || keep > min_tokens - trim) {
        throw InvalidInputError("trim policy: need 0 < keep <= min_tokens - trim");
    }
}

std::optional<Document> filter_and_trim(const Document& doc, const TrimPolicy& policy) {
    policy.validate();
    if (doc.size() <= policy.min_tokens) {
        return std::nullopt;
    }
    Document out;
    out.doc_id = doc.doc_id;
    out.domain = doc.domain;
    out.logprob_base = doc.logprob_base;
    const auto first = policy.trim;
    const auto last = policy.trim + policy.keep;
    out.tokens.assign(doc.tokens.begin() + first, doc.tokens.begin() + last);
    out.logprobs.assign(doc.logprobs.begin() + first, doc.logprobs.begin() + last);
    out.token_bytes.assign(doc.token_bytes.begin() + first, doc.token_bytes.begin() + last);
    return out;
}

std::string document_to_jsonl(const Document& doc) {
    nlohmann::ordered_json obj;
    obj["doc_id"] = doc.doc_id;
    obj["domain"] = doc.domain;
    obj["tokens"] = doc.tokens;
    obj["logprobs"] = doc.logprobs;
    obj["token_bytes"] = doc.token_bytes;
    obj["logprob_base"] = doc.logprob_base == LogBase::natural ? "natural" : "base2";
    return obj.dump();
}

Document document_from_json_line(const std::string& line) {
    json obj;
    try {
        obj = json::parse(line);
    } catch (const json::exception& e) {
        throw InvalidInputError(std::string("JSON parse failure: ") + e.what());
    }
    try {
        return document_from_json(obj);
    } catch (const json::exception& e) {
        throw InvalidInputError(std::string("schema violation: ") + e.what());
    }
}

void write_corpus(const std::filesystem::path& path, std::span<const Document> docs) {
    std::ofstream out(path);
    if (!out.is_open()) {
        throw IoError("cannot open for writing: " + path.string());
    }
    for (const auto& doc : docs) {
        out << document_to_jsonl(doc) << '\n';
    }
    if (!out.good()) {
        throw IoError("write failure: " + path.string());
    }
}

BitsSeries document_bits(const Document& doc) {
    BitsSeries bits;
    bits.doc_id = doc.doc_id;
    bits.values = to_bits(doc.logprobs, doc.logprob_base);
    bits.byte_counts = doc.token_bytes;
    return bits;
}

bool CorpusManifest::eligible(const std::string& domain) const {
    for (const auto& d : domains) {
        if (d.domain == domain) return d.documents >= min_domain_docs;
    }
    return false;
}

CorpusManifest build_manifest(std::span<const Document> docs, const TrimPolicy& filters,
                              std::size_t min_domain_docs) {
    std::map<std::string, DomainSummary> by_domain;
    for (const auto& doc : docs) {
        auto& entry = by_domain[doc.domain];
        entry.domain = doc.domain;
        ++entry.documents;
    }
    CorpusManifest manifest;
    manifest.filters = filters;
    manifest.min_domain_docs = min_domain_docs;
    manifest.domains.reserve(by_domain.size());
    for (auto& [name, summary] : by_domain) {
        manifest.domains.push_back(std::move(summary));
    }
    return manifest;
}

}  // namespace fractal
