#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fractal/series.hpp"

namespace fractal {

// One scored document: token texts with their log-probabilities under some
// model. Raw values are kept as read; base conversion happens when bits are
// derived.
struct Document {
    std::string doc_id;
    std::string domain;
    std::vector<std::string> tokens;
    std::vector<double> logprobs;            // all <= 0, finite
    std::vector<std::int64_t> token_bytes;   // all >= 1
    LogBase logprob_base = LogBase::natural;

    std::size_t size() const { return tokens.size(); }
    bool operator==(const Document&) const = default;
};

struct ReadStats {
    std::size_t lines = 0;
    std::size_t documents = 0;
    std::size_t skipped = 0;
};

// Streaming JSONL reader. Malformed lines are skipped and tallied; if more
// than half of a non-empty file fails to parse the stream throws
// CorpusFormatError at end of input.
class CorpusReader {
public:
    explicit CorpusReader(const std::filesystem::path& path);

    // Next valid document, or nullopt at end of file.
    std::optional<Document> next();

    const ReadStats& stats() const { return stats_; }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    std::ifstream stream_;
    ReadStats stats_;
    bool finished_ = false;
};

std::vector<Document> read_corpus(const std::filesystem::path& path,
                                  ReadStats* stats_out = nullptr);

// Document eligibility and trimming rules: documents with size() <=
// min_tokens are rejected; accepted ones keep exactly `keep` tokens
// starting at `trim`.
struct TrimPolicy {
    std::size_t min_tokens = 4096;
    std::size_t keep = 2048;
    std::size_t trim = 100;

    void validate() const;
};

// Returns the trimmed document, or nullopt when the document is too short.
// Rejection is a value, not an error.
std::optional<Document> filter_and_trim(const Document& doc, const TrimPolicy& policy);

// Serialization to the corpus JSONL schema.
std::string document_to_jsonl(const Document& doc);
Document document_from_json_line(const std::string& line);
void write_corpus(const std::filesystem::path& path, std::span<const Document> docs);

// Bits view of a document (always base-2).
BitsSeries document_bits(const Document& doc);

// UTF-8 byte length of each token text; the fallback when token_bytes is
// absent from the input.
std::vector<std::int64_t> utf8_byte_counts(std::span<const std::string> tokens);

struct DomainSummary {
    std::string domain;
    std::size_t documents = 0;
    std::vector<std::string> files;
};

struct CorpusManifest {
    std::vector<DomainSummary> domains;  // sorted by domain name
    TrimPolicy filters;
    std::size_t min_domain_docs = 1000;

    bool eligible(const std::string& domain) const;
};

CorpusManifest build_manifest(std::span<const Document> docs, const TrimPolicy& filters,
                              std::size_t min_domain_docs);

}  // namespace fractal
