#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "mgtkit/artext.hpp"

namespace mgtkit {

enum class Domain { AcademicAbstract, SocialPost };

enum class GenMethod { None, TitleOnly, TitleContent, Polish };

std::string to_string(Domain domain);
std::string to_string(GenMethod method);
Domain domain_from_string(const std::string& s);
GenMethod method_from_string(const std::string& s);  // "null"/"" map to None

/// Human, or a named generating model.
class Authorship {
  public:
    static Authorship human() { return Authorship(true, {}); }
    static Authorship model(std::string name) { return Authorship(false, std::move(name)); }

    bool is_human() const { return human_; }
    const std::string& model_name() const { return name_; }
    /// "human" or the model name, as stored in record files.
    std::string to_string() const { return human_ ? "human" : name_; }

    bool operator==(const Authorship&) const = default;

  private:
    Authorship(bool human, std::string name) : human_(human), name_(std::move(name)) {}
    bool human_;
    std::string name_;
};

struct Document {
    std::string id;
    std::string text;
    Authorship label = Authorship::human();
    Domain domain = Domain::AcademicAbstract;
    GenMethod method = GenMethod::None;
    std::size_t word_count = 0;  // recomputed, never trusted from input

    bool operator==(const Document&) const = default;
};

/// Whitespace-delimited token count of the normalized text. This is the raw
/// counter; for the punctuation-stripped variant see count_words_tokenized.
std::size_t count_words(const std::string& text);
std::size_t count_words_tokenized(const std::string& text);

/// Validates id/label/method consistency and recomputes word_count.
Document make_document(std::string id, std::string text, Authorship label, Domain domain,
                       GenMethod method);

struct Corpus {
    std::vector<Document> documents;
    std::map<std::string, std::string> meta;  // provenance: source, filter log, ...

    std::size_t size() const { return documents.size(); }
    bool empty() const { return documents.empty(); }
};

struct SplitSpec {
    double train_fraction = 0.70;
    double val_fraction = 0.15;
    double test_fraction = 0.15;
    std::uint64_t seed = 0;
};

/// Throws ValidationError unless fractions are non-negative, at most 1 and
/// sum to 1 within 1e-9.
void validate(const SplitSpec& spec);

struct FilterOptions {
    std::vector<std::string> error_markers;  // matched case-insensitively as substrings
    bool deduplicate = true;

    static FilterOptions defaults();
};

struct FilterReport {
    std::size_t error_marker = 0;
    std::size_t too_short = 0;
    std::size_t duplicates = 0;
    std::size_t input_count = 0;
    std::size_t output_count = 0;
};

/// Minimum retained word count per domain: 30 for abstracts, 50 for social
/// posts, both inclusive.
std::size_t min_word_count(Domain domain);

/// True when the text contains any of the markers (case-insensitive).
bool matches_error_marker(const std::string& text, const std::vector<std::string>& markers);

/// Loads a line-delimited JSON record file. Each line carries id, text,
/// label, domain and method; word_count is recomputed. Blank lines are
/// skipped and noted in the corpus meta.
Corpus load_corpus(const std::string& path, Domain expected_domain);

void save_corpus(const Corpus& corpus, const std::string& path);

/// Drops documents matching an error marker, below the domain minimum word
/// count, or duplicating an earlier document's normalized text.
std::pair<Corpus, FilterReport> filter_generated(const Corpus& corpus, Domain domain,
                                                 const FilterOptions& opts = FilterOptions::defaults());

void write_filter_report_csv(const FilterReport& report, const std::string& path);

struct SplitResult {
    Corpus train;
    Corpus val;
    Corpus test;
};

/// Deterministic seeded shuffle, then sizes floor(n*train), floor(n*val),
/// remainder to test. The three outputs partition the input.
SplitResult split(const Corpus& corpus, const SplitSpec& spec);

/// Concatenates a human corpus with machine corpora, preserving labels and
/// recording the human:machine class ratio in the result meta.
Corpus compose_detection_set(const Corpus& human, const std::vector<Corpus>& machine_sets);

}  // namespace mgtkit
