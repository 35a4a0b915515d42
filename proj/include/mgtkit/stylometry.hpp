#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "mgtkit/corpus.hpp"

namespace mgtkit {

/// normalize -> tokenize -> remove_stopwords, shared by the frequency and
/// similarity analyses.
struct TextPipeline {
    NormalizeOptions normalize_opts;
    std::set<std::string> stoplist;  // empty set disables stopword removal

    std::vector<std::string> run(const std::string& text) const;

    static TextPipeline with_default_stopwords();
    static TextPipeline plain();  // no stopword removal
};

struct LengthStats {
    std::size_t min = 0;
    std::size_t max = 0;
    double avg = 0.0;
    std::size_t n = 0;
};

enum class LengthCounter { Raw, Tokenized };

LengthStats length_stats(const Corpus& corpus, LengthCounter counter = LengthCounter::Raw);

/// Half-up to one decimal, the precision used in reports.
std::string format_avg(double avg);

struct TokenFrequencyTable {
    std::map<std::string, long long> entries;
    long long total = 0;

    void add(const std::string& token, long long count = 1);
};

TokenFrequencyTable frequency_table(const Corpus& corpus, const TextPipeline& pipeline);

/// Pointwise count sum; tables built over disjoint corpora merge associatively.
TokenFrequencyTable merge_tables(const TokenFrequencyTable& a, const TokenFrequencyTable& b);

using TokenCount = std::pair<std::string, long long>;

/// Descending by count, ties broken by codepoint order of the token.
std::vector<TokenCount> top_k(const TokenFrequencyTable& table, std::size_t k);

struct RankFrequencyCurve {
    std::vector<std::pair<std::size_t, long long>> points;  // (rank, frequency), rank 1-based
    std::string source_label;
};

RankFrequencyCurve rank_frequency_curve(const TokenFrequencyTable& table, std::size_t k = 100,
                                        const std::string& source_label = "");

/// Ordinary least squares on (ln rank, ln frequency).
std::pair<double, double> fit_loglog_slope(const RankFrequencyCurve& curve);

enum class OverlapCategory { HumanMatch, SharedLLM, SingleLLM, CrossLLM, HumanUnique };

std::string to_string(OverlapCategory category);

struct OverlapEntry {
    OverlapCategory category;
    bool stable_position = false;
};

struct OverlapReport {
    std::map<std::string, OverlapEntry> words;
};

/// Categorizes every token appearing in the human or LLM top-k lists. All
/// lists must have been drawn with the same k. A token is position-stable
/// when it appears in at least three lists with ranks spanning at most 1.
OverlapReport categorize_overlap(const std::vector<TokenCount>& human,
                                 const std::map<std::string, std::vector<TokenCount>>& llm_lists,
                                 std::size_t k);

void write_frequency_csv(const TokenFrequencyTable& table, const std::string& path);
void write_curve_csv(const RankFrequencyCurve& curve, const std::string& path);
void write_curves_svg(const std::vector<RankFrequencyCurve>& curves, const std::string& path);
void write_overlap_csv(const OverlapReport& report, const std::string& path);

}  // namespace mgtkit
