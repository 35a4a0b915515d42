#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <vector>

namespace mgtkit {

struct NormalizeOptions {
    bool strip_tatweel = true;
    int cap_punct_repeat = 3;  // >= 1
    bool strip_nonprintable = true;
    bool collapse_whitespace = true;
};

enum class Script { Arabic, Latin, Other };

/// Half-open codepoint offset range sharing one script.
struct ScriptRun {
    Script script;
    std::size_t start;
    std::size_t end;
};

/// Arabic-aware cleanup: tatweel removal, punctuation-run capping,
/// non-printable stripping and whitespace collapsing. Arabic letters,
/// diacritics and dialectal content pass through untouched. Idempotent.
std::string normalize(const std::string& text, const NormalizeOptions& opts = {});

/// Strips punctuation codepoints, lowercases Latin letters and splits on
/// whitespace. Empty tokens are dropped.
std::vector<std::string> tokenize(const std::string& text);

/// Order-preserving removal of exact stoplist matches.
std::vector<std::string> remove_stopwords(const std::vector<std::string>& tokens,
                                          const std::set<std::string>& stoplist);

/// Splits text into maximal script runs. Neutral codepoints (digits,
/// punctuation, whitespace) attach to the preceding run; runs with fewer
/// than min_run_letters letters merge into their neighbour.
std::vector<ScriptRun> segment_language_runs(const std::string& text,
                                             std::size_t min_run_letters = 3);

/// Stopword list file: UTF-8, one token per line, '#' starts a comment.
std::set<std::string> load_stopwords(const std::string& path);

/// Bundled Modern Standard Arabic function-word list.
const std::set<std::string>& default_stopwords();

}  // namespace mgtkit
