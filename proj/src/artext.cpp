#include "mgtkit/artext.hpp"

#include <algorithm>
#include <fstream>
#include <optional>

#include "mgtkit/errors.hpp"
#include "mgtkit/unicode.hpp"

namespace mgtkit {

std::string normalize(const std::string& text, const NormalizeOptions& opts) {
    const std::size_t cap = static_cast<std::size_t>(std::max(1, opts.cap_punct_repeat));
    const std::u32string cps = decode_utf8(text);

    std::u32string kept;
    kept.reserve(cps.size());
    for (char32_t cp : cps) {
        if (opts.strip_nonprintable && is_nonprintable(cp)) continue;
        if (opts.strip_tatweel && cp == kTatweel) continue;
        kept.push_back(cp);
    }

    std::u32string capped;
    capped.reserve(kept.size());
    for (std::size_t i = 0; i < kept.size();) {
        std::size_t j = i;
        while (j < kept.size() && kept[j] == kept[i]) ++j;
        std::size_t run = j - i;
        if (run > cap && is_punct(kept[i])) run = cap;
        capped.append(run, kept[i]);
        i = j;
    }

    if (opts.collapse_whitespace) {
        std::u32string squeezed;
        squeezed.reserve(capped.size());
        bool pending_space = false;
        for (char32_t cp : capped) {
            if (is_whitespace(cp)) {
                pending_space = !squeezed.empty();
                continue;
            }
            if (pending_space) squeezed.push_back(U' ');
            pending_space = false;
            squeezed.push_back(cp);
        }
        capped = std::move(squeezed);
    }
    return encode_utf8(capped);
}

std::vector<std::string> tokenize(const std::string& text) {
    const std::u32string cps = decode_utf8(text);
    std::vector<std::string> tokens;
    std::string current;
    for (char32_t cp : cps) {
        if (is_whitespace(cp)) {
            if (!current.empty()) {
                tokens.push_back(std::move(current));
                current.clear();
            }
            continue;
        }
        if (is_punct(cp)) continue;
        append_utf8(current, to_lower(cp));
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

std::vector<std::string> remove_stopwords(const std::vector<std::string>& tokens,
                                          const std::set<std::string>& stoplist) {
    std::vector<std::string> out;
    out.reserve(tokens.size());
    for (const auto& tok : tokens) {
        if (!stoplist.count(tok)) out.push_back(tok);
    }
    return out;
}

namespace {

enum class CpClass { Arabic, Latin, Other, Neutral };

CpClass classify(char32_t cp) {
    if (is_whitespace(cp) || is_digit(cp) || is_punct(cp) || is_nonprintable(cp))
        return CpClass::Neutral;
    if (is_arabic(cp)) return CpClass::Arabic;
    if (is_latin(cp)) return CpClass::Latin;
    return CpClass::Other;
}

struct BuildingRun {
    Script script;
    std::size_t start;
    std::size_t end;
    std::size_t letters;
};

}  // namespace

std::vector<ScriptRun> segment_language_runs(const std::string& text,
                                             std::size_t min_run_letters) {
    const std::u32string cps = decode_utf8(text);
    std::vector<BuildingRun> runs;
    std::optional<std::size_t> leading_neutral;

    for (std::size_t i = 0; i < cps.size(); ++i) {
        const CpClass cls = classify(cps[i]);
        if (cls == CpClass::Neutral) {
            if (!runs.empty())
                runs.back().end = i + 1;
            else if (!leading_neutral)
                leading_neutral = i;
            continue;
        }
        const Script script = cls == CpClass::Arabic  ? Script::Arabic
                              : cls == CpClass::Latin ? Script::Latin
                                                      : Script::Other;
        if (!runs.empty() && runs.back().script == script) {
            runs.back().end = i + 1;
            runs.back().letters += 1;
        } else {
            const std::size_t start = runs.empty() && leading_neutral ? *leading_neutral : i;
            runs.push_back({script, start, i + 1, 1});
        }
    }

    // short runs fold into their predecessor; a short first run folds forward
    std::vector<BuildingRun> merged;
    for (const auto& run : runs) {
        if (!merged.empty() && run.letters < min_run_letters) {
            merged.back().end = run.end;
            merged.back().letters += run.letters;
        } else {
            merged.push_back(run);
        }
    }
    if (merged.size() >= 2 && merged.front().letters < min_run_letters) {
        merged[1].start = merged[0].start;
        merged[1].letters += merged[0].letters;
        merged.erase(merged.begin());
    }

    std::vector<ScriptRun> out;
    for (const auto& run : merged) {
        if (!out.empty() && out.back().script == run.script)
            out.back().end = run.end;
        else
            out.push_back({run.script, run.start, run.end});
    }
    return out;
}

std::set<std::string> load_stopwords(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open stopword list: " + path);
    std::set<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto first = line.find_first_not_of(" \t\r\n");
        if (first == std::string::npos) continue;
        const auto last = line.find_last_not_of(" \t\r\n");
        words.insert(line.substr(first, last - first + 1));
    }
    return words;
}

const std::set<std::string>& default_stopwords() {
    // MSA function words: prepositions, conjunctions, particles, pronouns,
    // demonstratives and relative pronouns. Content words stay.
    static const std::set<std::string> words = {
        "في", "من", "إلى", "الى", "على", "عن", "مع", "عند", "لدى", "منذ",
        "حتى", "بين", "دون", "بدون", "أمام", "وراء", "خلف", "فوق", "تحت",
        "حول", "ضد", "عبر", "نحو", "لدي",
        "أن", "إن", "ان", "كأن", "لأن", "لكن", "بل", "أو", "او", "أم", "ثم",
        "حيث", "إذا", "اذا", "إذ", "لو", "لولا", "كي", "لكي", "كما", "فيما",
        "بينما", "عندما", "حينما", "مما", "بما", "لما",
        "ما", "لا", "لم", "لن", "ليس", "ليست", "إلا", "الا", "غير", "سوى",
        "هذا", "هذه", "هذان", "هاتان", "هؤلاء", "ذلك", "تلك", "ذاك", "أولئك",
        "الذي", "التي", "الذين", "اللذان", "اللتان", "اللواتي", "اللاتي", "اللائي",
        "هو", "هي", "هما", "هم", "هن", "أنا", "نحن", "أنت", "أنتما", "أنتم", "أنتن",
        "كل", "بعض", "جميع", "أي", "أية",
        "قد", "لقد", "سوف", "هل", "نعم",
        "هنا", "هناك", "هنالك", "أين", "كيف", "متى", "لماذا", "ماذا",
        "لذلك", "كذلك", "أيضا", "أيضًا", "فقط", "مثل",
        "منه", "منها", "فيه", "فيها", "عليه", "عليها", "إليه", "إليها",
        "به", "بها", "له", "لها", "لهم", "لهما", "بهم",
        "و", "ف",
    };
    return words;
}

}  // namespace mgtkit
