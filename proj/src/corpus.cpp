#include "mgtkit/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <ctime>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "mgtkit/errors.hpp"
#include "mgtkit/unicode.hpp"

namespace mgtkit {

std::string to_string(Domain domain) {
    return domain == Domain::AcademicAbstract ? "abstract" : "social";
}

std::string to_string(GenMethod method) {
    switch (method) {
        case GenMethod::TitleOnly: return "title_only";
        case GenMethod::TitleContent: return "title_content";
        case GenMethod::Polish: return "polish";
        case GenMethod::None: return "null";
    }
    return "null";
}

Domain domain_from_string(const std::string& s) {
    if (s == "abstract") return Domain::AcademicAbstract;
    if (s == "social") return Domain::SocialPost;
    throw ValidationError("unknown domain: '" + s + "'");
}

GenMethod method_from_string(const std::string& s) {
    if (s == "title_only") return GenMethod::TitleOnly;
    if (s == "title_content") return GenMethod::TitleContent;
    if (s == "polish") return GenMethod::Polish;
    if (s == "null" || s.empty()) return GenMethod::None;
    throw ValidationError("unknown generation method: '" + s + "'");
}

std::size_t count_words(const std::string& text) {
    const std::u32string cps = decode_utf8(normalize(text));
    std::size_t count = 0;
    bool in_word = false;
    for (char32_t cp : cps) {
        if (is_whitespace(cp)) {
            in_word = false;
        } else if (!in_word) {
            in_word = true;
            ++count;
        }
    }
    return count;
}

std::size_t count_words_tokenized(const std::string& text) {
    return tokenize(normalize(text)).size();
}

Document make_document(std::string id, std::string text, Authorship label, Domain domain,
                       GenMethod method) {
    if (id.empty()) throw ValidationError("document id must be non-empty");
    if (label.is_human() != (method == GenMethod::None))
        throw ValidationError("document '" + id + "': method must be null iff label is human");
    Document doc;
    doc.id = std::move(id);
    doc.word_count = count_words(text);
    doc.text = std::move(text);
    doc.label = label;
    doc.domain = domain;
    doc.method = method;
    return doc;
}

void validate(const SplitSpec& spec) {
    const double fractions[] = {spec.train_fraction, spec.val_fraction, spec.test_fraction};
    for (double f : fractions) {
        if (f < 0.0) throw ValidationError("split fraction must be non-negative");
        if (f > 1.0) throw ValidationError("split fraction must be at most 1");
    }
    const double sum = spec.train_fraction + spec.val_fraction + spec.test_fraction;
    if (std::abs(sum - 1.0) > 1e-9)
        throw ValidationError("split fractions must sum to 1, got " + std::to_string(sum));
}

FilterOptions FilterOptions::defaults() {
    FilterOptions opts;
    opts.error_markers = {
        // English refusal and provider failure phrases
        "i'm sorry",
        "i am sorry",
        "as an ai",
        "as a language model",
        "i cannot assist",
        "i can't assist",
        "api error",
        "internal server error",
        "rate limit",
        "context length exceeded",
        "<error>",
        // Arabic refusal phrases
        "عذرا، لا أستطيع",
        "عذرًا، لا أستطيع",
        "لا يمكنني المساعدة",
        "بصفتي نموذج",
        "كنموذج لغوي",
    };
    return opts;
}

std::size_t min_word_count(Domain domain) {
    return domain == Domain::AcademicAbstract ? 30 : 50;
}

namespace {

std::string utc_now() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string fold_case(const std::string& text) {
    const std::u32string cps = decode_utf8(text);
    std::u32string lowered;
    lowered.reserve(cps.size());
    for (char32_t cp : cps) lowered.push_back(to_lower(cp));
    return encode_utf8(lowered);
}

}  // namespace

bool matches_error_marker(const std::string& text, const std::vector<std::string>& markers) {
    if (markers.empty()) return false;
    const std::string folded = fold_case(text);
    for (const auto& marker : markers) {
        if (marker.empty()) continue;
        if (folded.find(fold_case(marker)) != std::string::npos) return true;
    }
    return false;
}

Corpus load_corpus(const std::string& path, Domain expected_domain) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open corpus file: " + path);

    Corpus corpus;
    std::unordered_set<std::string> seen_ids;
    std::string line;
    std::size_t line_no = 0;
    std::size_t blank_lines = 0;

    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            ++blank_lines;
            continue;
        }
        nlohmann::json record;
        try {
            record = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(std::string("invalid JSON record: ") + e.what(), line_no);
        }
        if (!record.is_object()) throw ParseError("record is not an object", line_no);
        for (const char* field : {"id", "text", "label", "domain"}) {
            if (!record.contains(field) || !record[field].is_string())
                throw ParseError(std::string("missing or non-string field '") + field + "'",
                                 line_no);
        }
        if (!record.contains("method") || !(record["method"].is_string() || record["method"].is_null()))
            throw ParseError("missing field 'method' (string or null)", line_no);

        Domain domain;
        try {
            domain = domain_from_string(record["domain"].get<std::string>());
        } catch (const ValidationError& e) {
            throw ParseError(e.what(), line_no);
        }
        if (domain != expected_domain)
            throw ParseError("domain '" + record["domain"].get<std::string>() +
                                 "' does not match expected '" + to_string(expected_domain) + "'",
                             line_no);

        const std::string label_str = record["label"].get<std::string>();
        const Authorship label =
            label_str == "human" ? Authorship::human() : Authorship::model(label_str);
        GenMethod method = GenMethod::None;
        if (record["method"].is_string()) {
            try {
                method = method_from_string(record["method"].get<std::string>());
            } catch (const ValidationError& e) {
                throw ParseError(e.what(), line_no);
            }
        }

        Document doc;
        try {
            doc = make_document(record["id"].get<std::string>(), record["text"].get<std::string>(),
                                label, domain, method);
        } catch (const ValidationError& e) {
            throw ParseError(e.what(), line_no);
        }
        if (!seen_ids.insert(doc.id).second)
            throw ParseError("duplicate document id '" + doc.id + "'", line_no);
        corpus.documents.push_back(std::move(doc));
    }

    if (corpus.documents.empty()) throw Error("corpus file has no records: " + path);
    corpus.meta["source"] = path;
    corpus.meta["created"] = utc_now();
    corpus.meta["filter_log"] =
        "load: " + std::to_string(corpus.documents.size()) + " records, skipped " +
        std::to_string(blank_lines) + " blank lines";
    return corpus;
}

void save_corpus(const Corpus& corpus, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write corpus file: " + path);
    for (const auto& doc : corpus.documents) {
        nlohmann::ordered_json record;
        record["id"] = doc.id;
        record["text"] = doc.text;
        record["label"] = doc.label.to_string();
        record["domain"] = to_string(doc.domain);
        if (doc.method == GenMethod::None)
            record["method"] = nullptr;
        else
            record["method"] = to_string(doc.method);
        out << record.dump() << '\n';
    }
    if (!out) throw Error("write failed: " + path);
}

std::pair<Corpus, FilterReport> filter_generated(const Corpus& corpus, Domain domain,
                                                 const FilterOptions& opts) {
    for (const auto& doc : corpus.documents) {
        if (doc.domain != domain)
            throw ValidationError("document '" + doc.id + "' is not in domain " +
                                  to_string(domain));
    }

    FilterReport report;
    report.input_count = corpus.documents.size();
    Corpus kept;
    kept.meta = corpus.meta;
    std::unordered_set<std::string> seen_texts;
    const std::size_t min_words = min_word_count(domain);

    for (const auto& doc : corpus.documents) {
        if (matches_error_marker(doc.text, opts.error_markers)) {
            ++report.error_marker;
            continue;
        }
        if (doc.word_count < min_words) {
            ++report.too_short;
            continue;
        }
        if (opts.deduplicate && !seen_texts.insert(normalize(doc.text)).second) {
            ++report.duplicates;
            continue;
        }
        kept.documents.push_back(doc);
    }

    report.output_count = kept.documents.size();
    std::ostringstream log;
    log << "filter_generated: kept " << report.output_count << "/" << report.input_count
        << " (error_marker=" << report.error_marker << ", too_short=" << report.too_short
        << ", duplicates=" << report.duplicates << ")";
    auto& entry = kept.meta["filter_log"];
    if (!entry.empty()) entry += "; ";
    entry += log.str();
    return {std::move(kept), report};
}

void write_filter_report_csv(const FilterReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write filter report: " + path);
    out << "rule,count\n";
    out << "error_marker," << report.error_marker << '\n';
    out << "too_short," << report.too_short << '\n';
    out << "duplicates," << report.duplicates << '\n';
    out << "kept," << report.output_count << '\n';
}

SplitResult split(const Corpus& corpus, const SplitSpec& spec) {
    validate(spec);
    if (corpus.empty()) throw ValidationError("cannot split an empty corpus");

    const std::size_t n = corpus.documents.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;

    // Fisher-Yates with pinned draws so membership is reproducible across
    // platforms for a given seed.
    std::mt19937_64 rng(spec.seed);
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(order[i - 1], order[j]);
    }

    const auto take = [&](double fraction) {
        return static_cast<std::size_t>(std::floor(static_cast<double>(n) * fraction + 1e-9));
    };
    const std::size_t n_train = take(spec.train_fraction);
    const std::size_t n_val = std::min(take(spec.val_fraction), n - n_train);

    SplitResult result;
    const std::string note = "split: seed=" + std::to_string(spec.seed);
    result.train.meta = corpus.meta;
    result.val.meta = corpus.meta;
    result.test.meta = corpus.meta;
    result.train.meta["split"] = note + " part=train";
    result.val.meta["split"] = note + " part=val";
    result.test.meta["split"] = note + " part=test";
    for (std::size_t i = 0; i < n; ++i) {
        const Document& doc = corpus.documents[order[i]];
        if (i < n_train)
            result.train.documents.push_back(doc);
        else if (i < n_train + n_val)
            result.val.documents.push_back(doc);
        else
            result.test.documents.push_back(doc);
    }
    return result;
}

namespace {

std::string format_ratio(double value) {
    std::ostringstream out;
    out.precision(10);
    double rounded = std::round(value * 100.0) / 100.0;
    out << rounded;
    return out.str();
}

}  // namespace

Corpus compose_detection_set(const Corpus& human, const std::vector<Corpus>& machine_sets) {
    for (const auto& doc : human.documents) {
        if (!doc.label.is_human())
            throw ValidationError("human corpus contains machine-labeled document '" + doc.id +
                                  "'");
    }
    std::size_t machine_total = 0;
    for (const auto& machine : machine_sets) {
        for (const auto& doc : machine.documents) {
            if (doc.label.is_human())
                throw ValidationError("machine corpus contains human-labeled document '" +
                                      doc.id + "'");
        }
        machine_total += machine.documents.size();
    }

    Corpus out;
    std::unordered_set<std::string> seen_ids;
    const auto append = [&](const Corpus& source) {
        for (const auto& doc : source.documents) {
            if (!seen_ids.insert(doc.id).second)
                throw ValidationError("duplicate document id across inputs: '" + doc.id + "'");
            out.documents.push_back(doc);
        }
    };
    append(human);
    for (const auto& machine : machine_sets) append(machine);

    out.meta["created"] = utc_now();
    out.meta["human_docs"] = std::to_string(human.documents.size());
    out.meta["machine_docs"] = std::to_string(machine_total);
    if (!human.documents.empty()) {
        const double ratio =
            static_cast<double>(machine_total) / static_cast<double>(human.documents.size());
        out.meta["class_ratio"] = "1:" + format_ratio(ratio);
    }
    return out;
}

}  // namespace mgtkit
