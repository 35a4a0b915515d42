#include "mgtkit/stylometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "mgtkit/errors.hpp"
#include "mgtkit/svg.hpp"

namespace mgtkit {

std::vector<std::string> TextPipeline::run(const std::string& text) const {
    auto tokens = tokenize(normalize(text, normalize_opts));
    if (stoplist.empty()) return tokens;
    return remove_stopwords(tokens, stoplist);
}

TextPipeline TextPipeline::with_default_stopwords() {
    TextPipeline pipeline;
    pipeline.stoplist = default_stopwords();
    return pipeline;
}

TextPipeline TextPipeline::plain() {
    return TextPipeline{};
}

LengthStats length_stats(const Corpus& corpus, LengthCounter counter) {
    if (corpus.empty()) throw ValidationError("length_stats: corpus is empty");
    LengthStats stats;
    stats.n = corpus.documents.size();
    double sum = 0.0;
    bool first = true;
    for (const auto& doc : corpus.documents) {
        const std::size_t words = counter == LengthCounter::Raw
                                      ? doc.word_count
                                      : count_words_tokenized(doc.text);
        if (first) {
            stats.min = stats.max = words;
            first = false;
        } else {
            stats.min = std::min(stats.min, words);
            stats.max = std::max(stats.max, words);
        }
        sum += static_cast<double>(words);
    }
    stats.avg = sum / static_cast<double>(stats.n);
    return stats;
}

std::string format_avg(double avg) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.1f", std::floor(avg * 10.0 + 0.5) / 10.0);
    return buf;
}

void TokenFrequencyTable::add(const std::string& token, long long count) {
    entries[token] += count;
    total += count;
}

TokenFrequencyTable frequency_table(const Corpus& corpus, const TextPipeline& pipeline) {
    TokenFrequencyTable table;
    for (const auto& doc : corpus.documents) {
        for (auto& token : pipeline.run(doc.text)) table.add(token);
    }
    return table;
}

TokenFrequencyTable merge_tables(const TokenFrequencyTable& a, const TokenFrequencyTable& b) {
    TokenFrequencyTable out = a;
    for (const auto& [token, count] : b.entries) out.add(token, count);
    return out;
}

std::vector<TokenCount> top_k(const TokenFrequencyTable& table, std::size_t k) {
    if (k < 1) throw ValidationError("top_k: k must be at least 1");
    // entries iterate in codepoint order; a stable sort on count keeps that
    // order as the tie-break
    std::vector<TokenCount> items(table.entries.begin(), table.entries.end());
    std::stable_sort(items.begin(), items.end(),
                     [](const TokenCount& a, const TokenCount& b) { return a.second > b.second; });
    if (items.size() > k) items.resize(k);
    return items;
}

RankFrequencyCurve rank_frequency_curve(const TokenFrequencyTable& table, std::size_t k,
                                        const std::string& source_label) {
    if (table.entries.empty()) throw ValidationError("rank_frequency_curve: table is empty");
    RankFrequencyCurve curve;
    curve.source_label = source_label;
    const auto top = top_k(table, k);
    curve.points.reserve(top.size());
    for (std::size_t i = 0; i < top.size(); ++i)
        curve.points.emplace_back(i + 1, top[i].second);
    return curve;
}

std::pair<double, double> fit_loglog_slope(const RankFrequencyCurve& curve) {
    if (curve.points.size() < 2)
        throw ValidationError("fit_loglog_slope: need at least 2 points");
    const double n = static_cast<double>(curve.points.size());
    double mean_x = 0.0, mean_y = 0.0;
    for (const auto& [rank, freq] : curve.points) {
        mean_x += std::log(static_cast<double>(rank));
        mean_y += std::log(static_cast<double>(freq));
    }
    mean_x /= n;
    mean_y /= n;
    double sxy = 0.0, sxx = 0.0;
    for (const auto& [rank, freq] : curve.points) {
        const double dx = std::log(static_cast<double>(rank)) - mean_x;
        const double dy = std::log(static_cast<double>(freq)) - mean_y;
        sxy += dx * dy;
        sxx += dx * dx;
    }
    if (sxx == 0.0) throw ValidationError("fit_loglog_slope: degenerate ranks");
    const double slope = sxy / sxx;
    return {slope, mean_y - slope * mean_x};
}

std::string to_string(OverlapCategory category) {
    switch (category) {
        case OverlapCategory::HumanMatch: return "human_match";
        case OverlapCategory::SharedLLM: return "shared_llm";
        case OverlapCategory::SingleLLM: return "single_llm";
        case OverlapCategory::CrossLLM: return "cross_llm";
        case OverlapCategory::HumanUnique: return "human_unique";
    }
    return "";
}

OverlapReport categorize_overlap(const std::vector<TokenCount>& human,
                                 const std::map<std::string, std::vector<TokenCount>>& llm_lists,
                                 std::size_t k) {
    if (llm_lists.empty())
        throw ValidationError("categorize_overlap: need at least one LLM list");
    if (human.size() > k)
        throw ValidationError("categorize_overlap: inconsistent k (human list longer than k)");
    for (const auto& [name, list] : llm_lists) {
        if (list.size() > k)
            throw ValidationError("categorize_overlap: inconsistent k (list '" + name +
                                  "' longer than k)");
    }

    // token -> rank per list; rank is the 1-based position
    std::map<std::string, std::size_t> human_rank;
    for (std::size_t i = 0; i < human.size(); ++i) human_rank[human[i].first] = i + 1;
    std::map<std::string, std::map<std::string, std::size_t>> llm_ranks;
    for (const auto& [name, list] : llm_lists) {
        auto& ranks = llm_ranks[name];
        for (std::size_t i = 0; i < list.size(); ++i) ranks[list[i].first] = i + 1;
    }

    std::set<std::string> universe;
    for (const auto& [token, _] : human_rank) universe.insert(token);
    for (const auto& [_, ranks] : llm_ranks)
        for (const auto& [token, __] : ranks) universe.insert(token);

    OverlapReport report;
    const std::size_t llm_count = llm_lists.size();
    for (const auto& token : universe) {
        const bool in_human = human_rank.count(token) > 0;
        std::size_t llm_hits = 0;
        std::vector<std::size_t> ranks;
        if (in_human) ranks.push_back(human_rank[token]);
        for (const auto& [_, table] : llm_ranks) {
            const auto it = table.find(token);
            if (it != table.end()) {
                ++llm_hits;
                ranks.push_back(it->second);
            }
        }

        OverlapCategory category;
        if (in_human)
            category = llm_hits > 0 ? OverlapCategory::HumanMatch : OverlapCategory::HumanUnique;
        else if (llm_hits == llm_count)
            category = OverlapCategory::SharedLLM;
        else if (llm_hits == 1)
            category = OverlapCategory::SingleLLM;
        else
            category = OverlapCategory::CrossLLM;

        bool stable = false;
        if (ranks.size() >= 3) {
            const auto [lo, hi] = std::minmax_element(ranks.begin(), ranks.end());
            stable = *hi - *lo <= 1;
        }
        report.words[token] = {category, stable};
    }
    return report;
}

namespace {

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += "\"";
    return out;
}

}  // namespace

void write_frequency_csv(const TokenFrequencyTable& table, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write frequency table: " + path);
    out << "token,count\n";
    for (const auto& [token, count] : top_k(table, table.entries.empty() ? 1 : table.entries.size()))
        out << csv_escape(token) << ',' << count << '\n';
}

void write_curve_csv(const RankFrequencyCurve& curve, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write curve: " + path);
    out << "rank,frequency\n";
    for (const auto& [rank, freq] : curve.points) out << rank << ',' << freq << '\n';
}

void write_curves_svg(const std::vector<RankFrequencyCurve>& curves, const std::string& path) {
    std::vector<SvgSeries> series;
    series.reserve(curves.size());
    for (const auto& curve : curves) {
        SvgSeries s;
        s.label = curve.source_label.empty() ? "series" : curve.source_label;
        for (const auto& [rank, freq] : curve.points)
            s.points.emplace_back(static_cast<double>(rank), static_cast<double>(freq));
        series.push_back(std::move(s));
    }
    write_text_file(path, svg_loglog_chart(series, "rank", "frequency"));
}

void write_overlap_csv(const OverlapReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write overlap report: " + path);
    out << "token,category,stable_position\n";
    for (const auto& [token, entry] : report.words)
        out << csv_escape(token) << ',' << to_string(entry.category) << ','
            << (entry.stable_position ? 1 : 0) << '\n';
}

}  // namespace mgtkit
