#include "mgtkit/refmetrics.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "mgtkit/errors.hpp"

namespace mgtkit {

namespace {

constexpr double kEpsilon = 1e-9;

// n-grams keyed by their joined tokens; \x1F cannot occur inside a token
// because tokenize strips control characters via normalize upstream, and
// even raw tokens containing it would only collide with themselves.
std::unordered_map<std::string, int> ngram_counts(const Tokens& tokens, int n) {
    std::unordered_map<std::string, int> counts;
    if (static_cast<int>(tokens.size()) < n) return counts;
    for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= tokens.size(); ++i) {
        std::string key;
        for (int j = 0; j < n; ++j) {
            if (j) key += '\x1F';
            key += tokens[i + static_cast<std::size_t>(j)];
        }
        ++counts[key];
    }
    return counts;
}

}  // namespace

std::pair<double, MetricBreakdown> bleu(const Tokens& candidate, const Tokens& reference,
                                        int max_n) {
    if (reference.empty()) throw ValidationError("bleu: reference must be non-empty");
    if (max_n < 1) throw ValidationError("bleu: max_n must be at least 1");

    MetricBreakdown breakdown;
    breakdown.clipped_precisions.assign(static_cast<std::size_t>(max_n), 0.0);
    if (candidate.empty()) return {0.0, breakdown};

    double log_sum = 0.0;
    for (int n = 1; n <= max_n; ++n) {
        const auto cand_counts = ngram_counts(candidate, n);
        const auto ref_counts = ngram_counts(reference, n);
        long long clipped = 0, total = 0;
        for (const auto& [gram, count] : cand_counts) {
            total += count;
            const auto it = ref_counts.find(gram);
            if (it != ref_counts.end()) clipped += std::min(count, it->second);
        }
        const double precision =
            total > 0 ? static_cast<double>(clipped) / static_cast<double>(total) : 0.0;
        breakdown.clipped_precisions[static_cast<std::size_t>(n - 1)] = precision;
        log_sum += std::log(precision > 0.0 ? precision : kEpsilon);
    }

    const double c = static_cast<double>(candidate.size());
    const double r = static_cast<double>(reference.size());
    breakdown.brevity_penalty = c < r ? std::exp(1.0 - r / c) : 1.0;
    const double geomean = std::exp(log_sum / static_cast<double>(max_n));
    return {100.0 * breakdown.brevity_penalty * geomean, breakdown};
}

namespace {

// Longest common block of unmatched positions; ties broken by the earliest
// candidate position, then the earliest reference position.
struct Block {
    std::size_t cand = 0;
    std::size_t ref = 0;
    std::size_t len = 0;
};

Block longest_unmatched_block(const Tokens& cand, const Tokens& ref,
                              const std::vector<bool>& cand_used,
                              const std::vector<bool>& ref_used) {
    Block best;
    const std::size_t n = cand.size(), m = ref.size();
    std::vector<std::size_t> prev(m + 1, 0), cur(m + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t j = 1; j <= m; ++j) {
            if (!cand_used[i - 1] && !ref_used[j - 1] && cand[i - 1] == ref[j - 1])
                cur[j] = prev[j - 1] + 1;
            else
                cur[j] = 0;
            if (cur[j] > best.len) {
                best.len = cur[j];
                best.cand = i - cur[j];
                best.ref = j - cur[j];
            }
        }
        std::swap(prev, cur);
    }
    return best;
}

}  // namespace

std::pair<double, MetricBreakdown> meteor(const Tokens& candidate, const Tokens& reference) {
    if (reference.empty()) throw ValidationError("meteor: reference must be non-empty");

    MetricBreakdown breakdown;
    if (candidate.empty()) return {0.0, breakdown};

    std::vector<bool> cand_used(candidate.size(), false), ref_used(reference.size(), false);
    std::size_t matches = 0, chunks = 0;
    for (;;) {
        const Block block = longest_unmatched_block(candidate, reference, cand_used, ref_used);
        if (block.len == 0) break;
        for (std::size_t k = 0; k < block.len; ++k) {
            cand_used[block.cand + k] = true;
            ref_used[block.ref + k] = true;
        }
        matches += block.len;
        ++chunks;
    }

    breakdown.meteor_matches = matches;
    breakdown.meteor_chunks = chunks;
    if (matches == 0) return {0.0, breakdown};

    const double m = static_cast<double>(matches);
    const double precision = m / static_cast<double>(candidate.size());
    const double recall = m / static_cast<double>(reference.size());
    const double f_mean = 10.0 * precision * recall / (recall + 9.0 * precision);
    const double frag = static_cast<double>(chunks) / m;
    const double penalty = 0.5 * frag * frag * frag;
    return {100.0 * f_mean * (1.0 - penalty), breakdown};
}

std::pair<double, MetricBreakdown> rouge_l(const Tokens& candidate, const Tokens& reference) {
    if (reference.empty()) throw ValidationError("rouge_l: reference must be non-empty");

    MetricBreakdown breakdown;
    if (candidate.empty()) return {0.0, breakdown};

    const std::size_t n = candidate.size(), m = reference.size();
    std::vector<std::size_t> prev(m + 1, 0), cur(m + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t j = 1; j <= m; ++j) {
            if (candidate[i - 1] == reference[j - 1])
                cur[j] = prev[j - 1] + 1;
            else
                cur[j] = std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    const std::size_t lcs = prev[m];
    breakdown.lcs_length = lcs;
    if (lcs == 0) return {0.0, breakdown};

    const double p = static_cast<double>(lcs) / static_cast<double>(n);
    const double r = static_cast<double>(lcs) / static_cast<double>(m);
    return {100.0 * 2.0 * p * r / (p + r), breakdown};
}

BertScore bert_score(const Tokens& candidate, const Tokens& reference,
                     const EmbeddingProvider& embedder) {
    if (reference.empty()) throw ValidationError("bert_score: reference must be non-empty");
    if (candidate.empty()) return {};

    const Eigen::MatrixXd cand_vecs = embedder.embed(candidate);
    const Eigen::MatrixXd ref_vecs = embedder.embed(reference);
    const Eigen::MatrixXd sim = cand_vecs * ref_vecs.transpose();

    // cosines of unit vectors live in [-1,1]; clamp away fp dust outside it
    const double p_raw = std::clamp(sim.rowwise().maxCoeff().mean(), 0.0, 1.0);
    const double r_raw = std::clamp(sim.colwise().maxCoeff().mean(), 0.0, 1.0);
    BertScore score;
    score.p = 100.0 * p_raw;
    score.r = 100.0 * r_raw;
    if (score.p + score.r > 0.0) score.f = 2.0 * score.p * score.r / (score.p + score.r);
    return score;
}

SimilarityScores corpus_scores(const std::vector<std::pair<Document, Document>>& pairs,
                               const EmbeddingProvider& embedder, const TextPipeline& pipeline) {
    if (pairs.empty()) throw ValidationError("corpus_scores: no pairs given");

    SimilarityScores sums;
    for (const auto& [cand_doc, ref_doc] : pairs) {
        const Tokens cand = pipeline.run(cand_doc.text);
        const Tokens ref = pipeline.run(ref_doc.text);
        sums.bleu += bleu(cand, ref).first;
        sums.meteor += meteor(cand, ref).first;
        sums.rouge_l += rouge_l(cand, ref).first;
        const BertScore bs = bert_score(cand, ref, embedder);
        sums.bertscore_p += bs.p;
        sums.bertscore_r += bs.r;
        sums.bertscore_f += bs.f;
    }
    const double n = static_cast<double>(pairs.size());
    return {sums.bleu / n,        sums.meteor / n,      sums.rouge_l / n,
            sums.bertscore_p / n, sums.bertscore_r / n, sums.bertscore_f / n};
}

}  // namespace mgtkit
