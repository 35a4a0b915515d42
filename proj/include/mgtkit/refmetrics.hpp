#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "mgtkit/corpus.hpp"
#include "mgtkit/stylometry.hpp"

namespace mgtkit {

using Tokens = std::vector<std::string>;

/// Maps a token sequence to one unit-norm vector per token (rows), with a
/// fixed dimension, deterministically.
class EmbeddingProvider {
  public:
    virtual ~EmbeddingProvider() = default;
    virtual int dimension() const = 0;
    virtual Eigen::MatrixXd embed(const Tokens& tokens) const = 0;
};

/// All scores are on the 0-100 scale.
struct SimilarityScores {
    double bleu = 0.0;
    double meteor = 0.0;
    double rouge_l = 0.0;
    double bertscore_p = 0.0;
    double bertscore_r = 0.0;
    double bertscore_f = 0.0;
};

struct MetricBreakdown {
    std::vector<double> clipped_precisions;  // per n, unsmoothed
    double brevity_penalty = 1.0;
    std::size_t lcs_length = 0;
    std::size_t meteor_matches = 0;
    std::size_t meteor_chunks = 0;
};

/// Clipped n-gram precision BLEU with an add-epsilon geometric mean
/// (epsilon on zero counts) and the standard brevity penalty.
std::pair<double, MetricBreakdown> bleu(const Tokens& candidate, const Tokens& reference,
                                        int max_n = 4);

/// Exact-match unigram METEOR with the original constants: F_mean =
/// 10PR/(R+9P), penalty = 0.5*(chunks/matches)^3. The alignment greedily
/// matches the longest common blocks first to minimize the chunk count.
std::pair<double, MetricBreakdown> meteor(const Tokens& candidate, const Tokens& reference);

/// LCS-based F1 (beta = 1).
std::pair<double, MetricBreakdown> rouge_l(const Tokens& candidate, const Tokens& reference);

struct BertScore {
    double p = 0.0;
    double r = 0.0;
    double f = 0.0;
};

/// Greedy max-cosine matching in both directions, no idf weighting, no
/// baseline rescaling. Negative cosine maxima clamp to zero so scores stay
/// in [0, 100].
BertScore bert_score(const Tokens& candidate, const Tokens& reference,
                     const EmbeddingProvider& embedder);

/// Arithmetic mean of per-pair scores; both sides preprocessed with the
/// same pipeline.
SimilarityScores corpus_scores(const std::vector<std::pair<Document, Document>>& pairs,
                               const EmbeddingProvider& embedder, const TextPipeline& pipeline);

}  // namespace mgtkit
