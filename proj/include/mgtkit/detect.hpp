#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mgtkit/corpus.hpp"
#include "mgtkit/stylometry.hpp"

namespace mgtkit {

/// Hashing and reference-table parameters, without the fitted table.
struct FeatureConfig {
    std::string version = "fs1";
    int hashed_dims = 1 << 15;
    int char_ngram_n = 3;
    int top_band_k = 10;
};

void validate(const FeatureConfig& config);

struct FeatureSpec {
    FeatureConfig config;
    TokenFrequencyTable reference_table;  // fit on the training human corpus
};

/// Builds the reference frequency table from a human training corpus with
/// the same tokenizer the features use (no stopword removal).
FeatureSpec fit_feature_spec(const FeatureConfig& config, const Corpus& human_train);

inline constexpr int kDenseFeatures = 7;

/// Dense block: word count, mean word length, type-token ratio, hapax
/// ratio, punctuation per token, top-band usage fraction, own rank-curve
/// log-log slope. Sparse block: L2-normalized hashed character n-gram term
/// frequencies.
struct FeatureVector {
    Eigen::Matrix<double, kDenseFeatures, 1> dense;
    std::vector<std::pair<int, double>> sparse;  // (column in [0, hashed_dims), value)

    int total_dims(const FeatureConfig& config) const {
        return kDenseFeatures + config.hashed_dims;
    }
};

FeatureVector extract_features(const Document& doc, const FeatureSpec& spec);

struct TrainConfig {
    int batch_size = 64;
    int evals_per_epoch = 4;
    int patience = 3;  // consecutive evaluations without improvement
    double learning_rate = 1.0;
    int max_epochs = 20;
    std::uint64_t seed = 0;
    double l2_penalty = 1e-4;
};

void validate(const TrainConfig& config);

struct TrainMetadata {
    std::uint64_t seed = 0;
    int epochs_run = 0;
    int evaluations_run = 0;
    double best_val_macro_f1 = 0.0;
};

struct DetectorModel {
    std::vector<std::string> labels;  // sorted; row order of the weight matrix
    Eigen::MatrixXd weights;          // K x (D+1); last column is the bias
    std::string feature_spec_version;
    TrainMetadata metadata;
};

/// Test seams: metric_override rewrites the validation metric seen by the
/// early-stopping logic; on_evaluation observes every evaluation.
struct TrainHooks {
    std::function<double(int eval_index, double macro_f1)> metric_override;
    std::function<void(int epoch, int eval_index, double metric)> on_evaluation;
};

/// Multinomial logistic regression by mini-batch gradient descent with
/// per-coordinate (squared-gradient) step scaling. Evaluates macro-F1 on
/// the validation corpus evals_per_epoch times per epoch and returns the
/// weights of the best evaluation. Bit-deterministic for fixed inputs and
/// seed.
DetectorModel train(const Corpus& train_set, const Corpus& val_set, const FeatureSpec& spec,
                    const TrainConfig& config, const TrainHooks& hooks = {});

struct Prediction {
    std::string label;
    std::map<std::string, double> probabilities;
};

Prediction predict(const DetectorModel& model, const Document& doc, const FeatureSpec& spec);

/// Mean cross-entropy plus (l2/2)*||W||^2 (bias excluded), and its
/// gradient. Exposed so the analytic gradient can be checked against
/// finite differences.
std::pair<double, Eigen::MatrixXd> softmax_loss_grad(const Eigen::MatrixXd& weights,
                                                     const std::vector<FeatureVector>& features,
                                                     const std::vector<int>& label_indices,
                                                     const std::vector<int>& batch,
                                                     const FeatureConfig& config,
                                                     double l2_penalty);

/// Versioned text serialization; loading refuses a version mismatch.
void save_model(const DetectorModel& model, const std::string& path);
DetectorModel load_model(const std::string& path);

/// The fitted spec (config plus reference table) persists next to the model
/// so saved detectors can score new documents.
void save_feature_spec(const FeatureSpec& spec, const std::string& path);
FeatureSpec load_feature_spec(const std::string& path);

struct ScorerConfig {
    std::string endpoint;  // e.g. "http://localhost:9090"
    std::string path = "/score";
    int timeout_ms = 10000;
};

/// Remote transformer-backed scorer. Request: {"text": ...}; response: a
/// {label: probability} object summing to 1 within 1e-6.
std::map<std::string, double> external_score(const ScorerConfig& config, const Document& doc);

}  // namespace mgtkit
