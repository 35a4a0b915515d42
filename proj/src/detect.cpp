#include "mgtkit/detect.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

#include <httplib.h>
#include <json.hpp>

#include "mgtkit/errors.hpp"
#include "mgtkit/unicode.hpp"

namespace mgtkit {

void validate(const FeatureConfig& config) {
    if (config.hashed_dims < 2) throw ValidationError("hashed_dims must be at least 2");
    if (config.char_ngram_n < 1) throw ValidationError("char_ngram_n must be at least 1");
    if (config.top_band_k < 1) throw ValidationError("top_band_k must be at least 1");
    if (config.version.empty()) throw ValidationError("feature spec version must be set");
}

FeatureSpec fit_feature_spec(const FeatureConfig& config, const Corpus& human_train) {
    validate(config);
    FeatureSpec spec;
    spec.config = config;
    spec.reference_table = frequency_table(human_train, TextPipeline::plain());
    if (spec.reference_table.entries.empty())
        throw ValidationError("reference frequency table is empty");
    return spec;
}

FeatureVector extract_features(const Document& doc, const FeatureSpec& spec) {
    validate(spec.config);
    if (spec.reference_table.entries.empty())
        throw ValidationError("feature spec has an empty reference table");

    const std::string norm = normalize(doc.text);
    const std::vector<std::string> tokens = tokenize(norm);
    if (tokens.empty())
        throw ValidationError("cannot extract features from empty text (doc '" + doc.id + "')");

    const double n_tokens = static_cast<double>(tokens.size());

    TokenFrequencyTable own;
    double total_token_cps = 0.0;
    for (const auto& token : tokens) {
        own.add(token);
        total_token_cps += static_cast<double>(decode_utf8(token).size());
    }
    const double n_types = static_cast<double>(own.entries.size());
    double hapax_tokens = 0.0;
    for (const auto& [_, count] : own.entries)
        if (count == 1) hapax_tokens += 1.0;

    double punct_cps = 0.0;
    for (char32_t cp : decode_utf8(norm))
        if (is_punct(cp)) punct_cps += 1.0;

    const auto band = top_k(spec.reference_table,
                            static_cast<std::size_t>(spec.config.top_band_k));
    std::set<std::string> band_tokens;
    for (const auto& [token, _] : band) band_tokens.insert(token);
    double band_hits = 0.0;
    for (const auto& token : tokens)
        if (band_tokens.count(token)) band_hits += 1.0;

    double own_slope = 0.0;
    if (own.entries.size() >= 2)
        own_slope = fit_loglog_slope(rank_frequency_curve(own, 100)).first;

    FeatureVector features;
    features.dense[0] = static_cast<double>(doc.word_count);
    features.dense[1] = total_token_cps / n_tokens;
    features.dense[2] = n_types / n_tokens;
    features.dense[3] = hapax_tokens / n_tokens;
    features.dense[4] = punct_cps / n_tokens;
    features.dense[5] = band_hits / n_tokens;
    features.dense[6] = own_slope;

    // hashed character n-gram term frequencies over the normalized text
    const std::u32string cps = decode_utf8(norm);
    const int n = spec.config.char_ngram_n;
    std::unordered_map<int, double> counts;
    if (static_cast<int>(cps.size()) >= n) {
        for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= cps.size(); ++i) {
            const std::string gram =
                encode_utf8(std::u32string_view(cps).substr(i, static_cast<std::size_t>(n)));
            const int col = static_cast<int>(fnv1a64(gram) %
                                             static_cast<std::uint64_t>(spec.config.hashed_dims));
            counts[col] += 1.0;
        }
    }
    features.sparse.assign(counts.begin(), counts.end());
    std::sort(features.sparse.begin(), features.sparse.end());
    double norm_sq = 0.0;
    for (const auto& [_, v] : features.sparse) norm_sq += v * v;
    if (norm_sq > 0.0) {
        const double inv = 1.0 / std::sqrt(norm_sq);
        for (auto& [_, v] : features.sparse) v *= inv;
    }
    return features;
}

void validate(const TrainConfig& config) {
    if (config.batch_size < 1) throw ValidationError("batch_size must be at least 1");
    if (config.evals_per_epoch < 1) throw ValidationError("evals_per_epoch must be at least 1");
    if (config.patience < 1) throw ValidationError("patience must be at least 1");
    if (config.max_epochs < 0) throw ValidationError("max_epochs must be non-negative");
    if (config.learning_rate <= 0.0) throw ValidationError("learning_rate must be positive");
    if (config.l2_penalty < 0.0) throw ValidationError("l2_penalty must be non-negative");
}

namespace {

Eigen::VectorXd logits_for(const Eigen::MatrixXd& weights, const FeatureVector& features) {
    Eigen::VectorXd z = weights.col(weights.cols() - 1);
    z += weights.leftCols(kDenseFeatures) * features.dense;
    for (const auto& [col, v] : features.sparse) z += weights.col(kDenseFeatures + col) * v;
    return z;
}

Eigen::VectorXd softmax(Eigen::VectorXd z) {
    const double m = z.maxCoeff();
    z = (z.array() - m).exp();
    return z / z.sum();
}

int argmax_index(const Eigen::VectorXd& probs) {
    // first maximum wins; labels are sorted, so ties break by codepoint order
    int best = 0;
    for (int i = 1; i < probs.size(); ++i)
        if (probs[i] > probs[best]) best = i;
    return best;
}

double macro_f1(const Eigen::MatrixXd& weights, const std::vector<FeatureVector>& features,
                const std::vector<int>& labels, int k) {
    std::vector<long long> tp(k, 0), fp(k, 0), fn(k, 0);
    for (std::size_t i = 0; i < features.size(); ++i) {
        const int pred = argmax_index(softmax(logits_for(weights, features[i])));
        const int gold = labels[i];
        if (pred == gold) {
            ++tp[gold];
        } else {
            ++fp[pred];
            ++fn[gold];
        }
    }
    double sum = 0.0;
    for (int c = 0; c < k; ++c) {
        const double denom = static_cast<double>(2 * tp[c] + fp[c] + fn[c]);
        sum += denom > 0.0 ? 2.0 * static_cast<double>(tp[c]) / denom : 0.0;
    }
    return sum / static_cast<double>(k);
}

std::vector<std::string> sorted_labels(const Corpus& corpus) {
    std::set<std::string> labels;
    for (const auto& doc : corpus.documents) labels.insert(doc.label.to_string());
    return {labels.begin(), labels.end()};
}

}  // namespace

std::pair<double, Eigen::MatrixXd> softmax_loss_grad(const Eigen::MatrixXd& weights,
                                                     const std::vector<FeatureVector>& features,
                                                     const std::vector<int>& label_indices,
                                                     const std::vector<int>& batch,
                                                     const FeatureConfig& config,
                                                     double l2_penalty) {
    const Eigen::Index k = weights.rows();
    const Eigen::Index cols = weights.cols();
    const Eigen::Index bias_col = cols - 1;
    Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(k, cols);
    double loss = 0.0;

    for (const int idx : batch) {
        const FeatureVector& x = features[static_cast<std::size_t>(idx)];
        const Eigen::VectorXd z = logits_for(weights, x);
        const double zmax = z.maxCoeff();
        const Eigen::VectorXd ez = (z.array() - zmax).exp();
        const double sum = ez.sum();
        const int y = label_indices[static_cast<std::size_t>(idx)];
        loss += -(z[y] - zmax - std::log(sum));

        Eigen::VectorXd delta = ez / sum;
        delta[y] -= 1.0;
        grad.col(bias_col) += delta;
        grad.leftCols(kDenseFeatures) += delta * x.dense.transpose();
        for (const auto& [col, v] : x.sparse) grad.col(kDenseFeatures + col) += delta * v;
    }

    const double b = static_cast<double>(batch.size());
    loss /= b;
    grad /= b;
    loss += 0.5 * l2_penalty * weights.leftCols(bias_col).squaredNorm();
    grad.leftCols(bias_col) += l2_penalty * weights.leftCols(bias_col);
    (void)config;
    return {loss, grad};
}

DetectorModel train(const Corpus& train_set, const Corpus& val_set, const FeatureSpec& spec,
                    const TrainConfig& config, const TrainHooks& hooks) {
    validate(config);
    validate(spec.config);
    if (train_set.empty()) throw ValidationError("training corpus is empty");
    if (val_set.empty()) throw ValidationError("validation corpus is empty");

    const std::vector<std::string> labels = sorted_labels(train_set);
    if (labels.size() < 2)
        throw ValidationError("training corpus has a single label; need at least 2");
    if (sorted_labels(val_set) != labels)
        throw ValidationError("train and validation corpora must share the same label set");

    std::map<std::string, int> label_index;
    for (std::size_t i = 0; i < labels.size(); ++i)
        label_index[labels[i]] = static_cast<int>(i);

    const auto featurize = [&](const Corpus& corpus, std::vector<FeatureVector>& out,
                               std::vector<int>& ys) {
        out.reserve(corpus.size());
        ys.reserve(corpus.size());
        for (const auto& doc : corpus.documents) {
            out.push_back(extract_features(doc, spec));
            ys.push_back(label_index.at(doc.label.to_string()));
        }
    };
    std::vector<FeatureVector> train_x, val_x;
    std::vector<int> train_y, val_y;
    featurize(train_set, train_x, train_y);
    featurize(val_set, val_x, val_y);

    // standardize the dense block on training statistics; folded back into
    // the weights before returning so the model consumes raw features
    Eigen::Matrix<double, kDenseFeatures, 1> mu = Eigen::Matrix<double, kDenseFeatures, 1>::Zero();
    for (const auto& x : train_x) mu += x.dense;
    mu /= static_cast<double>(train_x.size());
    Eigen::Matrix<double, kDenseFeatures, 1> var = Eigen::Matrix<double, kDenseFeatures, 1>::Zero();
    for (const auto& x : train_x) var += (x.dense - mu).cwiseAbs2();
    var /= static_cast<double>(train_x.size());
    Eigen::Matrix<double, kDenseFeatures, 1> sigma = var.cwiseSqrt();
    for (int j = 0; j < kDenseFeatures; ++j)
        if (sigma[j] < 1e-12) sigma[j] = 1.0;
    for (auto& x : train_x) x.dense = (x.dense - mu).cwiseQuotient(sigma);
    for (auto& x : val_x) x.dense = (x.dense - mu).cwiseQuotient(sigma);

    const int k = static_cast<int>(labels.size());
    const int cols = kDenseFeatures + spec.config.hashed_dims + 1;
    Eigen::MatrixXd weights = Eigen::MatrixXd::Zero(k, cols);
    Eigen::MatrixXd best_weights = weights;
    // per-coordinate squared-gradient accumulator: sparse n-gram columns see
    // far smaller raw gradients than the dense block, and a single global
    // step size cannot serve both within the early-stopping budget
    Eigen::MatrixXd grad_accum = Eigen::MatrixXd::Zero(k, cols);

    const int n_train = static_cast<int>(train_x.size());
    const int batches_per_epoch = (n_train + config.batch_size - 1) / config.batch_size;
    const int eval_interval =
        std::max(1, (batches_per_epoch + config.evals_per_epoch - 1) / config.evals_per_epoch);

    std::mt19937_64 rng(config.seed);
    std::vector<int> order(static_cast<std::size_t>(n_train));
    for (int i = 0; i < n_train; ++i) order[static_cast<std::size_t>(i)] = i;

    TrainMetadata metadata;
    metadata.seed = config.seed;
    double best_metric = -1.0;
    int fails = 0;
    bool stop = false;

    for (int epoch = 1; epoch <= config.max_epochs && !stop; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(rng() % i);
            std::swap(order[i - 1], order[j]);
        }
        for (int b = 1; b <= batches_per_epoch && !stop; ++b) {
            const int lo = (b - 1) * config.batch_size;
            const int hi = std::min(n_train, lo + config.batch_size);
            const std::vector<int> batch(order.begin() + lo, order.begin() + hi);

            const auto [loss, grad] = softmax_loss_grad(weights, train_x, train_y, batch,
                                                        spec.config, config.l2_penalty);
            (void)loss;
            grad_accum += grad.cwiseAbs2();
            weights -= config.learning_rate *
                       grad.cwiseQuotient((grad_accum.array() + 1e-8).sqrt().matrix());

            if (b % eval_interval == 0 || b == batches_per_epoch) {
                ++metadata.evaluations_run;
                double metric = macro_f1(weights, val_x, val_y, k);
                if (hooks.metric_override)
                    metric = hooks.metric_override(metadata.evaluations_run, metric);
                if (hooks.on_evaluation)
                    hooks.on_evaluation(epoch, metadata.evaluations_run, metric);
                if (metric > best_metric) {
                    best_metric = metric;
                    best_weights = weights;
                    fails = 0;
                } else if (++fails >= config.patience) {
                    stop = true;
                }
            }
        }
        metadata.epochs_run = epoch;
    }
    metadata.best_val_macro_f1 = std::max(0.0, best_metric);

    // fold standardization into the weights: w'/sigma on dense columns,
    // bias absorbs -sum(w * mu / sigma)
    for (int j = 0; j < kDenseFeatures; ++j) {
        best_weights.col(cols - 1) -= best_weights.col(j) * (mu[j] / sigma[j]);
        best_weights.col(j) /= sigma[j];
    }

    DetectorModel model;
    model.labels = labels;
    model.weights = std::move(best_weights);
    model.feature_spec_version = spec.config.version;
    model.metadata = metadata;
    return model;
}

Prediction predict(const DetectorModel& model, const Document& doc, const FeatureSpec& spec) {
    if (spec.config.version != model.feature_spec_version)
        throw ValidationError("feature spec version '" + spec.config.version +
                              "' does not match model version '" + model.feature_spec_version +
                              "'");
    const FeatureVector features = extract_features(doc, spec);
    if (kDenseFeatures + spec.config.hashed_dims + 1 != model.weights.cols())
        throw ValidationError("feature dimensions do not match the model weight matrix");

    const Eigen::VectorXd probs = softmax(logits_for(model.weights, features));
    Prediction prediction;
    for (std::size_t i = 0; i < model.labels.size(); ++i)
        prediction.probabilities[model.labels[i]] = probs[static_cast<Eigen::Index>(i)];
    prediction.label = model.labels[static_cast<std::size_t>(argmax_index(probs))];
    return prediction;
}

namespace {

constexpr int kModelFormatVersion = 1;

}  // namespace

void save_model(const DetectorModel& model, const std::string& path) {
    nlohmann::ordered_json doc;
    doc["format"] = "mgtkit-detector";
    doc["format_version"] = kModelFormatVersion;
    doc["feature_spec_version"] = model.feature_spec_version;
    doc["labels"] = model.labels;
    doc["rows"] = model.weights.rows();
    doc["cols"] = model.weights.cols();
    auto flat = nlohmann::json::array();
    for (Eigen::Index r = 0; r < model.weights.rows(); ++r)
        for (Eigen::Index c = 0; c < model.weights.cols(); ++c)
            flat.push_back(model.weights(r, c));
    doc["weights"] = std::move(flat);
    doc["metadata"] = {{"seed", model.metadata.seed},
                       {"epochs_run", model.metadata.epochs_run},
                       {"evaluations_run", model.metadata.evaluations_run},
                       {"best_val_macro_f1", model.metadata.best_val_macro_f1}};

    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write model file: " + path);
    out << doc.dump() << '\n';
    if (!out) throw Error("write failed: " + path);
}

DetectorModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open model file: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("invalid model file: ") + e.what());
    }
    if (!doc.contains("format") || doc["format"] != "mgtkit-detector")
        throw ParseError("not a detector model file: " + path);
    if (!doc.contains("format_version") || doc["format_version"].get<int>() != kModelFormatVersion)
        throw Error("unsupported model format version in " + path);

    DetectorModel model;
    model.feature_spec_version = doc["feature_spec_version"].get<std::string>();
    model.labels = doc["labels"].get<std::vector<std::string>>();
    const Eigen::Index rows = doc["rows"].get<Eigen::Index>();
    const Eigen::Index cols = doc["cols"].get<Eigen::Index>();
    const auto& flat = doc["weights"];
    if (static_cast<Eigen::Index>(flat.size()) != rows * cols)
        throw ParseError("weight matrix size mismatch in " + path);
    model.weights.resize(rows, cols);
    std::size_t i = 0;
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) model.weights(r, c) = flat[i++].get<double>();
    const auto& meta = doc["metadata"];
    model.metadata.seed = meta["seed"].get<std::uint64_t>();
    model.metadata.epochs_run = meta["epochs_run"].get<int>();
    model.metadata.evaluations_run = meta["evaluations_run"].get<int>();
    model.metadata.best_val_macro_f1 = meta["best_val_macro_f1"].get<double>();
    return model;
}

void save_feature_spec(const FeatureSpec& spec, const std::string& path) {
    nlohmann::ordered_json doc;
    doc["format"] = "mgtkit-feature-spec";
    doc["format_version"] = kModelFormatVersion;
    doc["version"] = spec.config.version;
    doc["hashed_dims"] = spec.config.hashed_dims;
    doc["char_ngram_n"] = spec.config.char_ngram_n;
    doc["top_band_k"] = spec.config.top_band_k;
    auto entries = nlohmann::ordered_json::object();
    for (const auto& [token, count] : spec.reference_table.entries) entries[token] = count;
    doc["reference_table"] = std::move(entries);

    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write feature spec: " + path);
    out << doc.dump() << '\n';
}

FeatureSpec load_feature_spec(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open feature spec: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("invalid feature spec file: ") + e.what());
    }
    if (!doc.contains("format") || doc["format"] != "mgtkit-feature-spec")
        throw ParseError("not a feature spec file: " + path);
    if (doc["format_version"].get<int>() != kModelFormatVersion)
        throw Error("unsupported feature spec format version in " + path);

    FeatureSpec spec;
    spec.config.version = doc["version"].get<std::string>();
    spec.config.hashed_dims = doc["hashed_dims"].get<int>();
    spec.config.char_ngram_n = doc["char_ngram_n"].get<int>();
    spec.config.top_band_k = doc["top_band_k"].get<int>();
    for (const auto& [token, count] : doc["reference_table"].items())
        spec.reference_table.add(token, count.get<long long>());
    validate(spec.config);
    return spec;
}

std::map<std::string, double> external_score(const ScorerConfig& config, const Document& doc) {
    httplib::Client client(config.endpoint);
    client.set_connection_timeout(config.timeout_ms / 1000, (config.timeout_ms % 1000) * 1000);
    client.set_read_timeout(config.timeout_ms / 1000, (config.timeout_ms % 1000) * 1000);

    nlohmann::json request;
    request["text"] = doc.text;
    const auto res = client.Post(config.path, request.dump(), "application/json");
    if (!res) throw NetworkError("scorer endpoint unreachable: " + config.endpoint);
    if (res->status != 200)
        throw NetworkError("scorer endpoint returned status " + std::to_string(res->status));

    nlohmann::json body;
    try {
        body = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
        throw ShapeError(std::string("scorer response is not JSON: ") + e.what());
    }
    if (!body.is_object() || body.empty())
        throw ShapeError("scorer response must be a non-empty {label: probability} object");

    std::map<std::string, double> scores;
    double sum = 0.0;
    for (const auto& [label, value] : body.items()) {
        if (!value.is_number())
            throw ShapeError("scorer probability for '" + label + "' is not a number");
        const double p = value.get<double>();
        if (!std::isfinite(p) || p < 0.0)
            throw ShapeError("scorer probability for '" + label + "' is invalid");
        scores[label] = p;
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-6)
        throw ShapeError("scorer probabilities sum to " + std::to_string(sum) + ", expected 1");
    return scores;
}

}  // namespace mgtkit
