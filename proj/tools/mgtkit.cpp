#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mgtkit/artext.hpp"
#include "mgtkit/corpus.hpp"
#include "mgtkit/detect.hpp"
#include "mgtkit/embedding.hpp"
#include "mgtkit/errors.hpp"
#include "mgtkit/evalkit.hpp"
#include "mgtkit/genharness.hpp"
#include "mgtkit/refmetrics.hpp"
#include "mgtkit/stylometry.hpp"
#include "mgtkit/svg.hpp"
#include "mgtkit/unicode.hpp"
#include "mgtkit/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

json g_config;  // parsed --config file, empty object when absent

json config_section(const std::string& name) {
    if (g_config.contains(name) && g_config[name].is_object()) return g_config[name];
    return json::object();
}

template <typename T>
T section_get(const json& section, const std::string& key, T fallback) {
    if (section.contains(key)) return section[key].get<T>();
    return fallback;
}

void load_config_file(const std::string& path) {
    if (path.empty()) return;
    std::ifstream in(path);
    if (!in) throw mgtkit::Error("cannot open config file: " + path);
    try {
        in >> g_config;
    } catch (const json::exception& e) {
        throw mgtkit::Error(std::string("invalid config file: ") + e.what());
    }
}

mgtkit::SplitSpec split_spec_from_config(std::uint64_t seed_override, bool seed_set) {
    const json section = config_section("split");
    mgtkit::SplitSpec spec;
    spec.train_fraction = section_get(section, "train", spec.train_fraction);
    spec.val_fraction = section_get(section, "val", spec.val_fraction);
    spec.test_fraction = section_get(section, "test", spec.test_fraction);
    spec.seed = section_get<std::uint64_t>(section, "seed", spec.seed);
    if (seed_set) spec.seed = seed_override;
    mgtkit::validate(spec);
    return spec;
}

mgtkit::FeatureConfig feature_config_from_config() {
    const json section = config_section("features");
    mgtkit::FeatureConfig config;
    config.version = section_get<std::string>(section, "version", config.version);
    config.hashed_dims = section_get(section, "hashed_dims", config.hashed_dims);
    config.char_ngram_n = section_get(section, "char_ngram_n", config.char_ngram_n);
    config.top_band_k = section_get(section, "top_band_k", config.top_band_k);
    mgtkit::validate(config);
    return config;
}

mgtkit::TrainConfig train_config_from_config(std::uint64_t seed_override, bool seed_set) {
    const json section = config_section("train");
    mgtkit::TrainConfig config;
    config.batch_size = section_get(section, "batch_size", config.batch_size);
    config.evals_per_epoch = section_get(section, "evals_per_epoch", config.evals_per_epoch);
    config.patience = section_get(section, "patience", config.patience);
    config.learning_rate = section_get(section, "learning_rate", config.learning_rate);
    config.max_epochs = section_get(section, "max_epochs", config.max_epochs);
    config.seed = section_get<std::uint64_t>(section, "seed", config.seed);
    config.l2_penalty = section_get(section, "l2_penalty", config.l2_penalty);
    if (seed_set) config.seed = seed_override;
    mgtkit::validate(config);
    return config;
}

/// "default" -> bundled list, "none" -> no stopword removal, else a path.
std::set<std::string> resolve_stoplist(const std::string& value) {
    if (value == "none") return {};
    if (value.empty() || value == "default") return mgtkit::default_stopwords();
    return mgtkit::load_stopwords(value);
}

mgtkit::TextPipeline pipeline_from_config(const std::string& stopwords_flag) {
    const json section = config_section("preprocess");
    mgtkit::TextPipeline pipeline;
    pipeline.normalize_opts.strip_tatweel =
        section_get(section, "strip_tatweel", pipeline.normalize_opts.strip_tatweel);
    pipeline.normalize_opts.cap_punct_repeat =
        section_get(section, "cap_punct_repeat", pipeline.normalize_opts.cap_punct_repeat);
    pipeline.normalize_opts.strip_nonprintable =
        section_get(section, "strip_nonprintable", pipeline.normalize_opts.strip_nonprintable);
    pipeline.normalize_opts.collapse_whitespace =
        section_get(section, "collapse_whitespace", pipeline.normalize_opts.collapse_whitespace);
    std::string stopwords = stopwords_flag;
    if (stopwords.empty())
        stopwords = section_get<std::string>(section, "stopwords", "default");
    pipeline.stoplist = resolve_stoplist(stopwords);
    return pipeline;
}

std::map<std::string, std::string> parse_named_files(const std::vector<std::string>& entries,
                                                     const char* flag) {
    std::map<std::string, std::string> out;
    for (const auto& entry : entries) {
        const auto eq = entry.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == entry.size())
            throw mgtkit::ValidationError(std::string(flag) +
                                          " expects name=path, got '" + entry + "'");
        if (!out.emplace(entry.substr(0, eq), entry.substr(eq + 1)).second)
            throw mgtkit::ValidationError(std::string(flag) + ": duplicate name '" +
                                          entry.substr(0, eq) + "'");
    }
    return out;
}

fs::path ensure_out_dir(const std::string& out) {
    fs::path dir(out);
    fs::create_directories(dir);
    return dir;
}

/// Every run that writes files records how to reproduce itself.
void write_manifest(const fs::path& dir, const std::string& command,
                    const ordered_json& options) {
    ordered_json manifest;
    manifest["tool"] = "mgtkit";
    manifest["version"] = mgtkit::kVersion;
    manifest["command"] = command;
    manifest["options"] = options;
    const std::string canonical = manifest.dump();
    char hash[32];
    std::snprintf(hash, sizeof(hash), "%016llx",
                  static_cast<unsigned long long>(mgtkit::fnv1a64(canonical)));
    manifest["config_hash"] = hash;
    mgtkit::write_text_file((dir / "manifest.json").string(), manifest.dump(2) + "\n");
}

mgtkit::Domain parse_domain(const std::string& value) {
    return mgtkit::domain_from_string(value);
}

// ---------------------------------------------------------------------------

struct IngestOptions {
    std::string input, domain = "abstract", out;
    bool no_dedup = false;
};

void run_ingest(const IngestOptions& opt) {
    const auto domain = parse_domain(opt.domain);
    const mgtkit::Corpus corpus = mgtkit::load_corpus(opt.input, domain);
    mgtkit::FilterOptions filter = mgtkit::FilterOptions::defaults();
    filter.deduplicate = !opt.no_dedup;
    const auto [kept, report] = mgtkit::filter_generated(corpus, domain, filter);

    const fs::path dir = ensure_out_dir(opt.out);
    mgtkit::save_corpus(kept, (dir / "filtered.jsonl").string());
    mgtkit::write_filter_report_csv(report, (dir / "filter_report.csv").string());
    write_manifest(dir, "ingest",
                   {{"input", opt.input}, {"domain", opt.domain}, {"dedup", !opt.no_dedup}});
    std::cout << "ingest: kept " << report.output_count << "/" << report.input_count
              << " (error_marker=" << report.error_marker << ", too_short=" << report.too_short
              << ", duplicates=" << report.duplicates << ")\n";
}

struct StatsOptions {
    std::string input, domain = "abstract", counter = "raw", out;
};

void run_stats(const StatsOptions& opt) {
    const auto domain = parse_domain(opt.domain);
    const mgtkit::Corpus corpus = mgtkit::load_corpus(opt.input, domain);
    const auto counter = opt.counter == "tokenized" ? mgtkit::LengthCounter::Tokenized
                                                    : mgtkit::LengthCounter::Raw;
    const mgtkit::LengthStats stats = mgtkit::length_stats(corpus, counter);
    std::cout << "n=" << stats.n << " min=" << stats.min << " max=" << stats.max
              << " avg=" << mgtkit::format_avg(stats.avg) << "\n";
    if (!opt.out.empty()) {
        const fs::path dir = ensure_out_dir(opt.out);
        std::ostringstream csv;
        csv << "n,min,max,avg\n"
            << stats.n << ',' << stats.min << ',' << stats.max << ','
            << mgtkit::format_avg(stats.avg) << '\n';
        mgtkit::write_text_file((dir / "stats.csv").string(), csv.str());
        write_manifest(dir, "stats",
                       {{"input", opt.input},
                        {"domain", opt.domain},
                        {"counter", opt.counter}});
    }
}

struct FreqOptions {
    std::string human, domain = "abstract", out, stopwords;
    std::vector<std::string> machine;
    std::size_t k = 10;
};

void run_freq(const FreqOptions& opt) {
    const auto domain = parse_domain(opt.domain);
    const auto pipeline = pipeline_from_config(opt.stopwords);
    const fs::path dir = ensure_out_dir(opt.out);

    const mgtkit::Corpus human = mgtkit::load_corpus(opt.human, domain);
    const auto human_table = mgtkit::frequency_table(human, pipeline);
    mgtkit::write_frequency_csv(human_table, (dir / "freq_human.csv").string());
    const auto human_top = mgtkit::top_k(human_table, opt.k);

    std::ostringstream topk_csv;
    topk_csv << "source,rank,token,count\n";
    for (std::size_t i = 0; i < human_top.size(); ++i)
        topk_csv << "human," << i + 1 << ',' << human_top[i].first << ','
                 << human_top[i].second << '\n';

    std::map<std::string, std::vector<mgtkit::TokenCount>> llm_lists;
    for (const auto& [name, path] : parse_named_files(opt.machine, "--machine")) {
        const mgtkit::Corpus corpus = mgtkit::load_corpus(path, domain);
        const auto table = mgtkit::frequency_table(corpus, pipeline);
        mgtkit::write_frequency_csv(table, (dir / ("freq_" + name + ".csv")).string());
        llm_lists[name] = mgtkit::top_k(table, opt.k);
        for (std::size_t i = 0; i < llm_lists[name].size(); ++i)
            topk_csv << name << ',' << i + 1 << ',' << llm_lists[name][i].first << ','
                     << llm_lists[name][i].second << '\n';
    }
    mgtkit::write_text_file((dir / "topk.csv").string(), topk_csv.str());

    if (!llm_lists.empty()) {
        const auto overlap = mgtkit::categorize_overlap(human_top, llm_lists, opt.k);
        mgtkit::write_overlap_csv(overlap, (dir / "overlap.csv").string());
    }
    write_manifest(dir, "freq",
                   {{"human", opt.human},
                    {"machine", opt.machine},
                    {"domain", opt.domain},
                    {"k", opt.k},
                    {"stopwords", opt.stopwords.empty() ? "default" : opt.stopwords}});
    std::cout << "freq: wrote tables for " << 1 + llm_lists.size() << " source(s) to "
              << dir.string() << "\n";
}

struct ZipfOptions {
    std::vector<std::string> inputs;
    std::string domain = "abstract", out, stopwords;
    std::size_t k = 100;
};

void run_zipf(const ZipfOptions& opt) {
    const auto domain = parse_domain(opt.domain);
    const auto pipeline = pipeline_from_config(opt.stopwords);
    const fs::path dir = ensure_out_dir(opt.out);

    std::vector<mgtkit::RankFrequencyCurve> curves;
    std::ostringstream slopes;
    slopes << "source,slope,intercept\n";
    for (const auto& [name, path] : parse_named_files(opt.inputs, "--input")) {
        const mgtkit::Corpus corpus = mgtkit::load_corpus(path, domain);
        const auto table = mgtkit::frequency_table(corpus, pipeline);
        const auto curve = mgtkit::rank_frequency_curve(table, opt.k, name);
        mgtkit::write_curve_csv(curve, (dir / ("curve_" + name + ".csv")).string());
        if (curve.points.size() >= 2) {
            const auto [slope, intercept] = mgtkit::fit_loglog_slope(curve);
            slopes << name << ',' << mgtkit::format2(slope) << ','
                   << mgtkit::format2(intercept) << '\n';
            std::cout << "zipf: " << name << " slope=" << mgtkit::format2(slope) << "\n";
        }
        curves.push_back(curve);
    }
    mgtkit::write_text_file((dir / "slopes.csv").string(), slopes.str());
    mgtkit::write_curves_svg(curves, (dir / "zipf.svg").string());
    write_manifest(dir, "zipf",
                   {{"inputs", opt.inputs},
                    {"domain", opt.domain},
                    {"k", opt.k},
                    {"stopwords", opt.stopwords.empty() ? "default" : opt.stopwords}});
}

struct CompareOptions {
    std::string candidates, references, domain = "abstract", out;
    std::string pair_by = "id", embedder = "hash", embed_endpoint;
    std::string stopwords = "none";
    int embed_dim = 64;
};

void run_compare(const CompareOptions& opt) {
    const auto domain = parse_domain(opt.domain);
    const auto pipeline = pipeline_from_config(opt.stopwords);
    const mgtkit::Corpus candidates = mgtkit::load_corpus(opt.candidates, domain);
    const mgtkit::Corpus references = mgtkit::load_corpus(opt.references, domain);

    std::vector<std::pair<mgtkit::Document, mgtkit::Document>> pairs;
    if (opt.pair_by == "order") {
        if (candidates.size() != references.size())
            throw mgtkit::ValidationError("pair-by order needs equally sized corpora");
        for (std::size_t i = 0; i < candidates.size(); ++i)
            pairs.emplace_back(candidates.documents[i], references.documents[i]);
    } else if (opt.pair_by == "id") {
        // candidate ids are "<source_id>:<model>:<method>"; match on source_id
        std::map<std::string, const mgtkit::Document*> by_id;
        for (const auto& doc : references.documents) by_id[doc.id] = &doc;
        for (const auto& doc : candidates.documents) {
            const std::string source_id = doc.id.substr(0, doc.id.find(':'));
            const auto it = by_id.find(source_id);
            if (it != by_id.end()) pairs.emplace_back(doc, *it->second);
        }
        if (pairs.empty())
            throw mgtkit::ValidationError("no candidate id matched a reference id");
    } else {
        throw mgtkit::ValidationError("--pair-by must be 'order' or 'id'");
    }

    std::unique_ptr<mgtkit::EmbeddingProvider> embedder;
    if (opt.embedder == "hash") {
        embedder = std::make_unique<mgtkit::HashProjectionEmbedder>(opt.embed_dim);
    } else if (opt.embedder == "http") {
        mgtkit::EmbedderConfig config;
        config.endpoint = opt.embed_endpoint;
        embedder = std::make_unique<mgtkit::HttpEmbedder>(config, opt.embed_dim);
    } else {
        throw mgtkit::ValidationError("--embedder must be 'hash' or 'http'");
    }

    const mgtkit::SimilarityScores scores = mgtkit::corpus_scores(pairs, *embedder, pipeline);
    std::cout << "pairs=" << pairs.size() << " bleu=" << mgtkit::format2(scores.bleu)
              << " meteor=" << mgtkit::format2(scores.meteor)
              << " rouge_l=" << mgtkit::format2(scores.rouge_l)
              << " bertscore_f=" << mgtkit::format2(scores.bertscore_f) << "\n";

    const fs::path dir = ensure_out_dir(opt.out);
    std::ostringstream csv;
    csv << "metric,score\n";
    csv << "bleu," << mgtkit::format2(scores.bleu) << '\n';
    csv << "meteor," << mgtkit::format2(scores.meteor) << '\n';
    csv << "rouge_l," << mgtkit::format2(scores.rouge_l) << '\n';
    csv << "bertscore_p," << mgtkit::format2(scores.bertscore_p) << '\n';
    csv << "bertscore_r," << mgtkit::format2(scores.bertscore_r) << '\n';
    csv << "bertscore_f," << mgtkit::format2(scores.bertscore_f) << '\n';
    mgtkit::write_text_file((dir / "scores.csv").string(), csv.str());
    write_manifest(dir, "compare",
                   {{"candidates", opt.candidates},
                    {"references", opt.references},
                    {"domain", opt.domain},
                    {"pair_by", opt.pair_by},
                    {"embedder", opt.embedder},
                    {"embed_dim", opt.embed_dim},
                    {"stopwords", opt.stopwords}});
}

struct GenerateOptions {
    std::string input, domain = "abstract", strategy = "polish", model, out;
    std::string endpoint, provider_model;
    int max_retries = -1;
    int rate_limit = -1;
};

void run_generate(const GenerateOptions& opt) {
    const auto domain = parse_domain(opt.domain);
    const mgtkit::Corpus corpus = mgtkit::load_corpus(opt.input, domain);

    const json section = config_section("provider");
    mgtkit::ProviderConfig provider_config;
    provider_config.endpoint = opt.endpoint.empty()
                                   ? section_get<std::string>(section, "endpoint", "")
                                   : opt.endpoint;
    provider_config.path =
        section_get<std::string>(section, "path", provider_config.path);
    provider_config.model = opt.provider_model.empty()
                                ? section_get<std::string>(section, "model", opt.model)
                                : opt.provider_model;
    provider_config.temperature =
        section_get(section, "temperature", provider_config.temperature);
    provider_config.max_output_tokens =
        section_get(section, "max_output_tokens", provider_config.max_output_tokens);
    provider_config.max_retries = opt.max_retries >= 0
                                      ? opt.max_retries
                                      : section_get(section, "max_retries",
                                                    provider_config.max_retries);
    provider_config.requests_per_minute =
        opt.rate_limit >= 1 ? opt.rate_limit
                            : section_get(section, "requests_per_minute",
                                          provider_config.requests_per_minute);
    provider_config.timeout_ms =
        section_get(section, "timeout_ms", provider_config.timeout_ms);
    // credential comes only from the environment
    const std::string key_env =
        section_get<std::string>(section, "api_key_env", "MGTKIT_API_KEY");
    if (const char* key = std::getenv(key_env.c_str())) provider_config.credential = key;

    mgtkit::PromptStrategy strategy;
    if (opt.strategy == "title_only")
        strategy.kind = mgtkit::StrategyKind::TitleOnly;
    else if (opt.strategy == "title_content")
        strategy.kind = mgtkit::StrategyKind::TitleContent;
    else if (opt.strategy == "polish")
        strategy.kind = mgtkit::StrategyKind::Polish;
    else
        throw mgtkit::ValidationError("unknown strategy: '" + opt.strategy + "'");

    const fs::path dir = ensure_out_dir(opt.out);
    mgtkit::HttpChatProvider provider(provider_config);
    mgtkit::SystemClock clock;
    mgtkit::GenerationHarness harness(provider, provider_config, clock);

    mgtkit::Corpus accepted;
    std::ostringstream rejects;
    rejects << "source_id,reason\n";
    std::size_t rejected = 0;
    for (const auto& doc : corpus.documents) {
        const auto task = mgtkit::make_generation_task(doc, strategy, opt.model);
        const mgtkit::GenerationRecord record = harness.generate(task);
        mgtkit::append_generation_log(record, (dir / "generation_log.jsonl").string());
        const auto validation = mgtkit::validate_generation(record, domain);
        if (validation.ok()) {
            accepted.documents.push_back(*validation.accepted);
        } else {
            rejects << doc.id << ',' << validation.reject_reason << '\n';
            ++rejected;
        }
    }
    mgtkit::save_corpus(accepted, (dir / "accepted.jsonl").string());
    mgtkit::write_text_file((dir / "rejects.csv").string(), rejects.str());
    write_manifest(dir, "generate",
                   {{"input", opt.input},
                    {"domain", opt.domain},
                    {"strategy", opt.strategy},
                    {"model", opt.model},
                    {"endpoint", provider_config.endpoint},
                    {"temperature", provider_config.temperature},
                    {"max_retries", provider_config.max_retries},
                    {"requests_per_minute", provider_config.requests_per_minute}});
    std::cout << "generate: accepted " << accepted.size() << ", rejected " << rejected << "\n";
}

struct TrainOptions {
    std::string human, domain = "abstract", out;
    std::vector<std::string> machine;
    bool multiclass = false;
    std::uint64_t seed = 0;
    bool seed_set = false;
};

mgtkit::Corpus relabel_machine(const mgtkit::Corpus& corpus, const std::string& label) {
    mgtkit::Corpus out;
    out.meta = corpus.meta;
    for (const auto& doc : corpus.documents) {
        mgtkit::Document copy = doc;
        copy.label = mgtkit::Authorship::model(label);
        if (copy.method == mgtkit::GenMethod::None) copy.method = mgtkit::GenMethod::Polish;
        out.documents.push_back(std::move(copy));
    }
    return out;
}

void run_train(const TrainOptions& opt) {
    const auto domain = parse_domain(opt.domain);
    const auto split_spec = split_spec_from_config(opt.seed, opt.seed_set);
    const auto feature_config = feature_config_from_config();
    const auto train_config = train_config_from_config(opt.seed, opt.seed_set);

    const mgtkit::Corpus human = mgtkit::load_corpus(opt.human, domain);
    const auto human_parts = mgtkit::split(human, split_spec);
    const auto spec = mgtkit::fit_feature_spec(feature_config, human_parts.train);

    mgtkit::Corpus train_set = human_parts.train;
    mgtkit::Corpus val_set = human_parts.val;
    for (const auto& [name, path] : parse_named_files(opt.machine, "--machine")) {
        const mgtkit::Corpus machine = mgtkit::load_corpus(path, domain);
        const auto parts = mgtkit::split(machine, split_spec);
        const std::string label = opt.multiclass ? name : "machine";
        const auto train_part = relabel_machine(parts.train, label);
        const auto val_part = relabel_machine(parts.val, label);
        train_set.documents.insert(train_set.documents.end(), train_part.documents.begin(),
                                   train_part.documents.end());
        val_set.documents.insert(val_set.documents.end(), val_part.documents.begin(),
                                 val_part.documents.end());
    }

    const mgtkit::DetectorModel model = mgtkit::train(train_set, val_set, spec, train_config);
    const fs::path dir = ensure_out_dir(opt.out);
    mgtkit::save_model(model, (dir / "model.json").string());
    mgtkit::save_feature_spec(spec, (dir / "feature_spec.json").string());
    write_manifest(dir, "train",
                   {{"human", opt.human},
                    {"machine", opt.machine},
                    {"domain", opt.domain},
                    {"multiclass", opt.multiclass},
                    {"split_seed", split_spec.seed},
                    {"train_seed", train_config.seed},
                    {"hashed_dims", feature_config.hashed_dims}});
    std::cout << "train: labels=" << model.labels.size()
              << " best_val_macro_f1=" << mgtkit::format2(100.0 * model.metadata.best_val_macro_f1)
              << " evaluations=" << model.metadata.evaluations_run << "\n";
}

struct EvaluateOptions {
    std::string model, feature_spec, input, domain = "abstract", out;
    std::string positive = "machine";
};

void run_evaluate(const EvaluateOptions& opt) {
    const auto domain = parse_domain(opt.domain);
    const mgtkit::DetectorModel model = mgtkit::load_model(opt.model);
    const mgtkit::FeatureSpec spec = mgtkit::load_feature_spec(opt.feature_spec);
    const mgtkit::Corpus corpus = mgtkit::load_corpus(opt.input, domain);

    const bool binary = model.labels == std::vector<std::string>{"human", "machine"};
    std::vector<std::string> golds, preds;
    for (const auto& doc : corpus.documents) {
        std::string gold = doc.label.to_string();
        if (binary && gold != "human") gold = "machine";
        golds.push_back(gold);
        preds.push_back(mgtkit::predict(model, doc, spec).label);
    }
    const auto cm = mgtkit::confusion_matrix(golds, preds, model.labels);

    const fs::path dir = ensure_out_dir(opt.out);
    mgtkit::write_confusion_csv(cm, (dir / "confusion.csv").string());
    mgtkit::write_confusion_svg(cm, (dir / "confusion.svg").string());
    if (binary) {
        const auto metrics = mgtkit::binary_metrics(cm, opt.positive);
        std::ostringstream csv;
        csv << "accuracy,precision,recall,f1\n"
            << mgtkit::format2(metrics.accuracy) << ',' << mgtkit::format2(metrics.precision)
            << ',' << mgtkit::format2(metrics.recall) << ',' << mgtkit::format2(metrics.f1)
            << '\n';
        mgtkit::write_text_file((dir / "metrics.csv").string(), csv.str());
        std::cout << "evaluate: accuracy=" << mgtkit::format2(metrics.accuracy)
                  << " f1=" << mgtkit::format2(metrics.f1) << "\n";
    } else {
        const auto per_class = mgtkit::per_class_metrics(cm);
        mgtkit::write_per_class_report(per_class, mgtkit::ReportFormat::Csv,
                                       (dir / "metrics.csv").string());
        std::cout << "evaluate: " << per_class.size() << " classes\n";
    }
    write_manifest(dir, "evaluate",
                   {{"model", opt.model},
                    {"feature_spec", opt.feature_spec},
                    {"input", opt.input},
                    {"domain", opt.domain},
                    {"positive", opt.positive}});
}

struct GridOptions {
    std::string human, domain = "abstract", out, format = "csv";
    std::vector<std::string> machine;
    std::uint64_t seed = 0;
    bool seed_set = false;
};

std::map<std::string, mgtkit::Corpus> load_machine_sets(const std::vector<std::string>& entries,
                                                        mgtkit::Domain domain) {
    std::map<std::string, mgtkit::Corpus> sets;
    for (const auto& [name, path] : parse_named_files(entries, "--machine"))
        sets[name] = mgtkit::load_corpus(path, domain);
    return sets;
}

void run_cross_eval(const GridOptions& opt) {
    const auto domain = parse_domain(opt.domain);
    const auto split_spec = split_spec_from_config(opt.seed, opt.seed_set);
    const auto feature_config = feature_config_from_config();
    const auto train_config = train_config_from_config(opt.seed, opt.seed_set);

    const mgtkit::Corpus human = mgtkit::load_corpus(opt.human, domain);
    const auto machine_sets = load_machine_sets(opt.machine, domain);
    const auto grid =
        mgtkit::cross_model_eval(human, machine_sets, split_spec, feature_config, train_config);

    const fs::path dir = ensure_out_dir(opt.out);
    mgtkit::write_cross_model_report(grid, mgtkit::ReportFormat::Json,
                                     (dir / "cross_model.json").string());
    const auto format = mgtkit::report_format_from_string(opt.format);
    if (format == mgtkit::ReportFormat::Csv)
        mgtkit::write_cross_model_report(grid, format, (dir / "cross_model.csv").string());
    else if (format == mgtkit::ReportFormat::Markdown)
        mgtkit::write_cross_model_report(grid, format, (dir / "cross_model.md").string());
    write_manifest(dir, "cross-eval",
                   {{"human", opt.human},
                    {"machine", opt.machine},
                    {"domain", opt.domain},
                    {"format", opt.format},
                    {"split_seed", split_spec.seed},
                    {"train_seed", train_config.seed}});
    std::cout << "cross-eval: " << grid.sources.size() << "x" << grid.sources.size()
              << " grid written to " << dir.string() << "\n";
}

void run_multiclass_eval(const GridOptions& opt) {
    const auto domain = parse_domain(opt.domain);
    const auto split_spec = split_spec_from_config(opt.seed, opt.seed_set);
    const auto feature_config = feature_config_from_config();
    const auto train_config = train_config_from_config(opt.seed, opt.seed_set);

    const mgtkit::Corpus human = mgtkit::load_corpus(opt.human, domain);
    const auto machine_sets = load_machine_sets(opt.machine, domain);
    const auto result =
        mgtkit::multiclass_eval(human, machine_sets, split_spec, feature_config, train_config);

    const fs::path dir = ensure_out_dir(opt.out);
    const auto format = mgtkit::report_format_from_string(opt.format);
    const char* ext = format == mgtkit::ReportFormat::Csv ? "csv"
                      : format == mgtkit::ReportFormat::Markdown ? "md"
                                                                 : "json";
    mgtkit::write_per_class_report(result.per_class, format,
                                   (dir / (std::string("per_class.") + ext)).string());
    mgtkit::write_confusion_csv(result.confusion, (dir / "confusion.csv").string());
    mgtkit::write_confusion_svg(result.confusion, (dir / "confusion.svg").string());
    mgtkit::save_model(result.model, (dir / "model.json").string());
    write_manifest(dir, "multiclass-eval",
                   {{"human", opt.human},
                    {"machine", opt.machine},
                    {"domain", opt.domain},
                    {"format", opt.format},
                    {"split_seed", split_spec.seed},
                    {"train_seed", train_config.seed}});
    std::cout << "multiclass-eval: " << result.per_class.size() << " classes written to "
              << dir.string() << "\n";
}

struct ReportOptions {
    std::string results, format = "markdown", out;
};

void run_report(const ReportOptions& opt) {
    const auto grid = mgtkit::read_cross_model_json(opt.results);
    const fs::path dir = ensure_out_dir(opt.out);
    const auto format = mgtkit::report_format_from_string(opt.format);
    const char* ext = format == mgtkit::ReportFormat::Csv ? "csv"
                      : format == mgtkit::ReportFormat::Markdown ? "md"
                                                                 : "json";
    mgtkit::write_cross_model_report(grid, format,
                                     (dir / (std::string("report.") + ext)).string());
    write_manifest(dir, "report", {{"results", opt.results}, {"format", opt.format}});
    std::cout << "report: wrote report." << ext << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mgtkit: stylometric forensics for machine-generated Arabic text"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "JSON config file with per-subcommand sections");

    IngestOptions ingest;
    auto* ingest_cmd = app.add_subcommand("ingest", "load, filter and persist a corpus");
    ingest_cmd->add_option("--input", ingest.input, "corpus record file")->required();
    ingest_cmd->add_option("--domain", ingest.domain, "abstract|social");
    ingest_cmd->add_option("--out", ingest.out, "output directory")->required();
    ingest_cmd->add_flag("--no-dedup", ingest.no_dedup, "keep duplicate texts");

    StatsOptions stats;
    auto* stats_cmd = app.add_subcommand("stats", "length statistics");
    stats_cmd->add_option("--input", stats.input)->required();
    stats_cmd->add_option("--domain", stats.domain);
    stats_cmd->add_option("--counter", stats.counter, "raw|tokenized");
    stats_cmd->add_option("--out", stats.out);

    FreqOptions freq;
    auto* freq_cmd = app.add_subcommand("freq", "frequency tables, top-k and overlap");
    freq_cmd->add_option("--human", freq.human)->required();
    freq_cmd->add_option("--machine", freq.machine, "name=path, repeatable");
    freq_cmd->add_option("--domain", freq.domain);
    freq_cmd->add_option("--k", freq.k);
    freq_cmd->add_option("--stopwords", freq.stopwords, "default|none|path");
    freq_cmd->add_option("--out", freq.out)->required();

    ZipfOptions zipf;
    auto* zipf_cmd = app.add_subcommand("zipf", "rank-frequency curves and log-log slopes");
    zipf_cmd->add_option("--input", zipf.inputs, "name=path, repeatable")->required();
    zipf_cmd->add_option("--domain", zipf.domain);
    zipf_cmd->add_option("--k", zipf.k);
    zipf_cmd->add_option("--stopwords", zipf.stopwords, "default|none|path");
    zipf_cmd->add_option("--out", zipf.out)->required();

    CompareOptions compare;
    auto* compare_cmd = app.add_subcommand("compare", "reference-based similarity scores");
    compare_cmd->add_option("--candidates", compare.candidates)->required();
    compare_cmd->add_option("--references", compare.references)->required();
    compare_cmd->add_option("--domain", compare.domain);
    compare_cmd->add_option("--pair-by", compare.pair_by, "id|order");
    compare_cmd->add_option("--embedder", compare.embedder, "hash|http");
    compare_cmd->add_option("--embed-endpoint", compare.embed_endpoint);
    compare_cmd->add_option("--embed-dim", compare.embed_dim);
    compare_cmd->add_option("--stopwords", compare.stopwords, "none|default|path");
    compare_cmd->add_option("--out", compare.out)->required();

    GenerateOptions generate;
    auto* generate_cmd = app.add_subcommand("generate", "run the generation harness");
    generate_cmd->add_option("--input", generate.input, "source corpus")->required();
    generate_cmd->add_option("--domain", generate.domain);
    generate_cmd->add_option("--strategy", generate.strategy,
                             "title_only|title_content|polish");
    generate_cmd->add_option("--model", generate.model, "label for generated documents")
        ->required();
    generate_cmd->add_option("--endpoint", generate.endpoint, "chat provider base URL");
    generate_cmd->add_option("--provider-model", generate.provider_model);
    generate_cmd->add_option("--max-retries", generate.max_retries);
    generate_cmd->add_option("--rate-limit", generate.rate_limit, "requests per minute");
    generate_cmd->add_option("--out", generate.out)->required();

    TrainOptions train_opt;
    auto* train_cmd = app.add_subcommand("train", "train a detector");
    train_cmd->add_option("--human", train_opt.human)->required();
    train_cmd->add_option("--machine", train_opt.machine, "name=path, repeatable")->required();
    train_cmd->add_option("--domain", train_opt.domain);
    train_cmd->add_flag("--multiclass", train_opt.multiclass, "one class per machine source");
    auto* train_seed =
        train_cmd->add_option("--seed", train_opt.seed, "overrides split and trainer seeds");
    train_cmd->add_option("--out", train_opt.out)->required();

    EvaluateOptions evaluate;
    auto* evaluate_cmd = app.add_subcommand("evaluate", "score a corpus with a saved detector");
    evaluate_cmd->add_option("--model", evaluate.model)->required();
    evaluate_cmd->add_option("--feature-spec", evaluate.feature_spec)->required();
    evaluate_cmd->add_option("--input", evaluate.input)->required();
    evaluate_cmd->add_option("--domain", evaluate.domain);
    evaluate_cmd->add_option("--positive", evaluate.positive);
    evaluate_cmd->add_option("--out", evaluate.out)->required();

    GridOptions cross;
    auto* cross_cmd = app.add_subcommand("cross-eval", "cross-model generalization grid");
    cross_cmd->add_option("--human", cross.human)->required();
    cross_cmd->add_option("--machine", cross.machine, "name=path, repeatable")->required();
    cross_cmd->add_option("--domain", cross.domain);
    cross_cmd->add_option("--format", cross.format, "csv|markdown|json");
    auto* cross_seed = cross_cmd->add_option("--seed", cross.seed);
    cross_cmd->add_option("--out", cross.out)->required();

    GridOptions multi;
    auto* multi_cmd = app.add_subcommand("multiclass-eval", "multi-class attribution");
    multi_cmd->add_option("--human", multi.human)->required();
    multi_cmd->add_option("--machine", multi.machine, "name=path, repeatable")->required();
    multi_cmd->add_option("--domain", multi.domain);
    multi_cmd->add_option("--format", multi.format, "csv|markdown|json");
    auto* multi_seed = multi_cmd->add_option("--seed", multi.seed);
    multi_cmd->add_option("--out", multi.out)->required();

    ReportOptions report;
    auto* report_cmd = app.add_subcommand("report", "re-emit stored results");
    report_cmd->add_option("--results", report.results, "cross_model.json")->required();
    report_cmd->add_option("--format", report.format, "csv|markdown|json");
    report_cmd->add_option("--out", report.out)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        load_config_file(config_path);
        train_opt.seed_set = train_seed->count() > 0;
        cross.seed_set = cross_seed->count() > 0;
        multi.seed_set = multi_seed->count() > 0;

        if (ingest_cmd->parsed()) run_ingest(ingest);
        else if (stats_cmd->parsed()) run_stats(stats);
        else if (freq_cmd->parsed()) run_freq(freq);
        else if (zipf_cmd->parsed()) run_zipf(zipf);
        else if (compare_cmd->parsed()) run_compare(compare);
        else if (generate_cmd->parsed()) run_generate(generate);
        else if (train_cmd->parsed()) run_train(train_opt);
        else if (evaluate_cmd->parsed()) run_evaluate(evaluate);
        else if (cross_cmd->parsed()) run_cross_eval(cross);
        else if (multi_cmd->parsed()) run_multiclass_eval(multi);
        else if (report_cmd->parsed()) run_report(report);
    } catch (const mgtkit::Error& e) {
        std::cerr << "mgtkit: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "mgtkit: unexpected error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
