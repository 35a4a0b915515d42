#include "mgtkit/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mgtkit/errors.hpp"
#include "mgtkit/svg.hpp"

namespace mgtkit {

long long ConfusionMatrix::total() const {
    long long sum = 0;
    for (const auto& row : counts)
        for (long long v : row) sum += v;
    return sum;
}

long long ConfusionMatrix::trace() const {
    long long sum = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) sum += counts[i][i];
    return sum;
}

ConfusionMatrix confusion_matrix(const std::vector<std::string>& golds,
                                 const std::vector<std::string>& preds,
                                 const std::vector<std::string>& labels) {
    if (golds.size() != preds.size())
        throw ValidationError("confusion_matrix: golds and preds differ in length");
    if (golds.empty()) throw ValidationError("confusion_matrix: no examples");

    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < labels.size(); ++i) index[labels[i]] = i;

    ConfusionMatrix cm;
    cm.labels = labels;
    cm.counts.assign(labels.size(), std::vector<long long>(labels.size(), 0));
    for (std::size_t i = 0; i < golds.size(); ++i) {
        const auto g = index.find(golds[i]);
        const auto p = index.find(preds[i]);
        if (g == index.end()) throw ValidationError("unknown gold label '" + golds[i] + "'");
        if (p == index.end()) throw ValidationError("unknown predicted label '" + preds[i] + "'");
        ++cm.counts[g->second][p->second];
    }
    return cm;
}

EvalMetrics binary_metrics(const ConfusionMatrix& cm, const std::string& positive) {
    const long long total = cm.total();
    if (total == 0) throw ValidationError("binary_metrics: empty confusion matrix");
    const auto it = std::find(cm.labels.begin(), cm.labels.end(), positive);
    if (it == cm.labels.end())
        throw ValidationError("binary_metrics: unknown positive label '" + positive + "'");
    const std::size_t pos = static_cast<std::size_t>(it - cm.labels.begin());

    const long long tp = cm.counts[pos][pos];
    long long fp = 0, fn = 0;
    for (std::size_t i = 0; i < cm.labels.size(); ++i) {
        if (i == pos) continue;
        fp += cm.counts[i][pos];
        fn += cm.counts[pos][i];
    }

    EvalMetrics m;
    m.accuracy = 100.0 * static_cast<double>(cm.trace()) / static_cast<double>(total);
    if (tp + fp > 0)
        m.precision = 100.0 * static_cast<double>(tp) / static_cast<double>(tp + fp);
    else
        m.precision_defined = false;
    if (tp + fn > 0)
        m.recall = 100.0 * static_cast<double>(tp) / static_cast<double>(tp + fn);
    else
        m.recall_defined = false;
    if (m.precision + m.recall > 0.0)
        m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    return m;
}

std::map<std::string, EvalMetrics> per_class_metrics(const ConfusionMatrix& cm) {
    if (cm.labels.size() < 2)
        throw ValidationError("per_class_metrics: need at least 2 classes");
    const long long total = cm.total();
    if (total == 0) throw ValidationError("per_class_metrics: empty confusion matrix");

    std::map<std::string, EvalMetrics> out;
    for (std::size_t c = 0; c < cm.labels.size(); ++c) {
        long long tp = cm.counts[c][c], fp = 0, fn = 0;
        for (std::size_t i = 0; i < cm.labels.size(); ++i) {
            if (i == c) continue;
            fp += cm.counts[i][c];
            fn += cm.counts[c][i];
        }
        const long long tn = total - tp - fp - fn;
        ConfusionMatrix pooled;
        pooled.labels = {"rest", cm.labels[c]};
        pooled.counts = {{tn, fp}, {fn, tp}};
        out[cm.labels[c]] = binary_metrics(pooled, cm.labels[c]);
    }
    return out;
}

namespace {

Corpus relabel(const Corpus& corpus, const std::string& label) {
    Corpus out;
    out.meta = corpus.meta;
    out.documents.reserve(corpus.documents.size());
    for (const auto& doc : corpus.documents) {
        Document copy = doc;
        if (label == "human") {
            copy.label = Authorship::human();
            copy.method = GenMethod::None;
        } else {
            copy.label = Authorship::model(label);
            if (copy.method == GenMethod::None) copy.method = GenMethod::Polish;
        }
        out.documents.push_back(std::move(copy));
    }
    return out;
}

Corpus concat(const Corpus& a, const Corpus& b) {
    Corpus out = a;
    out.documents.insert(out.documents.end(), b.documents.begin(), b.documents.end());
    return out;
}

SplitResult checked_split(const Corpus& corpus, const SplitSpec& spec, const std::string& name) {
    const SplitResult parts = split(corpus, spec);
    if (parts.train.empty() || parts.val.empty() || parts.test.empty())
        throw ValidationError("degenerate split for source '" + name +
                              "': every part must be non-empty");
    return parts;
}

}  // namespace

CrossModelMatrix cross_model_eval(const Corpus& human,
                                  const std::map<std::string, Corpus>& machine_sets,
                                  const SplitSpec& split_spec, const FeatureConfig& feature_config,
                                  const TrainConfig& train_config) {
    if (machine_sets.size() < 2)
        throw ValidationError("cross_model_eval: need at least 2 machine sources");

    const SplitResult human_parts = checked_split(human, split_spec, "human");
    std::map<std::string, SplitResult> machine_parts;
    for (const auto& [name, corpus] : machine_sets)
        machine_parts[name] = checked_split(corpus, split_spec, name);

    const FeatureSpec spec = fit_feature_spec(feature_config, human_parts.train);
    const Corpus human_train = relabel(human_parts.train, "human");
    const Corpus human_val = relabel(human_parts.val, "human");
    const Corpus human_test = relabel(human_parts.test, "human");

    CrossModelMatrix grid;
    for (const auto& [name, _] : machine_sets) grid.sources.push_back(name);
    grid.cells.resize(grid.sources.size(), std::vector<EvalMetrics>(grid.sources.size()));

    for (std::size_t x = 0; x < grid.sources.size(); ++x) {
        const auto& train_source = machine_parts.at(grid.sources[x]);
        const DetectorModel model =
            train(concat(human_train, relabel(train_source.train, "machine")),
                  concat(human_val, relabel(train_source.val, "machine")), spec, train_config);

        for (std::size_t y = 0; y < grid.sources.size(); ++y) {
            const Corpus test_set =
                concat(human_test, relabel(machine_parts.at(grid.sources[y]).test, "machine"));
            std::vector<std::string> golds, preds;
            golds.reserve(test_set.size());
            preds.reserve(test_set.size());
            for (const auto& doc : test_set.documents) {
                golds.push_back(doc.label.to_string());
                preds.push_back(predict(model, doc, spec).label);
            }
            const ConfusionMatrix cm = confusion_matrix(golds, preds, {"human", "machine"});
            grid.cells[x][y] = binary_metrics(cm, "machine");
        }
    }
    return grid;
}

MulticlassResult multiclass_eval(const Corpus& human,
                                 const std::map<std::string, Corpus>& machine_sets,
                                 const SplitSpec& split_spec, const FeatureConfig& feature_config,
                                 const TrainConfig& train_config) {
    if (machine_sets.empty())
        throw ValidationError("multiclass_eval: need at least 1 machine source");

    const SplitResult human_parts = checked_split(human, split_spec, "human");
    const FeatureSpec spec = fit_feature_spec(feature_config, human_parts.train);

    Corpus train_set = relabel(human_parts.train, "human");
    Corpus val_set = relabel(human_parts.val, "human");
    Corpus test_set = relabel(human_parts.test, "human");
    for (const auto& [name, corpus] : machine_sets) {
        const SplitResult parts = checked_split(corpus, split_spec, name);
        train_set = concat(train_set, relabel(parts.train, name));
        val_set = concat(val_set, relabel(parts.val, name));
        test_set = concat(test_set, relabel(parts.test, name));
    }

    MulticlassResult result;
    result.model = train(train_set, val_set, spec, train_config);

    std::vector<std::string> golds, preds;
    golds.reserve(test_set.size());
    preds.reserve(test_set.size());
    for (const auto& doc : test_set.documents) {
        golds.push_back(doc.label.to_string());
        preds.push_back(predict(result.model, doc, spec).label);
    }
    result.confusion = confusion_matrix(golds, preds, result.model.labels);
    result.per_class = per_class_metrics(result.confusion);
    return result;
}

double round2(double value) {
    return std::floor(value * 100.0 + 0.5) / 100.0;
}

std::string format2(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", round2(value));
    return buf;
}

ReportFormat report_format_from_string(const std::string& s) {
    if (s == "csv") return ReportFormat::Csv;
    if (s == "markdown" || s == "md") return ReportFormat::Markdown;
    if (s == "json") return ReportFormat::Json;
    throw ValidationError("unknown report format: '" + s + "'");
}

namespace {

struct MetricField {
    const char* name;
    double EvalMetrics::*member;
};

constexpr MetricField kMetricFields[] = {
    {"accuracy", &EvalMetrics::accuracy},
    {"precision", &EvalMetrics::precision},
    {"recall", &EvalMetrics::recall},
    {"f1", &EvalMetrics::f1},
};

void write_cross_model_csv(const CrossModelMatrix& grid, std::ostream& out) {
    out << "train,test,accuracy,precision,recall,f1\n";
    for (std::size_t x = 0; x < grid.sources.size(); ++x) {
        for (std::size_t y = 0; y < grid.sources.size(); ++y) {
            const EvalMetrics& m = grid.cells[x][y];
            out << grid.sources[x] << ',' << grid.sources[y];
            for (const auto& field : kMetricFields) out << ',' << format2(m.*(field.member));
            out << '\n';
        }
    }
}

void write_cross_model_markdown(const CrossModelMatrix& grid, std::ostream& out) {
    out << "| Metric | Train |";
    for (const auto& name : grid.sources) out << ' ' << name << " |";
    out << '\n';
    out << "| --- | --- |";
    for (std::size_t i = 0; i < grid.sources.size(); ++i) out << " --- |";
    out << '\n';
    for (const auto& field : kMetricFields) {
        for (std::size_t x = 0; x < grid.sources.size(); ++x) {
            out << "| " << field.name << " | " << grid.sources[x] << " |";
            for (std::size_t y = 0; y < grid.sources.size(); ++y)
                out << ' ' << format2(grid.cells[x][y].*(field.member)) << " |";
            out << '\n';
        }
    }
}

nlohmann::ordered_json metrics_to_json(const EvalMetrics& m) {
    nlohmann::ordered_json j;
    for (const auto& field : kMetricFields) j[field.name] = round2(m.*(field.member));
    return j;
}

void write_cross_model_json(const CrossModelMatrix& grid, std::ostream& out) {
    nlohmann::ordered_json doc;
    doc["sources"] = grid.sources;
    nlohmann::ordered_json cells;
    for (std::size_t x = 0; x < grid.sources.size(); ++x) {
        nlohmann::ordered_json row;
        for (std::size_t y = 0; y < grid.sources.size(); ++y)
            row[grid.sources[y]] = metrics_to_json(grid.cells[x][y]);
        cells[grid.sources[x]] = std::move(row);
    }
    doc["cells"] = std::move(cells);
    out << doc.dump(2) << '\n';
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write report: " + path);
    return out;
}

}  // namespace

void write_cross_model_report(const CrossModelMatrix& grid, ReportFormat format,
                              const std::string& path) {
    if (grid.sources.empty()) throw ValidationError("cross-model grid is empty");
    auto out = open_out(path);
    switch (format) {
        case ReportFormat::Csv: write_cross_model_csv(grid, out); break;
        case ReportFormat::Markdown: write_cross_model_markdown(grid, out); break;
        case ReportFormat::Json: write_cross_model_json(grid, out); break;
    }
    if (!out) throw Error("write failed: " + path);
}

void write_per_class_report(const std::map<std::string, EvalMetrics>& per_class,
                            ReportFormat format, const std::string& path) {
    if (per_class.empty()) throw ValidationError("per-class results are empty");
    auto out = open_out(path);
    switch (format) {
        case ReportFormat::Csv: {
            out << "class,accuracy,precision,recall,f1\n";
            for (const auto& [label, m] : per_class) {
                out << label;
                for (const auto& field : kMetricFields) out << ',' << format2(m.*(field.member));
                out << '\n';
            }
            break;
        }
        case ReportFormat::Markdown: {
            out << "| Class | Accuracy | Precision | Recall | F1 |\n";
            out << "| --- | --- | --- | --- | --- |\n";
            for (const auto& [label, m] : per_class) {
                out << "| " << label << " |";
                for (const auto& field : kMetricFields)
                    out << ' ' << format2(m.*(field.member)) << " |";
                out << '\n';
            }
            break;
        }
        case ReportFormat::Json: {
            nlohmann::ordered_json doc;
            for (const auto& [label, m] : per_class) doc[label] = metrics_to_json(m);
            out << doc.dump(2) << '\n';
            break;
        }
    }
    if (!out) throw Error("write failed: " + path);
}

void write_confusion_csv(const ConfusionMatrix& cm, const std::string& path) {
    auto out = open_out(path);
    out << "gold\\predicted";
    for (const auto& label : cm.labels) out << ',' << label;
    out << '\n';
    for (std::size_t i = 0; i < cm.labels.size(); ++i) {
        out << cm.labels[i];
        for (std::size_t j = 0; j < cm.labels.size(); ++j) out << ',' << cm.counts[i][j];
        out << '\n';
    }
}

void write_confusion_svg(const ConfusionMatrix& cm, const std::string& path) {
    write_text_file(path, svg_heatmap(cm.labels, cm.counts));
}

CrossModelMatrix read_cross_model_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open report: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("invalid cross-model report: ") + e.what());
    }
    CrossModelMatrix grid;
    grid.sources = doc.at("sources").get<std::vector<std::string>>();
    grid.cells.resize(grid.sources.size(), std::vector<EvalMetrics>(grid.sources.size()));
    for (std::size_t x = 0; x < grid.sources.size(); ++x) {
        const auto& row = doc.at("cells").at(grid.sources[x]);
        for (std::size_t y = 0; y < grid.sources.size(); ++y) {
            const auto& cell = row.at(grid.sources[y]);
            EvalMetrics& m = grid.cells[x][y];
            for (const auto& field : kMetricFields)
                m.*(field.member) = cell.at(field.name).get<double>();
        }
    }
    return grid;
}

}  // namespace mgtkit
