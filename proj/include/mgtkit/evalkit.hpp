#pragma once

#include <map>
#include <string>
#include <vector>

#include "mgtkit/corpus.hpp"
#include "mgtkit/detect.hpp"

namespace mgtkit {

struct ConfusionMatrix {
    std::vector<std::string> labels;                // ordered
    std::vector<std::vector<long long>> counts;     // rows = gold, columns = predicted

    long long total() const;
    long long trace() const;
};

ConfusionMatrix confusion_matrix(const std::vector<std::string>& golds,
                                 const std::vector<std::string>& preds,
                                 const std::vector<std::string>& labels);

/// All values on the 0-100 scale. The *_defined flags drop when a zero
/// denominator forced the value to 0.
struct EvalMetrics {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    bool precision_defined = true;
    bool recall_defined = true;
};

EvalMetrics binary_metrics(const ConfusionMatrix& cm, const std::string& positive);

/// One-vs-rest reduction per class; per-class accuracy is the binarized
/// accuracy (TP+TN)/total.
std::map<std::string, EvalMetrics> per_class_metrics(const ConfusionMatrix& cm);

struct CrossModelMatrix {
    std::vector<std::string> sources;                       // row and column order
    std::vector<std::vector<EvalMetrics>> cells;            // [train][test]
};

/// Train-on-X / test-on-Y grid of binary human-vs-machine detectors. Human
/// test documents are shared across every cell of a row, so cells differ
/// only in the machine-source test data.
CrossModelMatrix cross_model_eval(const Corpus& human,
                                  const std::map<std::string, Corpus>& machine_sets,
                                  const SplitSpec& split_spec, const FeatureConfig& feature_config,
                                  const TrainConfig& train_config);

struct MulticlassResult {
    std::map<std::string, EvalMetrics> per_class;
    ConfusionMatrix confusion;
    DetectorModel model;
};

/// Single K-class detector over human plus one class per machine source.
MulticlassResult multiclass_eval(const Corpus& human,
                                 const std::map<std::string, Corpus>& machine_sets,
                                 const SplitSpec& split_spec, const FeatureConfig& feature_config,
                                 const TrainConfig& train_config);

/// Half-up rounding to two decimals, the precision of every emitted report.
double round2(double value);
std::string format2(double value);

enum class ReportFormat { Csv, Markdown, Json };

ReportFormat report_format_from_string(const std::string& s);

void write_cross_model_report(const CrossModelMatrix& grid, ReportFormat format,
                              const std::string& path);
void write_per_class_report(const std::map<std::string, EvalMetrics>& per_class,
                            ReportFormat format, const std::string& path);
void write_confusion_csv(const ConfusionMatrix& cm, const std::string& path);
void write_confusion_svg(const ConfusionMatrix& cm, const std::string& path);

/// Parses a cross-model JSON report back; emit -> parse -> emit is identity.
CrossModelMatrix read_cross_model_json(const std::string& path);

}  // namespace mgtkit
