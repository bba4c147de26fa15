#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ccrgnn/data.hpp"
#include "ccrgnn/model.hpp"

namespace ccrgnn {

// m x m counts, entry (true_label, predicted_label).
struct ConfusionMatrix {
    int m = 0;
    std::vector<long long> counts;  // row-major

    explicit ConfusionMatrix(int classes = 0)
        : m(classes), counts(static_cast<size_t>(classes) * classes, 0) {}
    long long& at(int t, int p) { return counts[static_cast<size_t>(t) * m + p]; }
    long long at(int t, int p) const { return counts[static_cast<size_t>(t) * m + p]; }
    long long total() const;
};

// Per-class and macro precision/recall/F1 plus accuracy. Classes whose
// denominator is zero (no true samples / no predictions) are excluded from
// the macro average; the *_defined flags report the exclusions.
struct MetricsReport {
    std::vector<double> precision, recall, f1;
    std::vector<bool> precision_defined, recall_defined, f1_defined;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
    double accuracy = 0.0;
    int precision_classes = 0;  // contributing class counts
    int recall_classes = 0;
    int f1_classes = 0;
};

ConfusionMatrix confusion(const std::vector<int>& predictions, const std::vector<int>& truths,
                          int m);
MetricsReport macro_metrics(const ConfusionMatrix& cm);

MetricsReport evaluate(const CcrGnnParams& params, const CcrGnnConfig& config,
                       const std::vector<ProcessedRecord>& test_set);

// Flat-vector baselines trained with Adam on NLL + L2 and evaluated
// identically to the main model.
struct BaselineConfig {
    int hidden = 0;  // 0 = multinomial logistic regression
    int epochs = 200;
    double lr = 1e-3;
    double l2 = 1e-5;
    int batch_size = 32;
    std::uint64_t seed = 0;
    int threads = 1;
};

struct BaselineResult {
    std::vector<MlpLayer> layers;
    MetricsReport metrics;        // on the test set
    double train_accuracy = 0.0;  // last epoch
};

BaselineResult baseline_logreg(const std::vector<ProcessedRecord>& train,
                               const std::vector<ProcessedRecord>& test, int class_count,
                               BaselineConfig config = {});
BaselineResult baseline_mlp(const std::vector<ProcessedRecord>& train,
                            const std::vector<ProcessedRecord>& test, int class_count,
                            BaselineConfig config = {});

std::string metrics_to_json(const MetricsReport& report);

// Aligned text table with Recall / Accuracy / F1-score columns, one row per
// named model.
std::string metrics_table(const std::vector<std::pair<std::string, MetricsReport>>& rows);

}  // namespace ccrgnn
