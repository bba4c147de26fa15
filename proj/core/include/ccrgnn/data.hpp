#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ccrgnn {

// The nine rating grades, best to worst.
inline constexpr std::array<const char*, 9> kRatingGrades = {
    "AAA", "AA", "A", "BBB", "BB", "B", "CCC", "CC", "C"};

// Index of a grade in kRatingGrades, or -1 when unknown.
int rating_index(const std::string& grade);

// One corporation as read from a raw CSV: named numeric and categorical
// fields in declaration (header) order, empty cells as missing values.
struct RawRecord {
    std::string id;
    std::vector<std::pair<std::string, std::optional<double>>> numeric;
    std::vector<std::pair<std::string, std::optional<std::string>>> categorical;
    std::string label;
};

struct NumericStat {
    std::string name;
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
};

struct CategoricalStat {
    std::string name;
    std::vector<std::string> vocabulary;  // sorted
    std::string fill;                     // mode, used for missing values
};

// Fitted preprocessing schema: kept features in declaration order plus the
// drop-list of features that missed too many values.
struct FeatureSchema {
    std::vector<NumericStat> numeric;
    std::vector<CategoricalStat> categorical;
    std::vector<std::string> dropped;

    int dimension() const;
};

struct ProcessedRecord {
    std::vector<double> x;  // length d, numeric block then one-hot blocks
    int label_index = -1;   // in [0, m)
};

// ---------------------------------------------------------------------------
// Raw CSV ingestion
// ---------------------------------------------------------------------------

// Reads a UTF-8 CSV with a header row. The "rating" column is the label; an
// "id" column is used as record id when present (row number otherwise).
// Columns whose non-empty cells all parse as numbers are numeric, the rest
// categorical. Empty cells become missing values.
std::vector<RawRecord> load_csv(const std::string& path);
void write_csv(const std::string& path, const std::vector<RawRecord>& records);

// Fits stats over non-missing values; features missing in more than
// missing_drop_fraction of the records are dropped.
FeatureSchema fit_schema(const std::vector<RawRecord>& records, double missing_drop_fraction = 0.5);

// Min-max scales numerics (missing -> mean first, constant features -> 0)
// and one-hot encodes categoricals (missing -> mode), concatenated in schema
// order.
ProcessedRecord preprocess(const RawRecord& record, const FeatureSchema& schema);
std::vector<ProcessedRecord> preprocess_all(const std::vector<RawRecord>& records,
                                            const FeatureSchema& schema);

// ---------------------------------------------------------------------------
// Rebalancing, splitting, synthesis
// ---------------------------------------------------------------------------

// SMOTE oversampling: every class is grown to the majority count by
// interpolating x + u * (x_nn - x) between a point and one of its k nearest
// same-class neighbours. Originals are kept unchanged, synthetics appended.
std::vector<ProcessedRecord> smote(const std::vector<ProcessedRecord>& dataset, int k,
                                   std::uint64_t seed);

// Per-class split preserving proportions within rounding. Classes with a
// single sample go to train.
std::pair<std::vector<ProcessedRecord>, std::vector<ProcessedRecord>> stratified_split(
    const std::vector<ProcessedRecord>& dataset, double test_fraction, std::uint64_t seed);

// Synthetic dataset: class prototypes spread in [0,1]^d (pairwise distances
// scaled by `separation`), samples are prototypes plus clipped Gaussian
// noise, class sizes apportioned by `imbalance` (must sum to 1).
std::vector<ProcessedRecord> generate_synthetic(int n, int d, int m, double separation,
                                                const std::vector<double>& imbalance,
                                                std::uint64_t seed, double noise_sigma = 0.05);

// ---------------------------------------------------------------------------
// Processed dataset and schema files
// ---------------------------------------------------------------------------

// CSV with columns f0..f{d-1} and label_index.
void write_processed_csv(const std::string& path, const std::vector<ProcessedRecord>& records);
std::vector<ProcessedRecord> load_processed_csv(const std::string& path);

std::string schema_to_json(const FeatureSchema& schema);
FeatureSchema schema_from_json(const std::string& text);
void save_schema(const std::string& path, const FeatureSchema& schema);
FeatureSchema load_schema(const std::string& path);

// Histogram of label_index values (size = max label + 1).
std::vector<int> class_histogram(const std::vector<ProcessedRecord>& dataset);

}  // namespace ccrgnn
