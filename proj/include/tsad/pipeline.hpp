#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tsad/detect.hpp"
#include "tsad/metrics.hpp"

namespace tsad {

enum class ModelKind { kHoltWinters, kSarima, kLstm };
enum class StlMode { kAuto, kOn, kOff };

std::string to_string(ModelKind model);
ModelKind model_from_string(const std::string& name);
StlMode stl_mode_from_string(const std::string& name);

struct RunConfig {
    std::string data_root;
    std::string labels_path;  // empty: every dataset treated as anomaly-free
    std::string output_root = "out";
    std::vector<ModelKind> models = {ModelKind::kHoltWinters, ModelKind::kSarima,
                                     ModelKind::kLstm};
    std::vector<DetectorMethod> detectors = {DetectorMethod::kZtest, DetectorMethod::kGaussian,
                                             DetectorMethod::kPercentile, DetectorMethod::kIqr};
    double train_frac = 0.7;
    double val_frac = 0.15;
    StlMode stl_mode = StlMode::kAuto;
    std::uint64_t seed = 42;
    std::size_t parallelism = 1;
    std::size_t lstm_max_epochs = 30;
};

struct EvaluationRecord {
    std::string dataset;
    std::string model;
    std::string detector;
    ForecastMetrics forecast;
    DetectionMetrics detection;
    double train_seconds = 0.0;
    double predict_seconds = 0.0;
    std::size_t epochs_or_iters = 0;
    bool ok = true;
    std::string error;
    std::string flags;  // semicolon-joined degeneracy markers
};

struct BatchSummary {
    std::size_t datasets_ok = 0;
    std::size_t datasets_failed = 0;
    std::size_t records_ok = 0;
    std::size_t records_failed = 0;
    std::vector<EvaluationRecord> records;
};

// Full per-dataset pipeline: load, repair, normalize, optional STL, split,
// fit each model, walk-forward predict, compute residuals, fit and apply
// each detector, persist artifacts under output_root/<dataset key>/.
std::vector<EvaluationRecord> run_dataset(const RunConfig& config,
                                          const std::string& dataset_path,
                                          const std::string& dataset_key);

BatchSummary run_batch(const RunConfig& config);

struct RankingRow {
    std::string dataset;
    std::string model;
    std::size_t mae_rank = 0;
};

// Ascending MAE ranks per dataset; ties share the minimum rank.
std::vector<RankingRow> aggregate_rankings(const std::vector<EvaluationRecord>& records);

void write_summary_csv(const std::vector<EvaluationRecord>& records, const std::string& path);
void write_detection_csv(const std::vector<EvaluationRecord>& records, const std::string& path);
void write_rankings_csv(const std::vector<RankingRow>& rows, const std::string& path);
void write_failures_csv(const std::vector<EvaluationRecord>& records, const std::string& path);

}  // namespace tsad
