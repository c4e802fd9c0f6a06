#include "tsad/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "tsad/holt_winters.hpp"
#include "tsad/lstm.hpp"
#include "tsad/preprocess.hpp"
#include "tsad/sarima.hpp"
#include "tsad/timeseries.hpp"

namespace fs = std::filesystem;

namespace tsad {

namespace {

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

std::string fmt_seconds(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

double elapsed(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string join_flags(const ForecastMetrics& f, const DetectionMetrics& d) {
    std::string out;
    auto add = [&](bool cond, const char* name) {
        if (!cond) return;
        if (!out.empty()) out += ';';
        out += name;
    };
    add(f.pcc_degenerate, "pcc_constant");
    add(f.mape_excluded > 0, "mape_excluded");
    add(d.precision_degenerate, "precision_undefined");
    add(d.recall_degenerate, "recall_undefined");
    add(d.fpr_degenerate, "fpr_undefined");
    add(d.auc_degenerate, "auc_one_class");
    return out;
}

struct ModelRun {
    std::vector<double> forecasts;   // aligned to series position first_index..n-1
    std::size_t first_index = 0;     // first position with a forecast
    std::size_t warmup = 0;          // residuals before this position are discarded
    double train_seconds = 0.0;
    double predict_seconds = 0.0;
    std::size_t epochs_or_iters = 0;
    nlohmann::json snapshot;
};

ModelRun run_holt_winters(const std::vector<double>& input, const SplitView& sv,
                          std::optional<std::size_t> period) {
    const std::vector<double> train(input.begin(),
                                    input.begin() + static_cast<std::ptrdiff_t>(sv.train_end));
    std::size_t m = period.value_or(1);
    if (train.size() < 2 * m) m = 1;  // fall back to Holt's linear method

    ModelRun run;
    auto t0 = std::chrono::steady_clock::now();
    HoltWintersModel fitted = hw_fit(train, m);
    run.train_seconds = elapsed(t0);

    // Replay from the initial state with the fitted coefficients so train,
    // val, and test forecasts come from one continuous recursion.
    t0 = std::chrono::steady_clock::now();
    HoltWintersModel replay = hw_initial_state(train, m);
    replay.alpha = fitted.alpha;
    replay.beta = fitted.beta;
    replay.gamma = fitted.gamma;
    run.forecasts = hw_predict_one_step(replay, input);
    run.predict_seconds = elapsed(t0);
    run.first_index = 0;
    run.warmup = m;

    run.snapshot = {{"schema_version", 1},
                    {"type", "holt_winters"},
                    {"alpha", fitted.alpha},
                    {"beta", fitted.beta},
                    {"gamma", fitted.gamma},
                    {"period", m},
                    {"level", fitted.level},
                    {"trend", fitted.trend},
                    {"seasonals", fitted.seasonals},
                    {"train_mse", fitted.train_mse}};
    return run;
}

ModelRun run_sarima(const std::vector<double>& input, const SplitView& sv,
                    std::optional<std::size_t> period) {
    const std::vector<double> train(input.begin(),
                                    input.begin() + static_cast<std::ptrdiff_t>(sv.train_end));
    std::size_t m = period.value_or(1);
    bool seasonal = m >= 2;
    if (seasonal && train.size() < 3 * m + 20) {
        m = 1;
        seasonal = false;
    }

    ModelRun run;
    auto t0 = std::chrono::steady_clock::now();
    SarimaOrders orders = sarima_select(train, m, seasonal);
    SarimaModel model = sarima_fit(train, orders);
    run.train_seconds = elapsed(t0);

    t0 = std::chrono::steady_clock::now();
    run.forecasts = sarima_in_sample_forecasts(model, train);
    const std::vector<double> rest(input.begin() + static_cast<std::ptrdiff_t>(sv.train_end),
                                   input.end());
    const std::vector<double> tail_forecasts = sarima_predict_one_step(model, rest);
    run.forecasts.insert(run.forecasts.end(), tail_forecasts.begin(), tail_forecasts.end());
    run.predict_seconds = elapsed(t0);
    run.first_index = 0;
    run.warmup = static_cast<std::size_t>(orders.d) + orders.period * orders.D;

    run.snapshot = {{"schema_version", 1},
                    {"type", "sarima"},
                    {"orders",
                     {{"p", orders.p}, {"d", orders.d}, {"q", orders.q}, {"P", orders.P},
                      {"D", orders.D}, {"Q", orders.Q}, {"period", orders.period}}},
                    {"ar", model.ar},
                    {"ma", model.ma},
                    {"sar", model.sar},
                    {"sma", model.sma},
                    {"intercept", model.intercept},
                    {"sigma2", model.sigma2},
                    {"aic", model.aic}};
    return run;
}

ModelRun run_lstm(const std::vector<double>& input, const SplitView& sv, std::uint64_t seed,
                  std::size_t max_epochs) {
    LstmHyperparams hp;
    hp.seed = seed;
    hp.max_epochs = max_epochs;
    if (sv.train_end <= hp.window + 1)
        throw std::invalid_argument("train segment too short for lstm window 50");
    if (sv.val_size() == 0) throw std::invalid_argument("empty validation segment");

    const std::vector<double> train(input.begin(),
                                    input.begin() + static_cast<std::ptrdiff_t>(sv.train_end));
    const std::vector<double> val(input.begin() + static_cast<std::ptrdiff_t>(sv.train_end),
                                  input.begin() + static_cast<std::ptrdiff_t>(sv.val_end));

    ModelRun run;
    auto t0 = std::chrono::steady_clock::now();
    LstmFitResult fit = lstm_fit(train, val, hp);
    run.train_seconds = elapsed(t0);
    run.epochs_or_iters = fit.stopped_epoch;

    t0 = std::chrono::steady_clock::now();
    run.forecasts = lstm_predict_one_step(fit.params, input, hp.window);
    run.predict_seconds = elapsed(t0);
    run.first_index = hp.window;
    run.warmup = hp.window;

    nlohmann::json log = nlohmann::json::array();
    for (const auto& row : fit.log)
        log.push_back({{"epoch", row.epoch}, {"train_mse", row.train_mse},
                       {"val_mse", row.val_mse}});
    run.snapshot = {{"schema_version", 1},
                    {"type", "lstm"},
                    {"window", hp.window},
                    {"layers", hp.layers},
                    {"hidden", hp.hidden},
                    {"dropout", hp.dropout},
                    {"seed", seed},
                    {"stopped_epoch", fit.stopped_epoch},
                    {"best_val_mse", fit.best_val_mse},
                    {"training_log", log},
                    {"params", fit.params.values}};
    return run;
}

void persist_model_outputs(const fs::path& dir, const std::string& model_name,
                           const TimeSeries& series, const std::vector<double>& actual,
                           const ModelRun& run, const SplitView& sv) {
    fs::create_directories(dir);
    {
        std::ofstream out(dir / ("predictions_" + model_name + ".csv"));
        out << "timestamp,actual,predicted\n";
        for (std::size_t j = run.first_index; j < actual.size(); ++j)
            out << format_timestamp(series.timestamps[j]) << ',' << fmt(actual[j]) << ','
                << fmt(run.forecasts[j - run.first_index]) << '\n';
    }
    {
        std::ofstream out(dir / ("residuals_" + model_name + ".csv"));
        out << "timestamp,residual\n";
        for (std::size_t j = run.first_index; j < actual.size(); ++j)
            out << format_timestamp(series.timestamps[j]) << ','
                << fmt(actual[j] - run.forecasts[j - run.first_index]) << '\n';
    }
    {
        std::ofstream out(dir / ("model_" + model_name + ".json"));
        out << run.snapshot.dump(2) << '\n';
    }
    (void)sv;
}

void persist_detections(const fs::path& dir, const std::string& model_name,
                        const std::string& detector_name, const TimeSeries& series,
                        const ResidualSeries& test_res, const DetectionOutput& output) {
    std::ofstream out(dir / ("detections_" + model_name + "_" + detector_name + ".csv"));
    out << "timestamp,residual,score,label\n";
    for (std::size_t j = 0; j < test_res.signed_values.size(); ++j)
        out << format_timestamp(series.timestamps[test_res.positions[j]]) << ','
            << fmt(test_res.signed_values[j]) << ',' << fmt(output.scores[j]) << ','
            << (output.labels[j] ? 1 : 0) << '\n';
}

}  // namespace

std::string to_string(ModelKind model) {
    switch (model) {
        case ModelKind::kHoltWinters: return "holt_winters";
        case ModelKind::kSarima: return "sarima";
        case ModelKind::kLstm: return "lstm";
    }
    return "?";
}

ModelKind model_from_string(const std::string& name) {
    if (name == "holt_winters") return ModelKind::kHoltWinters;
    if (name == "sarima") return ModelKind::kSarima;
    if (name == "lstm") return ModelKind::kLstm;
    throw std::invalid_argument("unknown model: " + name);
}

StlMode stl_mode_from_string(const std::string& name) {
    if (name == "auto") return StlMode::kAuto;
    if (name == "on") return StlMode::kOn;
    if (name == "off") return StlMode::kOff;
    throw std::invalid_argument("unknown stl mode: " + name);
}

std::vector<EvaluationRecord> run_dataset(const RunConfig& config,
                                          const std::string& dataset_path,
                                          const std::string& dataset_key) {
    std::vector<EvaluationRecord> records;
    auto fail = [&](const std::string& model, const std::string& detector,
                    const std::string& message) {
        EvaluationRecord r;
        r.dataset = dataset_key;
        r.model = model;
        r.detector = detector;
        r.ok = false;
        r.error = message;
        records.push_back(r);
    };

    TimeSeries series;
    std::vector<double> normalized;
    SplitView sv;
    std::optional<std::size_t> period;
    std::vector<bool> truth;
    try {
        series = load_series(dataset_path);
        auto [repaired, report] = repair_missing(series.values);
        series.values = repaired;
        (void)report;

        sv = split(series, config.train_frac, config.val_frac);
        const std::vector<double> train_raw(
            series.values.begin(), series.values.begin() + static_cast<std::ptrdiff_t>(sv.train_end));
        const NormParams norm = zscore_fit(train_raw);
        normalized = zscore_apply(norm, series.values);

        const std::vector<double> train_norm(
            normalized.begin(), normalized.begin() + static_cast<std::ptrdiff_t>(sv.train_end));
        period = detect_period(train_norm, default_max_lag(train_norm.size()));

        truth.assign(series.size(), false);
        if (!config.labels_path.empty()) {
            try {
                const AnomalyWindows windows = load_windows(config.labels_path, dataset_key);
                truth = expand_labels(windows, series);
            } catch (const std::exception&) {
                // No labels entry: treated as anomaly-free.
            }
        }
    } catch (const std::exception& e) {
        fail("-", "-", e.what());
        return records;
    }

    const std::uint64_t dataset_seed = config.seed ^ fnv1a(dataset_key);
    const fs::path out_dir = fs::path(config.output_root) / dataset_key;

    for (ModelKind model : config.models) {
        const std::string model_name = to_string(model);
        try {
            // Per-model STL stage: fitted on train+val only; the seasonal
            // path for test positions repeats the last observed cycle.
            bool use_stl = false;
            switch (config.stl_mode) {
                case StlMode::kOn: use_stl = period.has_value(); break;
                case StlMode::kAuto:
                    use_stl = period.has_value() && model == ModelKind::kLstm;
                    break;
                case StlMode::kOff: use_stl = false; break;
            }
            std::vector<double> seasonal_ext(series.size(), 0.0);
            if (use_stl) {
                const std::size_t m = *period;
                if (sv.val_end < 2 * m) {
                    use_stl = false;
                } else {
                    const std::vector<double> head(
                        normalized.begin(),
                        normalized.begin() + static_cast<std::ptrdiff_t>(sv.val_end));
                    const StlComponents stl = stl_decompose(head, m);
                    for (std::size_t j = 0; j < sv.val_end; ++j)
                        seasonal_ext[j] = stl.seasonal[j];
                    const std::size_t base = sv.val_end - m;
                    for (std::size_t j = sv.val_end; j < series.size(); ++j)
                        seasonal_ext[j] = stl.seasonal[base + (j - base) % m];
                }
            }

            std::vector<double> model_input(series.size());
            for (std::size_t j = 0; j < series.size(); ++j)
                model_input[j] = normalized[j] - seasonal_ext[j];

            ModelRun run;
            switch (model) {
                case ModelKind::kHoltWinters:
                    run = run_holt_winters(model_input, sv, period);
                    break;
                case ModelKind::kSarima:
                    run = run_sarima(model_input, sv, period);
                    break;
                case ModelKind::kLstm:
                    run = run_lstm(model_input, sv, dataset_seed, config.lstm_max_epochs);
                    break;
            }

            // Re-seasonalize forecasts back into normalized space.
            std::vector<double> forecasts_norm(run.forecasts);
            for (std::size_t j = 0; j < forecasts_norm.size(); ++j)
                forecasts_norm[j] += seasonal_ext[run.first_index + j];

            persist_model_outputs(out_dir, model_name, series, normalized,
                                  {forecasts_norm, run.first_index, run.warmup,
                                   run.train_seconds, run.predict_seconds,
                                   run.epochs_or_iters, run.snapshot},
                                  sv);

            const std::size_t warmup = std::max(run.first_index, run.warmup);
            if (warmup + 20 > sv.train_end)
                throw std::runtime_error("too few training residuals after warm-up");
            if (run.first_index >= sv.val_end)
                throw std::runtime_error("no forecasts reach the test segment");

            auto slice = [&](std::size_t lo, std::size_t hi) {
                return compute_residuals(
                    std::vector<double>(normalized.begin() + static_cast<std::ptrdiff_t>(lo),
                                        normalized.begin() + static_cast<std::ptrdiff_t>(hi)),
                    std::vector<double>(
                        forecasts_norm.begin() + static_cast<std::ptrdiff_t>(lo - run.first_index),
                        forecasts_norm.begin() + static_cast<std::ptrdiff_t>(hi - run.first_index)),
                    lo);
            };
            const ResidualSeries train_res = slice(warmup, sv.train_end);
            const ResidualSeries test_res = slice(sv.val_end, series.size());

            const ForecastMetrics fm = forecast_metrics(
                std::vector<double>(normalized.begin() + static_cast<std::ptrdiff_t>(sv.val_end),
                                    normalized.end()),
                std::vector<double>(
                    forecasts_norm.begin() + static_cast<std::ptrdiff_t>(sv.val_end - run.first_index),
                    forecasts_norm.end()));

            const std::vector<bool> test_truth(truth.begin() + static_cast<std::ptrdiff_t>(sv.val_end),
                                               truth.end());

            for (DetectorMethod method : config.detectors) {
                const std::string detector_name = to_string(method);
                try {
                    const DetectorParams dp = fit_detector(method, train_res);
                    const DetectionOutput output = apply_detector(dp, test_res);
                    persist_detections(out_dir, model_name, detector_name, series, test_res,
                                       output);

                    EvaluationRecord rec;
                    rec.dataset = dataset_key;
                    rec.model = model_name;
                    rec.detector = detector_name;
                    rec.forecast = fm;
                    rec.detection = detection_metrics(output.labels, test_truth, output.scores);
                    rec.train_seconds = run.train_seconds;
                    rec.predict_seconds = run.predict_seconds;
                    rec.epochs_or_iters = run.epochs_or_iters;
                    rec.flags = join_flags(fm, rec.detection);
                    records.push_back(std::move(rec));
                } catch (const std::exception& e) {
                    fail(model_name, detector_name, e.what());
                }
            }
        } catch (const std::exception& e) {
            fail(model_name, "-", e.what());
        }
    }

    // Per-dataset report mirrors the corpus-level detection schema.
    try {
        fs::create_directories(out_dir);
        write_detection_csv(records, (out_dir / "report.csv").string());
    } catch (const std::exception&) {
    }
    return records;
}

BatchSummary run_batch(const RunConfig& config) {
    if (config.models.empty() || config.detectors.empty())
        throw std::invalid_argument("empty model or detector set");

    std::vector<std::pair<std::string, std::string>> datasets;  // (path, key)
    for (const auto& entry : fs::recursive_directory_iterator(config.data_root)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".csv") continue;
        datasets.emplace_back(entry.path().string(),
                              fs::relative(entry.path(), config.data_root).generic_string());
    }
    if (datasets.empty()) throw std::invalid_argument("no dataset CSVs under " + config.data_root);
    std::sort(datasets.begin(), datasets.end(),
              [](const auto& a, const auto& b) { return a.second < b.second; });

    std::vector<std::vector<EvaluationRecord>> results(datasets.size());
    std::atomic<std::size_t> next{0};
    const std::size_t workers = std::max<std::size_t>(1, std::min(config.parallelism, datasets.size()));
    auto work = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= datasets.size()) return;
            results[i] = run_dataset(config, datasets[i].first, datasets[i].second);
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }

    BatchSummary summary;
    for (std::size_t i = 0; i < datasets.size(); ++i) {
        bool dataset_ok = true;
        for (const auto& rec : results[i]) {
            if (rec.ok)
                ++summary.records_ok;
            else {
                ++summary.records_failed;
                dataset_ok = false;
            }
            summary.records.push_back(rec);
        }
        if (dataset_ok)
            ++summary.datasets_ok;
        else
            ++summary.datasets_failed;
    }

    fs::create_directories(config.output_root);
    const fs::path root(config.output_root);
    write_summary_csv(summary.records, (root / "all_datasets_summary.csv").string());
    write_detection_csv(summary.records, (root / "all_datasets_detection.csv").string());
    write_rankings_csv(aggregate_rankings(summary.records),
                       (root / "model_rankings.csv").string());
    write_failures_csv(summary.records, (root / "failures.csv").string());
    return summary;
}

std::vector<RankingRow> aggregate_rankings(const std::vector<EvaluationRecord>& records) {
    // One MAE per (dataset, model); forecast metrics repeat across detectors.
    std::map<std::string, std::map<std::string, double>> mae_by_dataset;
    for (const auto& rec : records)
        if (rec.ok) mae_by_dataset[rec.dataset][rec.model] = rec.forecast.mae;

    std::vector<RankingRow> rows;
    for (const auto& [dataset, model_maes] : mae_by_dataset) {
        for (const auto& [model, mae] : model_maes) {
            std::size_t rank = 1;
            for (const auto& [other, other_mae] : model_maes)
                if (other != model && other_mae < mae) ++rank;
            rows.push_back({dataset, model, rank});
        }
    }
    return rows;
}

void write_summary_csv(const std::vector<EvaluationRecord>& records, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "dataset,model,mae,rmse,mse,mape,pcc,euclid,dtw,cbd,r2,train_seconds,"
           "predict_seconds,epochs\n";
    std::string last_key;
    for (const auto& rec : records) {
        if (!rec.ok) continue;
        const std::string key = rec.dataset + '\x1f' + rec.model;
        if (key == last_key) continue;  // one row per (dataset, model)
        last_key = key;
        const ForecastMetrics& f = rec.forecast;
        out << rec.dataset << ',' << rec.model << ',' << fmt(f.mae) << ',' << fmt(f.rmse) << ','
            << fmt(f.mse) << ',' << fmt(f.mape) << ',' << fmt(f.pcc) << ',' << fmt(f.euclid)
            << ',' << fmt(f.dtw) << ',' << fmt(f.cbd) << ',' << fmt(f.r2) << ','
            << fmt_seconds(rec.train_seconds) << ',' << fmt_seconds(rec.predict_seconds) << ','
            << rec.epochs_or_iters << '\n';
    }
}

void write_detection_csv(const std::vector<EvaluationRecord>& records, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "dataset,model,detector,tp,fp,tn,fn,precision,recall,f1,accuracy,fpr,auc,flags\n";
    for (const auto& rec : records) {
        if (!rec.ok) continue;
        const DetectionMetrics& d = rec.detection;
        out << rec.dataset << ',' << rec.model << ',' << rec.detector << ',' << d.tp << ','
            << d.fp << ',' << d.tn << ',' << d.fn << ',' << fmt(d.precision) << ','
            << fmt(d.recall) << ',' << fmt(d.f1) << ',' << fmt(d.accuracy) << ',' << fmt(d.fpr)
            << ',' << fmt(d.auc) << ',' << rec.flags << '\n';
    }
}

void write_rankings_csv(const std::vector<RankingRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "dataset,model,mae_rank\n";
    for (const auto& row : rows)
        out << row.dataset << ',' << row.model << ',' << row.mae_rank << '\n';
}

void write_failures_csv(const std::vector<EvaluationRecord>& records, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "dataset,model,detector,error\n";
    for (const auto& rec : records) {
        if (rec.ok) continue;
        std::string msg = rec.error;
        std::replace(msg.begin(), msg.end(), ',', ';');
        std::replace(msg.begin(), msg.end(), '\n', ' ');
        out << rec.dataset << ',' << rec.model << ',' << rec.detector << ',' << msg << '\n';
    }
}

}  // namespace tsad
