#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tsad/pipeline.hpp"

namespace {

struct CliOptions {
    std::string config_file;
    std::string data_root;
    std::string labels;
    std::string out = "out";
    std::vector<std::string> models = {"holt_winters", "sarima", "lstm"};
    std::vector<std::string> detectors = {"ztest", "gaussian", "percentile", "iqr"};
    std::string stl = "auto";
    std::uint64_t seed = 42;
    std::size_t jobs = 1;
    double train_frac = 0.7;
    double val_frac = 0.15;
};

// Config file values fill in anything the flags left at defaults.
void merge_config_file(CliOptions& opt, const CLI::App& app) {
    if (opt.config_file.empty()) return;
    std::ifstream in(opt.config_file);
    if (!in) throw std::runtime_error("cannot open config file: " + opt.config_file);
    nlohmann::json doc;
    in >> doc;

    auto defaulted = [&](const std::string& flag) {
        const CLI::Option* o = app.get_option(flag);
        return o == nullptr || o->count() == 0;
    };
    if (doc.contains("data_root") && defaulted("--data-root"))
        opt.data_root = doc["data_root"].get<std::string>();
    if (doc.contains("labels") && defaulted("--labels"))
        opt.labels = doc["labels"].get<std::string>();
    if (doc.contains("out") && defaulted("--out")) opt.out = doc["out"].get<std::string>();
    if (doc.contains("models") && defaulted("--models"))
        opt.models = doc["models"].get<std::vector<std::string>>();
    if (doc.contains("detectors") && defaulted("--detectors"))
        opt.detectors = doc["detectors"].get<std::vector<std::string>>();
    if (doc.contains("stl") && defaulted("--stl")) opt.stl = doc["stl"].get<std::string>();
    if (doc.contains("seed") && defaulted("--seed")) opt.seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("jobs") && defaulted("--jobs")) opt.jobs = doc["jobs"].get<std::size_t>();
    if (doc.contains("train_frac") && defaulted("--train-frac"))
        opt.train_frac = doc["train_frac"].get<double>();
    if (doc.contains("val_frac") && defaulted("--val-frac"))
        opt.val_frac = doc["val_frac"].get<double>();
}

tsad::RunConfig to_run_config(const CliOptions& opt) {
    tsad::RunConfig config;
    config.data_root = opt.data_root;
    config.labels_path = opt.labels;
    config.output_root = opt.out;
    config.models.clear();
    for (const auto& m : opt.models) config.models.push_back(tsad::model_from_string(m));
    config.detectors.clear();
    for (const auto& d : opt.detectors)
        config.detectors.push_back(tsad::detector_from_string(d));
    config.stl_mode = tsad::stl_mode_from_string(opt.stl);
    config.seed = opt.seed;
    config.parallelism = opt.jobs;
    config.train_frac = opt.train_frac;
    config.val_frac = opt.val_frac;
    return config;
}

void add_common_flags(CLI::App* cmd, CliOptions& opt) {
    cmd->add_option("--config", opt.config_file, "JSON config file (flags override)");
    cmd->add_option("--data-root", opt.data_root, "Directory of NAB-format CSVs");
    cmd->add_option("--labels", opt.labels, "Combined anomaly-windows JSON");
    cmd->add_option("--out", opt.out, "Output directory");
    cmd->add_option("--models", opt.models, "Comma-separated models: holt_winters,sarima,lstm")
        ->delimiter(',');
    cmd->add_option("--detectors", opt.detectors,
                    "Comma-separated detectors: ztest,gaussian,percentile,iqr")
        ->delimiter(',');
    cmd->add_option("--stl", opt.stl, "STL pre-stage: auto|on|off");
    cmd->add_option("--seed", opt.seed, "Base random seed");
    cmd->add_option("--jobs", opt.jobs, "Dataset-level parallelism");
    cmd->add_option("--train-frac", opt.train_frac, "Training fraction");
    cmd->add_option("--val-frac", opt.val_frac, "Validation fraction");
}

int report_summary(const tsad::BatchSummary& summary) {
    std::cout << "datasets ok: " << summary.datasets_ok
              << ", failed: " << summary.datasets_failed
              << "; records ok: " << summary.records_ok
              << ", failed: " << summary.records_failed << "\n";
    return summary.records_failed == 0 && summary.datasets_failed == 0 ? 0 : 1;
}

int cmd_inspect(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        std::cerr << "cannot open record file: " << path << "\n";
        return 2;
    }
    std::string header;
    if (!std::getline(in, header)) {
        std::cerr << "empty record file\n";
        return 1;
    }
    std::vector<std::string> columns;
    {
        std::istringstream ss(header);
        std::string c;
        while (std::getline(ss, c, ',')) columns.push_back(c);
    }
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        std::istringstream ss(line);
        std::string cell;
        std::cout << "record " << ++row << "\n";
        for (const auto& col : columns) {
            std::getline(ss, cell, ',');
            std::cout << "  " << col << ": " << cell << "\n";
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Forecast-then-detect time-series anomaly detection toolkit"};
    app.require_subcommand(1);

    CliOptions opt;
    std::string dataset_arg;
    std::string record_arg;

    CLI::App* run = app.add_subcommand("run", "Batch-evaluate every CSV under the data root");
    add_common_flags(run, opt);

    CLI::App* run_one = app.add_subcommand("run-one", "Evaluate a single dataset CSV");
    run_one->add_option("dataset", dataset_arg, "Dataset CSV path")->required();
    add_common_flags(run_one, opt);

    CLI::App* inspect = app.add_subcommand("inspect", "Pretty-print a metrics CSV");
    inspect->add_option("record", record_arg, "Path to a report or summary CSV")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (inspect->parsed()) return cmd_inspect(record_arg);

        merge_config_file(opt, *(run->parsed() ? run : run_one));
        tsad::RunConfig config = to_run_config(opt);

        if (run->parsed()) {
            if (config.data_root.empty()) {
                std::cerr << "error: --data-root is required\n";
                return 2;
            }
            return report_summary(tsad::run_batch(config));
        }

        // run-one: dataset key is the file name; artifacts land under --out.
        const std::string key = std::filesystem::path(dataset_arg).filename().string();
        auto records = tsad::run_dataset(config, dataset_arg, key);
        tsad::write_detection_csv(records,
                                  (std::filesystem::path(config.output_root) / key /
                                   "report.csv").string());
        std::size_t failed = 0;
        for (const auto& rec : records) {
            if (!rec.ok) {
                ++failed;
                std::cout << rec.model << "/" << rec.detector << " failed: " << rec.error
                          << "\n";
                continue;
            }
            std::cout << rec.model << "/" << rec.detector << "  mae=" << rec.forecast.mae
                      << " rmse=" << rec.forecast.rmse << " f1=" << rec.detection.f1
                      << " auc=" << rec.detection.auc << "\n";
        }
        return failed == 0 ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
