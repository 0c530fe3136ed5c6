// canid: continual-learning driver-identification benchmark CLI.
// Subcommands: prepare, run, resume, plot, compare.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "canid/config.hpp"
#include "canid/plotting.hpp"
#include "canid/runner.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json read_json_file(const fs::path& path) {
    std::ifstream is(path);
    if (!is) throw canid::IoError("cannot read " + path.string());
    return json::parse(is);
}

std::string display_name(const std::string& kind, bool smoothed) {
    std::string base = kind;
    if (kind == "er") base = "ER";
    else if (kind == "derpp") base = "DER++";
    else if (kind == "ewc") base = "EWC";
    else if (kind == "lwf") base = "LwF";
    else if (kind == "finetune") base = "Fine-Tuning";
    else if (kind == "cumulative") base = "Cumulative";
    else if (kind == "joint") base = "Joint Training";
    if (!smoothed) return base;
    if (kind == "er") return "SmooER";
    if (kind == "derpp") return "SmooDER";
    return "Smoo" + base;
}

int cmd_prepare(const std::string& csv, const std::string& schema_path, bool synthetic,
                const canid::SyntheticSpec& spec, std::string output, int window_length, int stride,
                double train_fraction, const std::string& split_mode, std::uint64_t split_seed) {
    canid::RawDataset raw;
    if (synthetic) {
        raw = canid::generate_synthetic(spec);
    } else {
        canid::CsvSchema schema;
        if (!schema_path.empty()) {
            schema = canid::CsvSchema::load_json(schema_path);
        } else {
            schema.driver_column = "Class";
            schema.session_column = "PathOrder";
            schema.ignore_columns = {"Time(s)"};
        }
        raw = canid::load_csv(csv, schema);
    }
    canid::PrepareOptions opts;
    opts.window_length = window_length;
    opts.stride = stride;
    opts.train_fraction = train_fraction;
    opts.split_seed = split_seed;
    if (split_mode == "random") opts.split_mode = canid::SplitMode::Random;
    else if (split_mode != "chronological") throw canid::ConfigError("split mode must be chronological or random");

    canid::PreparedDataset ds = canid::prepare_dataset(raw, opts);

    if (output.empty()) {
        const char* cache = std::getenv("CANID_CACHE_DIR");
        if (!cache) throw canid::ConfigError("no --output given and CANID_CACHE_DIR is not set");
        output = (fs::path(cache) / "prepared" / canid::hex64(ds.content_hash)).string();
    }
    ds.save(output);
    std::cout << "prepared dataset: " << output << "\n"
              << "  drivers: " << ds.driver_ids.size() << ", sessions: " << ds.sessions.size() << "\n"
              << "  features: " << ds.train.features << " (dropped "
              << ds.mask.dropped_names.size() << " zero-variance)\n"
              << "  train windows: " << ds.train.size() << ", test windows: " << ds.test.size() << "\n"
              << "  content hash: " << canid::hex64(ds.content_hash) << "\n";
    return 0;
}

int cmd_run(const std::string& config_path, const std::string& output_override, int workers_override,
            int epochs_override, int smoothing_window_override, int threads, int stop_after) {
    canid::ExperimentConfig cfg = canid::ExperimentConfig::load(config_path);
    if (!output_override.empty()) cfg.output_dir = output_override;
    if (workers_override > 0) cfg.workers = workers_override;
    if (threads > 0) canid::nn::set_max_threads(threads);

    canid::RunOptions opts;
    opts.epochs_override = epochs_override;
    opts.smoothing_window_override = smoothing_window_override;
    opts.stop_after_task = stop_after;

    canid::ExperimentRunner runner(std::move(cfg), opts);
    canid::AggregateReport agg = runner.run();
    bool all_complete = true;
    for (const canid::MetricsReport& r : agg.runs) all_complete = all_complete && r.complete;
    if (agg.runs.empty() || !all_complete || stop_after > 0) {
        std::cout << "run interrupted (" << agg.runs.size() << " runs complete); resume with "
                  << "`canid resume " << runner.config().output_dir << "`\n";
        return 3;
    }
    std::cout << "runs: " << agg.runs.size() << "\n"
              << "mean final accuracy (raw): " << agg.mean_final_raw * 100.0 << "%\n";
    if (!std::isnan(agg.mean_final_smoothed))
        std::cout << "mean final accuracy (smoothed): " << agg.mean_final_smoothed * 100.0 << "%\n";
    if (!std::isnan(agg.gap_raw)) std::cout << "gap vs joint (raw): " << agg.gap_raw << " points\n";
    std::cout << "report: " << (fs::path(runner.config().output_dir) / "report.json").string() << "\n";
    return 0;
}

int cmd_resume(const std::string& run_dir, int epochs_override, int threads) {
    if (threads > 0) canid::nn::set_max_threads(threads);
    canid::RunOptions opts;
    opts.epochs_override = epochs_override;
    canid::AggregateReport agg = canid::ExperimentRunner::resume(run_dir, opts);
    std::cout << "resumed " << run_dir << ": " << agg.runs.size() << " runs complete\n";
    return 0;
}

int cmd_plot(const std::vector<std::string>& report_paths, const std::string& output_dir) {
    if (report_paths.empty()) throw canid::ConfigError("no reports given");
    fs::create_directories(output_dir);

    std::string scenario;
    std::vector<canid::Series> acc_series, time_series;
    for (const std::string& p : report_paths) {
        canid::AggregateReport agg = canid::AggregateReport::from_json(read_json_file(p));
        std::string kind = agg.config_echo.at("scenario").at("kind").get<std::string>();
        if (scenario.empty()) scenario = kind;
        else if (scenario != kind)
            throw canid::ConfigError("reports mix scenarios (" + scenario + " vs " + kind + ")");
        std::string strat = agg.config_echo.at("strategy").at("kind").get<std::string>();

        canid::Series raw;
        raw.name = display_name(strat, false);
        for (std::size_t t = 0; t < agg.per_task_mean_raw.size(); ++t) {
            raw.x.push_back(static_cast<double>(t + 1));
            raw.y.push_back(agg.per_task_mean_raw[t] * 100.0);
        }
        acc_series.push_back(std::move(raw));
        if (!agg.per_task_mean_smoothed.empty()) {
            canid::Series smoo;
            smoo.name = display_name(strat, true);
            for (std::size_t t = 0; t < agg.per_task_mean_smoothed.size(); ++t) {
                smoo.x.push_back(static_cast<double>(t + 1));
                smoo.y.push_back(agg.per_task_mean_smoothed[t] * 100.0);
            }
            acc_series.push_back(std::move(smoo));
        }

        fs::path timing = fs::path(p).parent_path() / "timing.json";
        if (fs::exists(timing)) {
            json jt = read_json_file(timing);
            canid::Series ts;
            ts.name = display_name(strat, agg.config_echo.at("smoothing").at("enabled").get<bool>());
            std::vector<double> mean;
            std::size_t n_runs = 0;
            for (const json& run : jt.at("runs")) {
                const auto per = run.at("per_task_seconds").get<std::vector<double>>();
                if (mean.size() < per.size()) mean.resize(per.size(), 0.0);
                for (std::size_t t = 0; t < per.size(); ++t) mean[t] += per[t];
                ++n_runs;
            }
            for (std::size_t t = 0; t < mean.size(); ++t) {
                ts.x.push_back(static_cast<double>(t + 1));
                ts.y.push_back(mean[t] / static_cast<double>(n_runs));
            }
            time_series.push_back(std::move(ts));
        }
    }

    canid::write_line_chart_svg(fs::path(output_dir) / "accuracy_vs_task.svg",
                                "Test accuracy per task (" + scenario + ")", "task", "accuracy [%]",
                                acc_series);
    canid::write_points_csv(fs::path(output_dir) / "accuracy_vs_task.csv", acc_series);
    if (!time_series.empty()) {
        canid::write_line_chart_svg(fs::path(output_dir) / "time_per_task.svg",
                                    "Training time per task (" + scenario + ")", "task", "seconds",
                                    time_series);
        canid::write_points_csv(fs::path(output_dir) / "time_per_task.csv", time_series);
    }
    std::cout << "wrote plots to " << output_dir << "\n";
    return 0;
}

int cmd_compare(const std::vector<std::string>& report_paths, const std::string& output_path) {
    if (report_paths.empty()) throw canid::ConfigError("no reports given");

    struct Row {
        std::string method;
        std::map<std::string, double> acc; // scenario -> percentage
    };
    std::map<std::string, double> joint_acc; // scenario -> joint percentage
    std::vector<Row> rows;
    std::vector<std::string> scenarios;

    auto add_value = [&](const std::string& method, const std::string& scenario, double acc_pct) {
        if (std::find(scenarios.begin(), scenarios.end(), scenario) == scenarios.end())
            scenarios.push_back(scenario);
        for (Row& r : rows)
            if (r.method == method) {
                r.acc[scenario] = acc_pct;
                return;
            }
        Row r;
        r.method = method;
        r.acc[scenario] = acc_pct;
        rows.push_back(std::move(r));
    };

    for (const std::string& p : report_paths) {
        canid::AggregateReport agg = canid::AggregateReport::from_json(read_json_file(p));
        std::string scenario = agg.config_echo.at("scenario").at("kind").get<std::string>();
        std::string strat = agg.config_echo.at("strategy").at("kind").get<std::string>();
        add_value(display_name(strat, false), scenario, agg.mean_final_raw * 100.0);
        if (!std::isnan(agg.mean_final_smoothed))
            add_value(display_name(strat, true), scenario, agg.mean_final_smoothed * 100.0);
        if (strat == "joint") joint_acc[scenario] = agg.mean_final_raw * 100.0;
    }

    std::ostringstream text, csv;
    csv << "method";
    for (const std::string& s : scenarios) csv << ',' << s << "_acc," << s << "_gap";
    csv << '\n';
    text << "Final accuracy (ACC, %) and gap vs Joint Training (points)\n\n";
    {
        char buf[256];
        std::snprintf(buf, sizeof(buf), "%-16s", "method");
        text << buf;
        for (const std::string& s : scenarios) {
            std::snprintf(buf, sizeof(buf), " | %-10s ACC    gap", s.c_str());
            text << buf;
        }
        text << '\n' << std::string(16 + scenarios.size() * 26, '-') << '\n';
    }
    for (const Row& r : rows) {
        char buf[256];
        std::snprintf(buf, sizeof(buf), "%-16s", r.method.c_str());
        text << buf;
        csv << r.method;
        for (const std::string& s : scenarios) {
            if (r.acc.count(s)) {
                double acc = r.acc.at(s);
                bool has_gap = joint_acc.count(s) && r.method != "Joint Training";
                if (has_gap) {
                    std::snprintf(buf, sizeof(buf), " | %17.2f %6.2f", acc, joint_acc.at(s) - acc);
                    csv << ',' << acc << ',' << (joint_acc.at(s) - acc);
                } else {
                    std::snprintf(buf, sizeof(buf), " | %17.2f      -", acc);
                    csv << ',' << acc << ',';
                }
                text << buf;
            } else {
                std::snprintf(buf, sizeof(buf), " | %17s      -", "-");
                text << buf;
                csv << ",,";
            }
        }
        text << '\n';
        csv << '\n';
    }

    std::cout << text.str();
    if (!output_path.empty()) {
        std::ofstream ot(fs::path(output_path).string() + ".txt");
        ot << text.str();
        std::ofstream oc(fs::path(output_path).string() + ".csv");
        oc << csv.str();
        std::cout << "wrote " << output_path << ".txt and " << output_path << ".csv\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"canid: continual-learning driver-identification benchmark"};
    app.require_subcommand(1);

    // prepare
    auto* prepare = app.add_subcommand("prepare", "standardize, window and split a dataset");
    std::string csv_path, schema_path, prep_output;
    bool synthetic = false;
    canid::SyntheticSpec spec;
    int window_length = 60, stride = 6;
    double train_fraction = 0.7;
    std::string split_mode = "chronological";
    std::uint64_t split_seed = 0;
    prepare->add_option("--csv", csv_path, "sensor-log CSV file");
    prepare->add_option("--schema", schema_path, "column-role schema JSON");
    prepare->add_flag("--synthetic", synthetic, "generate a synthetic dataset instead");
    prepare->add_option("--drivers", spec.n_drivers, "synthetic: driver count");
    prepare->add_option("--sessions", spec.sessions_per_driver, "synthetic: sessions per driver");
    prepare->add_option("--records", spec.records_per_session, "synthetic: records per session");
    prepare->add_option("--features", spec.n_features, "synthetic: feature count");
    prepare->add_option("--seed", spec.seed, "synthetic: generator seed");
    prepare->add_option("--output", prep_output, "output directory (default: under CANID_CACHE_DIR)");
    prepare->add_option("--window-length", window_length, "window length in records");
    prepare->add_option("--stride", stride, "window stride in records");
    prepare->add_option("--train-fraction", train_fraction, "train split fraction");
    prepare->add_option("--split", split_mode, "split mode: chronological|random");
    prepare->add_option("--split-seed", split_seed, "seed for the random split mode");

    // run
    auto* run = app.add_subcommand("run", "execute an experiment from a config file");
    std::string config_path, run_output;
    int workers = 0, epochs = 0, smoothing_window = 0, threads = 0, stop_after = 0;
    run->add_option("--config", config_path, "experiment config JSON")->required();
    run->add_option("--output", run_output, "override output_dir");
    run->add_option("--workers", workers, "override worker count");
    run->add_option("--epochs", epochs, "override epochs per task");
    run->add_option("--smoothing-window", smoothing_window, "override smoothing window");
    run->add_option("--threads", threads, "cap kernel threads (0 = OpenMP default)");
    run->add_option("--stop-after", stop_after, "leave runs incomplete after N tasks (for resume)");

    // resume
    auto* resume = app.add_subcommand("resume", "continue an interrupted experiment directory");
    std::string resume_dir;
    int resume_epochs = 0, resume_threads = 0;
    resume->add_option("dir", resume_dir, "experiment output directory")->required();
    resume->add_option("--epochs", resume_epochs, "override epochs per task");
    resume->add_option("--threads", resume_threads, "cap kernel threads");

    // plot
    auto* plot = app.add_subcommand("plot", "emit accuracy/time charts from aggregate reports");
    std::vector<std::string> plot_reports;
    std::string plot_output = "plots";
    plot->add_option("reports", plot_reports, "aggregate report.json files")->required();
    plot->add_option("--output", plot_output, "output directory");

    // compare
    auto* compare = app.add_subcommand("compare", "tabulate ACC and gap across reports");
    std::vector<std::string> compare_reports;
    std::string compare_output;
    compare->add_option("reports", compare_reports, "aggregate report.json files")->required();
    compare->add_option("--output", compare_output, "output path stem (.txt/.csv)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (prepare->parsed()) {
            if (!synthetic && csv_path.empty())
                throw canid::ConfigError("prepare needs --csv or --synthetic");
            return cmd_prepare(csv_path, schema_path, synthetic, spec, prep_output, window_length,
                               stride, train_fraction, split_mode, split_seed);
        }
        if (run->parsed())
            return cmd_run(config_path, run_output, workers, epochs, smoothing_window, threads,
                           stop_after);
        if (resume->parsed()) return cmd_resume(resume_dir, resume_epochs, resume_threads);
        if (plot->parsed()) return cmd_plot(plot_reports, plot_output);
        if (compare->parsed()) return cmd_compare(compare_reports, compare_output);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
