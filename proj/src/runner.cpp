#include "canid/runner.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <mutex>
#include <thread>

namespace canid {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Report serialization
// ---------------------------------------------------------------------------

json MetricsReport::to_json() const {
    json j;
    j["seed"] = seed;
    j["permutation"] = permutation;
    j["complete"] = complete;
    j["smoothing_enabled"] = smoothing_enabled;
    j["final_accuracy_raw"] = final_accuracy_raw;
    if (smoothing_enabled) j["final_accuracy_smoothed"] = final_accuracy_smoothed;
    j["tasks"] = json::array();
    for (const TaskRecord& t : tasks) {
        json jt;
        jt["task_id"] = t.task_id;
        jt["accuracy_raw"] = t.accuracy_raw;
        if (smoothing_enabled) jt["accuracy_smoothed"] = t.accuracy_smoothed;
        jt["final_epoch_loss"] = t.final_epoch_loss;
        jt["epochs_run"] = t.epochs_run;
        jt["strategy_bytes"] = t.strategy_bytes;
        json pd = json::object();
        for (const auto& [driver, acc] : t.per_driver_accuracy) pd[std::to_string(driver)] = acc;
        jt["per_driver_accuracy"] = pd;
        j["tasks"].push_back(jt);
    }
    return j;
}

json MetricsReport::timing_json() const {
    json j;
    j["seed"] = seed;
    j["permutation"] = permutation;
    json per = json::array();
    double total = 0.0;
    for (const TaskRecord& t : tasks) {
        per.push_back(t.train_seconds);
        total += t.train_seconds;
    }
    j["per_task_seconds"] = per;
    j["total_seconds"] = total;
    return j;
}

MetricsReport MetricsReport::from_json(const json& j) {
    MetricsReport r;
    r.seed = j.at("seed").get<std::uint64_t>();
    r.permutation = j.at("permutation").get<std::uint64_t>();
    r.complete = j.at("complete").get<bool>();
    r.smoothing_enabled = j.at("smoothing_enabled").get<bool>();
    r.final_accuracy_raw = j.at("final_accuracy_raw").get<double>();
    if (j.contains("final_accuracy_smoothed"))
        r.final_accuracy_smoothed = j["final_accuracy_smoothed"].get<double>();
    for (const json& jt : j.at("tasks")) {
        TaskRecord t;
        t.task_id = jt.at("task_id").get<int>();
        t.accuracy_raw = jt.at("accuracy_raw").get<double>();
        if (jt.contains("accuracy_smoothed")) t.accuracy_smoothed = jt["accuracy_smoothed"].get<double>();
        t.final_epoch_loss = jt.at("final_epoch_loss").get<double>();
        t.epochs_run = jt.at("epochs_run").get<int>();
        t.strategy_bytes = jt.at("strategy_bytes").get<std::uint64_t>();
        if (jt.contains("per_driver_accuracy"))
            for (const auto& [key, value] : jt["per_driver_accuracy"].items())
                t.per_driver_accuracy[std::stoi(key)] = value.get<double>();
        r.tasks.push_back(std::move(t));
    }
    return r;
}

void AggregateReport::aggregate() {
    if (runs.empty()) return;
    auto mean_std = [](const std::vector<double>& v) {
        double m = 0.0;
        for (double x : v) m += x;
        m /= static_cast<double>(v.size());
        double s = 0.0;
        for (double x : v) s += (x - m) * (x - m);
        return std::make_pair(m, std::sqrt(s / static_cast<double>(v.size())));
    };
    std::vector<double> raw, smoothed;
    for (const MetricsReport& r : runs) {
        raw.push_back(r.final_accuracy_raw);
        if (r.smoothing_enabled) smoothed.push_back(r.final_accuracy_smoothed);
    }
    std::tie(mean_final_raw, std_final_raw) = mean_std(raw);
    if (!smoothed.empty()) std::tie(mean_final_smoothed, std_final_smoothed) = mean_std(smoothed);

    const std::size_t T = runs.front().tasks.size();
    per_task_mean_raw.assign(T, 0.0);
    per_task_mean_smoothed.assign(T, 0.0);
    bool any_smoothed = !smoothed.empty();
    for (const MetricsReport& r : runs)
        for (std::size_t t = 0; t < T && t < r.tasks.size(); ++t) {
            per_task_mean_raw[t] += r.tasks[t].accuracy_raw / static_cast<double>(runs.size());
            if (r.smoothing_enabled)
                per_task_mean_smoothed[t] += r.tasks[t].accuracy_smoothed / static_cast<double>(runs.size());
        }
    if (!any_smoothed) per_task_mean_smoothed.clear();

    per_permutation_mean.clear();
    std::map<std::uint64_t, std::pair<double, int>> acc;
    for (const MetricsReport& r : runs) {
        acc[r.permutation].first += r.final_accuracy();
        acc[r.permutation].second += 1;
    }
    double mm = 0.0;
    for (const auto& [perm, pair] : acc) {
        double m = pair.first / pair.second;
        per_permutation_mean[perm] = m;
        mm += m;
    }
    mean_of_permutation_means = mm / static_cast<double>(acc.size());
}

json AggregateReport::to_json() const {
    json j;
    j["config"] = config_echo;
    j["dataset_hash"] = dataset_hash;
    j["runs"] = json::array();
    for (const MetricsReport& r : runs) j["runs"].push_back(r.to_json());
    j["mean_final_raw"] = mean_final_raw;
    j["std_final_raw"] = std_final_raw;
    if (!std::isnan(mean_final_smoothed)) {
        j["mean_final_smoothed"] = mean_final_smoothed;
        j["std_final_smoothed"] = std_final_smoothed;
    }
    j["per_task_mean_raw"] = per_task_mean_raw;
    if (!per_task_mean_smoothed.empty()) j["per_task_mean_smoothed"] = per_task_mean_smoothed;
    json pp = json::object();
    for (const auto& [perm, m] : per_permutation_mean) pp[std::to_string(perm)] = m;
    j["per_permutation_mean"] = pp;
    j["mean_of_permutation_means"] = mean_of_permutation_means;
    if (!std::isnan(gap_raw)) j["gap_raw"] = gap_raw;
    if (!std::isnan(gap_smoothed)) j["gap_smoothed"] = gap_smoothed;
    return j;
}

AggregateReport AggregateReport::from_json(const json& j) {
    AggregateReport a;
    a.config_echo = j.at("config");
    a.dataset_hash = j.at("dataset_hash").get<std::string>();
    for (const json& jr : j.at("runs")) a.runs.push_back(MetricsReport::from_json(jr));
    a.mean_final_raw = j.at("mean_final_raw").get<double>();
    a.std_final_raw = j.at("std_final_raw").get<double>();
    if (j.contains("mean_final_smoothed")) {
        a.mean_final_smoothed = j["mean_final_smoothed"].get<double>();
        a.std_final_smoothed = j["std_final_smoothed"].get<double>();
    }
    a.per_task_mean_raw = j.at("per_task_mean_raw").get<std::vector<double>>();
    if (j.contains("per_task_mean_smoothed"))
        a.per_task_mean_smoothed = j["per_task_mean_smoothed"].get<std::vector<double>>();
    if (j.contains("per_permutation_mean"))
        for (const auto& [key, value] : j["per_permutation_mean"].items())
            a.per_permutation_mean[std::stoull(key)] = value.get<double>();
    if (j.contains("mean_of_permutation_means"))
        a.mean_of_permutation_means = j["mean_of_permutation_means"].get<double>();
    if (j.contains("gap_raw")) a.gap_raw = j["gap_raw"].get<double>();
    if (j.contains("gap_smoothed")) a.gap_smoothed = j["gap_smoothed"].get<double>();
    return a;
}

// ---------------------------------------------------------------------------
// Runner
// ---------------------------------------------------------------------------

namespace {

void write_json_file(const std::filesystem::path& path, const json& j) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot write " + path.string());
    os << j.dump(2) << '\n';
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot read " + path.string());
    return json::parse(is);
}

bool streams_equal(const TaskStream& a, const TaskStream& b) {
    if (a.kind != b.kind || a.permutation != b.permutation || a.tasks.size() != b.tasks.size())
        return false;
    for (std::size_t i = 0; i < a.tasks.size(); ++i) {
        if (a.tasks[i].classes_introduced != b.tasks[i].classes_introduced) return false;
        if (a.tasks[i].sessions_included != b.tasks[i].sessions_included) return false;
        if (a.tasks[i].train_windows != b.tasks[i].train_windows) return false;
    }
    return true;
}

void write_trace_csv(const std::filesystem::path& path, const EvalResult& ev) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot write trace: " + path.string());
    os << "driver,session,index,raw_pred,smooth_pred,raw_logits,smoothed_logits\n";
    for (const WindowPrediction& p : ev.trace) {
        os << p.driver << ',' << p.session << ',' << p.index << ',' << p.raw_pred << ','
           << p.smooth_pred << ',';
        os << '"';
        for (std::size_t i = 0; i < p.raw_logits.size(); ++i)
            os << (i ? ";" : "") << p.raw_logits[i];
        os << "\",\"";
        for (std::size_t i = 0; i < p.smoothed_logits.size(); ++i)
            os << (i ? ";" : "") << p.smoothed_logits[i];
        os << "\"\n";
    }
}

} // namespace

ExperimentRunner::ExperimentRunner(ExperimentConfig config, RunOptions opts)
    : config_(std::move(config)), opts_(opts) {
    config_.validate();
    if (config_.dataset.synthetic) {
        PrepareOptions po;
        po.window_length = config_.dataset.window_length;
        po.stride = config_.dataset.stride;
        po.train_fraction = config_.dataset.train_fraction;
        dataset_ = prepare_dataset(generate_synthetic(*config_.dataset.synthetic), po);
    } else {
        dataset_ = PreparedDataset::load(config_.dataset.prepared_dir);
    }
}

ClassifierConfig ExperimentRunner::resolved_model_config() const {
    ClassifierConfig mc = config_.model;
    mc.input_features = dataset_.train.features;
    mc.window_length = dataset_.window_length;
    mc.max_classes = std::max(mc.max_classes, static_cast<int>(dataset_.driver_ids.size()));
    mc.validate();
    return mc;
}

TaskStream ExperimentRunner::build_stream(std::uint64_t permutation) const {
    switch (config_.scenario.kind) {
        case ScenarioKind::TwoNewDrivers:
            return build_scenario1(dataset_, permute_classes(dataset_.driver_ids, permutation), permutation);
        case ScenarioKind::OneNewDriver:
            return build_scenario2(dataset_, permute_classes(dataset_.driver_ids, permutation), permutation);
        case ScenarioKind::TwoNewSessions:
            return build_scenario3(dataset_, permutation);
        case ScenarioKind::Custom:
            return build_class_groups(dataset_, permute_classes(dataset_.driver_ids, permutation),
                                      config_.scenario.group_sizes, ScenarioKind::Custom, permutation);
    }
    throw ConfigError("unknown scenario kind");
}

MetricsReport ExperimentRunner::execute_stream(std::uint64_t seed, std::uint64_t permutation,
                                               const TaskStream& stream,
                                               const std::filesystem::path* run_dir,
                                               bool* incomplete) {
    const std::uint64_t run_base = derive_seed(seed, "perm", permutation);
    const ClassifierConfig mc = resolved_model_config();
    const int T = static_cast<int>(stream.tasks.size());
    const int smoothing_window =
        opts_.smoothing_window_override > 0 ? opts_.smoothing_window_override : config_.smoothing.window;

    MetricsReport report;
    report.seed = seed;
    report.permutation = permutation;
    report.smoothing_enabled = config_.smoothing.enabled;

    std::unique_ptr<Strategy> strategy = make_strategy(config_.strategy, config_.strategy_params);

    auto eval_options = [&](int t) {
        EvalOptions eo;
        eo.smoothing = config_.smoothing.enabled;
        eo.smoothing_window = smoothing_window;
        eo.capture_trace = config_.export_traces && run_dir != nullptr && t == T;
        return eo;
    };
    auto accounting = [&](int t) {
        ByteAccounting ba;
        ba.window_length = dataset_.window_length;
        ba.features = dataset_.train.features;
        ba.max_classes = mc.max_classes;
        std::size_t seen = 0;
        for (int i = 0; i < t; ++i) seen += stream.tasks[static_cast<std::size_t>(i)].train_windows.size();
        ba.windows_seen = seen;
        ba.param_count = mc.dims().param_count();
        return ba;
    };
    auto record_task = [&](int t, const EvalResult& ev, const TrainingLog& tlog) {
        TaskRecord rec;
        rec.task_id = t;
        rec.accuracy_raw = ev.accuracy_raw();
        if (config_.smoothing.enabled) rec.accuracy_smoothed = ev.accuracy_smoothed();
        rec.final_epoch_loss = tlog.epochs.empty() ? 0.0 : tlog.epochs.back().mean_loss;
        rec.epochs_run = static_cast<int>(tlog.epochs.size());
        rec.train_seconds = tlog.seconds;
        rec.strategy_bytes = account_strategy_bytes(*strategy, accounting(t));
        for (const auto& [driver, counts] : ev.per_driver_raw)
            rec.per_driver_accuracy[driver] =
                counts.total == 0 ? 0.0 : static_cast<double>(counts.correct) / static_cast<double>(counts.total);
        return rec;
    };

    if (config_.strategy == StrategyKind::Joint) {
        // the joint upper bound trains once, from scratch, on the full
        // cumulative pool, then is evaluated against every task's eval set
        LstmClassifier model(mc, derive_seed(run_base, "init"));
        for (const Task& task : stream.tasks) model.register_classes(task.classes_introduced);
        TaskContext ctx{&dataset_, &stream, T};
        std::vector<std::uint32_t> effective = stream.tasks.back().train_windows;
        strategy->before_task(model, ctx, effective);
        TrainingLog tlog = train_task(model, dataset_.train, effective, *strategy,
                                      derive_seed(run_base, "task", static_cast<std::uint64_t>(T)),
                                      opts_.epochs_override);
        for (int t = 1; t <= T; ++t) {
            EvalResult ev = evaluate(model, dataset_, eval_set(stream, t, dataset_), eval_options(t));
            TaskRecord rec = record_task(t, ev, t == T ? tlog : TrainingLog{});
            report.tasks.push_back(std::move(rec));
            if (t == T && config_.export_traces && run_dir)
                write_trace_csv(*run_dir / ("trace_task" + std::to_string(t) + ".csv"), ev);
        }
        if (run_dir) model.save_checkpoint(*run_dir / "state" / "checkpoint.bin");
        report.complete = true;
    } else {
        std::optional<LstmClassifier> model;
        int completed = 0;

        if (run_dir) {
            std::filesystem::create_directories(*run_dir / "state");
            std::filesystem::path progress_path = *run_dir / "progress.json";
            if (std::filesystem::exists(progress_path)) {
                json p = read_json_file(progress_path);
                completed = p.at("completed_tasks").get<int>();
                for (const json& jt : p.at("tasks")) {
                    TaskRecord rec;
                    rec.task_id = jt.at("task_id").get<int>();
                    rec.accuracy_raw = jt.at("accuracy_raw").get<double>();
                    if (jt.contains("accuracy_smoothed"))
                        rec.accuracy_smoothed = jt["accuracy_smoothed"].get<double>();
                    rec.final_epoch_loss = jt.at("final_epoch_loss").get<double>();
                    rec.epochs_run = jt.at("epochs_run").get<int>();
                    rec.strategy_bytes = jt.at("strategy_bytes").get<std::uint64_t>();
                    rec.train_seconds = jt.at("train_seconds").get<double>();
                    if (jt.contains("per_driver_accuracy"))
                        for (const auto& [key, value] : jt["per_driver_accuracy"].items())
                            rec.per_driver_accuracy[std::stoi(key)] = value.get<double>();
                    report.tasks.push_back(std::move(rec));
                }
                if (completed > 0) {
                    model.emplace(LstmClassifier::load_checkpoint(*run_dir / "state" / "checkpoint.bin"));
                    if (model->config().dims().param_count() != mc.dims().param_count())
                        throw StateError("checkpoint does not match the configured model");
                    strategy->load_state(*run_dir / "state");
                }
            }
        }
        if (!model) model.emplace(mc, derive_seed(run_base, "init"));

        auto write_progress = [&](int done) {
            if (!run_dir) return;
            json p;
            p["completed_tasks"] = done;
            p["incomplete"] = done < T;
            p["tasks"] = json::array();
            for (const TaskRecord& rec : report.tasks) {
                json jt;
                jt["task_id"] = rec.task_id;
                jt["accuracy_raw"] = rec.accuracy_raw;
                if (config_.smoothing.enabled) jt["accuracy_smoothed"] = rec.accuracy_smoothed;
                jt["final_epoch_loss"] = rec.final_epoch_loss;
                jt["epochs_run"] = rec.epochs_run;
                jt["strategy_bytes"] = rec.strategy_bytes;
                jt["train_seconds"] = rec.train_seconds;
                json pd = json::object();
                for (const auto& [driver, acc] : rec.per_driver_accuracy) pd[std::to_string(driver)] = acc;
                jt["per_driver_accuracy"] = pd;
                p["tasks"].push_back(jt);
            }
            write_json_file(*run_dir / "progress.json", p);
        };

        for (int t = completed + 1; t <= T; ++t) {
            const Task& task = stream.tasks[static_cast<std::size_t>(t - 1)];
            TaskContext ctx{&dataset_, &stream, t};
            std::vector<std::uint32_t> effective = task.train_windows;
            strategy->before_task(*model, ctx, effective);
            model->register_classes(task.classes_introduced);
            TrainingLog tlog = train_task(*model, dataset_.train, effective, *strategy,
                                          derive_seed(run_base, "task", static_cast<std::uint64_t>(t)),
                                          opts_.epochs_override);
            Rng after_rng(derive_seed(run_base, "memory", static_cast<std::uint64_t>(t)));
            strategy->after_task(*model, ctx, task.train_windows, after_rng);

            EvalResult ev = evaluate(*model, dataset_, eval_set(stream, t, dataset_), eval_options(t));
            report.tasks.push_back(record_task(t, ev, tlog));
            if (config_.export_traces && run_dir && t == T)
                write_trace_csv(*run_dir / ("trace_task" + std::to_string(t) + ".csv"), ev);

            if (run_dir) {
                model->save_checkpoint(*run_dir / "state" / "checkpoint.bin");
                strategy->save_state(*run_dir / "state");
                write_progress(t);
            }
            if (opts_.stop_after_task > 0 && t >= opts_.stop_after_task && t < T) {
                if (incomplete) *incomplete = true;
                report.complete = false;
                return report;
            }
        }
        report.complete = true;
    }

    if (!report.tasks.empty()) {
        report.final_accuracy_raw = report.tasks.back().accuracy_raw;
        report.final_accuracy_smoothed = report.tasks.back().accuracy_smoothed;
    }
    return report;
}

MetricsReport ExperimentRunner::run_single(std::uint64_t seed, std::uint64_t permutation,
                                           const std::filesystem::path& run_dir, bool* incomplete) {
    std::filesystem::path report_path = run_dir / "report.json";
    if (std::filesystem::exists(report_path)) {
        // already complete: resuming is a no-op
        return MetricsReport::from_json(read_json_file(report_path));
    }
    std::filesystem::create_directories(run_dir / "state");

    TaskStream stream = build_stream(permutation);
    std::filesystem::path manifest_path = run_dir / "stream.json";
    if (std::filesystem::exists(manifest_path)) {
        TaskStream existing = TaskStream::load_manifest(manifest_path, dataset_);
        if (!streams_equal(existing, stream))
            throw StateError("existing stream manifest does not match this configuration: " +
                             manifest_path.string());
    } else {
        stream.save_manifest(manifest_path);
    }

    MetricsReport report = execute_stream(seed, permutation, stream, &run_dir, incomplete);
    if (report.complete) {
        json j = report.to_json();
        j["config"] = result_config_echo();
        j["dataset_hash"] = hex64(dataset_.content_hash);
        write_json_file(report_path, j);
        write_json_file(run_dir / "timing.json", report.timing_json());
    }
    return report;
}

json ExperimentRunner::result_config_echo() const {
    json echo = config_.to_json();
    echo.erase("output_dir");
    echo.erase("workers");
    return echo;
}

MetricsReport ExperimentRunner::run_cell_in_memory(std::uint64_t seed, std::uint64_t permutation) {
    TaskStream stream = build_stream(permutation);
    return execute_stream(seed, permutation, stream, nullptr, nullptr);
}

AggregateReport ExperimentRunner::run() {
    if (config_.output_dir.empty()) throw ConfigError("output_dir is required to run experiments");
    std::filesystem::path out(config_.output_dir);
    std::filesystem::create_directories(out / "runs");

    json echo = config_.to_json();
    std::filesystem::path config_path = out / "config.json";
    if (std::filesystem::exists(config_path)) {
        // compare result-affecting fields so a moved directory still resumes
        json stored = read_json_file(config_path);
        stored.erase("output_dir");
        stored.erase("workers");
        if (stored != result_config_echo())
            throw StateError("output directory was created with a different configuration: " +
                             config_path.string());
    } else {
        write_json_file(config_path, echo);
    }

    struct Cell {
        std::uint64_t seed, perm;
    };
    std::vector<Cell> cells;
    for (std::uint64_t s : config_.seeds)
        for (std::uint64_t p : config_.permutations) cells.push_back({s, p});

    std::vector<MetricsReport> reports(cells.size());
    std::vector<char> incomplete(cells.size(), 0);
    std::mutex err_mutex;
    std::string first_error;

    auto work = [&](std::size_t i) {
        const Cell& c = cells[i];
        std::filesystem::path run_dir =
            out / "runs" / ("s" + std::to_string(c.seed) + "_p" + std::to_string(c.perm));
        try {
            bool inc = false;
            reports[i] = run_single(c.seed, c.perm, run_dir, &inc);
            incomplete[i] = inc ? 1 : 0;
        } catch (const std::exception& e) {
            std::lock_guard<std::mutex> lock(err_mutex);
            if (first_error.empty())
                first_error = "[seed " + std::to_string(c.seed) + " perm " + std::to_string(c.perm) +
                              "] " + e.what();
        }
    };

    if (config_.workers <= 1) {
        for (std::size_t i = 0; i < cells.size(); ++i) work(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        int n = std::min<int>(config_.workers, static_cast<int>(cells.size()));
        for (int w = 0; w < n; ++w)
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < cells.size(); i = next.fetch_add(1)) work(i);
            });
        for (std::thread& th : pool) th.join();
    }
    if (!first_error.empty()) throw StateError(first_error);

    AggregateReport agg;
    // the report echoes the result-affecting configuration; where it ran and
    // with how many workers does not belong in a byte-reproducible artifact
    agg.config_echo = result_config_echo();
    agg.dataset_hash = hex64(dataset_.content_hash);
    bool any_incomplete = false;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (incomplete[i]) {
            any_incomplete = true;
            continue;
        }
        agg.runs.push_back(reports[i]);
    }
    if (any_incomplete) return agg; // no aggregate artifacts for partial grids
    agg.aggregate();

    // gap against a joint reference sharing the seed grid
    if (config_.strategy == StrategyKind::Joint) {
        agg.gap_raw = 0.0;
        if (config_.smoothing.enabled) agg.gap_smoothed = 0.0;
    } else if (!config_.joint_reference.empty()) {
        AggregateReport joint = AggregateReport::from_json(read_json_file(config_.joint_reference));
        std::map<std::pair<std::uint64_t, std::uint64_t>, double> joint_final;
        for (const MetricsReport& r : joint.runs) joint_final[{r.seed, r.permutation}] = r.final_accuracy_raw;
        auto mean_gap = [&](auto final_of) {
            double total = 0.0;
            int n = 0;
            for (const MetricsReport& r : agg.runs) {
                auto it = joint_final.find({r.seed, r.permutation});
                double ref = it != joint_final.end() ? it->second : joint.mean_final_raw;
                total += compute_gap(final_of(r) * 100.0, ref * 100.0);
                ++n;
            }
            return n > 0 ? total / n : std::numeric_limits<double>::quiet_NaN();
        };
        agg.gap_raw = mean_gap([](const MetricsReport& r) { return r.final_accuracy_raw; });
        if (config_.smoothing.enabled)
            agg.gap_smoothed = mean_gap([](const MetricsReport& r) { return r.final_accuracy_smoothed; });
    }

    write_json_file(out / "report.json", agg.to_json());
    {
        std::ofstream os(out / "report.csv");
        os << "task,mean_accuracy_raw";
        if (!agg.per_task_mean_smoothed.empty()) os << ",mean_accuracy_smoothed";
        os << '\n';
        for (std::size_t t = 0; t < agg.per_task_mean_raw.size(); ++t) {
            os << (t + 1) << ',' << agg.per_task_mean_raw[t];
            if (!agg.per_task_mean_smoothed.empty()) os << ',' << agg.per_task_mean_smoothed[t];
            os << '\n';
        }
    }
    {
        json jt;
        jt["runs"] = json::array();
        for (std::size_t i = 0; i < cells.size(); ++i) jt["runs"].push_back(reports[i].timing_json());
        write_json_file(out / "timing.json", jt);
    }
    return agg;
}

AggregateReport ExperimentRunner::resume(const std::filesystem::path& output_dir, RunOptions opts) {
    std::filesystem::path config_path = output_dir / "config.json";
    if (!std::filesystem::exists(config_path))
        throw IoError("no config.json in " + output_dir.string() + "; nothing to resume");
    ExperimentConfig cfg = ExperimentConfig::from_json(read_json_file(config_path));
    cfg.output_dir = output_dir.string();
    ExperimentRunner runner(std::move(cfg), opts);
    return runner.run();
}

} // namespace canid
