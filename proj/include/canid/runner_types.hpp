#pragma once
// Report records produced by the runner. report.json carries only
// deterministic values; wall-clock timings live in timing.json.

#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace canid {

struct TaskRecord {
    int task_id = 0;
    double accuracy_raw = 0.0;
    double accuracy_smoothed = std::numeric_limits<double>::quiet_NaN(); // NaN when smoothing off
    double final_epoch_loss = 0.0;
    int epochs_run = 0;
    std::uint64_t strategy_bytes = 0;
    double train_seconds = 0.0; // excluded from report.json
    std::map<int, double> per_driver_accuracy;
};

// One (seed, permutation) run.
struct MetricsReport {
    std::uint64_t seed = 0;
    std::uint64_t permutation = 0;
    std::vector<TaskRecord> tasks;
    double final_accuracy_raw = 0.0;
    double final_accuracy_smoothed = std::numeric_limits<double>::quiet_NaN();
    bool smoothing_enabled = false;
    bool complete = false;

    double final_accuracy() const {
        return smoothing_enabled ? final_accuracy_smoothed : final_accuracy_raw;
    }

    nlohmann::json to_json() const;         // deterministic fields only
    nlohmann::json timing_json() const;     // wall-clock sidecar
    static MetricsReport from_json(const nlohmann::json& j);
};

struct AggregateReport {
    nlohmann::json config_echo;
    std::string dataset_hash;
    std::vector<MetricsReport> runs;

    double mean_final_raw = 0.0;
    double std_final_raw = 0.0;
    double mean_final_smoothed = std::numeric_limits<double>::quiet_NaN();
    double std_final_smoothed = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> per_task_mean_raw;
    std::vector<double> per_task_mean_smoothed;
    // per-permutation means of per-run finals, plus the mean of those means
    std::map<std::uint64_t, double> per_permutation_mean;
    double mean_of_permutation_means = 0.0;

    // present when a joint reference was supplied (percentage points)
    double gap_raw = std::numeric_limits<double>::quiet_NaN();
    double gap_smoothed = std::numeric_limits<double>::quiet_NaN();

    void aggregate(); // fills the summary fields from runs
    nlohmann::json to_json() const;
    static AggregateReport from_json(const nlohmann::json& j);
};

} // namespace canid
