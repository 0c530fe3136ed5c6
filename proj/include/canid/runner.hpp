#pragma once
// Experiment runner: executes the (seed x permutation) grid over a scenario
// stream, owns the run-directory layout, persists per-run and aggregate
// reports, and resumes interrupted streams from task-boundary checkpoints.
//
// Determinism: all randomness is derived from (seed, permutation, task index)
// through named sub-seeds, and wall-clock timings are persisted in a sidecar
// timing.json, so report.json files are byte-identical across reruns and
// across interrupt/resume on the same platform.

#include <filesystem>
#include <map>
#include <optional>

#include "canid/config.hpp"
#include "canid/evaluate.hpp"
#include "canid/runner_types.hpp"

namespace canid {

struct RunOptions {
    int epochs_override = 0; // > 0 overrides model.epochs_per_task
    int smoothing_window_override = 0;
    int stop_after_task = 0; // > 0: leave each run incomplete after this many tasks
    bool quiet = false;
};

class ExperimentRunner {
  public:
    ExperimentRunner(ExperimentConfig config, RunOptions opts = {});

    const PreparedDataset& dataset() const { return dataset_; }
    const ExperimentConfig& config() const { return config_; }

    // executes all runs (skipping completed ones), writes per-run reports and
    // the aggregate; returns the aggregate. Incomplete runs (stop_after_task)
    // leave progress + state behind and are excluded from the aggregate, in
    // which case no aggregate report is written.
    AggregateReport run();

    // continue a previously created run directory
    static AggregateReport resume(const std::filesystem::path& output_dir, RunOptions opts = {});

    // build the stream for one (permutation) cell, as run() would
    TaskStream build_stream(std::uint64_t permutation) const;

    // run one cell in-process without touching the filesystem (tests)
    MetricsReport run_cell_in_memory(std::uint64_t seed, std::uint64_t permutation);

  private:
    MetricsReport run_single(std::uint64_t seed, std::uint64_t permutation,
                             const std::filesystem::path& run_dir, bool* incomplete);
    nlohmann::json result_config_echo() const;
    MetricsReport execute_stream(std::uint64_t seed, std::uint64_t permutation,
                                 const TaskStream& stream,
                                 const std::filesystem::path* run_dir, bool* incomplete);
    ClassifierConfig resolved_model_config() const;

    ExperimentConfig config_;
    RunOptions opts_;
    PreparedDataset dataset_;
};

} // namespace canid
