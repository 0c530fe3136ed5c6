#pragma once
// File-based experiment configuration. One JSON document per experiment,
// validated strictly before any work starts: unknown keys are rejected and
// every output artifact embeds the resolved configuration.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "canid/data.hpp"
#include "canid/model.hpp"
#include "canid/scenarios.hpp"
#include "canid/strategies.hpp"

namespace canid {

struct DatasetConfig {
    std::string prepared_dir;              // directory written by `prepare`
    std::optional<SyntheticSpec> synthetic; // or an inline synthetic spec
    int window_length = 60;
    int stride = 6;
    double train_fraction = 0.7;
};

struct ScenarioConfig {
    ScenarioKind kind = ScenarioKind::TwoNewDrivers;
    std::vector<int> group_sizes; // custom kind only
};

struct SmoothingConfig {
    bool enabled = false;
    int window = 6;
};

struct ExperimentConfig {
    DatasetConfig dataset;
    ScenarioConfig scenario;
    StrategyKind strategy = StrategyKind::FineTune;
    StrategyHyperparams strategy_params;
    ClassifierConfig model; // input_features / window_length resolved from the dataset
    SmoothingConfig smoothing;
    std::vector<std::uint64_t> seeds = {0};
    std::vector<std::uint64_t> permutations = {0};
    std::string output_dir;
    int workers = 1;
    bool export_traces = false;
    std::string joint_reference; // optional: aggregate report of a joint run, enables gap

    static ExperimentConfig from_json(const nlohmann::json& j);
    static ExperimentConfig load(const std::filesystem::path& path);
    nlohmann::json to_json() const;

    void validate() const;
};

} // namespace canid
