#include "canid/config.hpp"

#include <fstream>
#include <set>

namespace canid {

using nlohmann::json;

namespace {

void expect_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
    if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
    for (const auto& [key, value] : j.items())
        if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
}

} // namespace

ExperimentConfig ExperimentConfig::from_json(const json& j) {
    expect_keys(j, "config",
                {"dataset", "scenario", "strategy", "model", "smoothing", "seeds", "permutations",
                 "output_dir", "workers", "export_traces", "joint_reference"});
    ExperimentConfig c;

    const json& d = j.at("dataset");
    expect_keys(d, "dataset",
                {"prepared_dir", "synthetic", "window_length", "stride", "train_fraction"});
    if (d.contains("prepared_dir")) c.dataset.prepared_dir = d["prepared_dir"].get<std::string>();
    if (d.contains("synthetic")) {
        const json& s = d["synthetic"];
        expect_keys(s, "dataset.synthetic",
                    {"drivers", "sessions_per_driver", "records_per_session", "features", "seed"});
        SyntheticSpec spec;
        spec.n_drivers = s.at("drivers").get<int>();
        spec.sessions_per_driver = s.at("sessions_per_driver").get<int>();
        spec.records_per_session = s.at("records_per_session").get<int>();
        spec.n_features = s.at("features").get<int>();
        if (s.contains("seed")) spec.seed = s["seed"].get<std::uint64_t>();
        c.dataset.synthetic = spec;
    }
    if (d.contains("window_length")) c.dataset.window_length = d["window_length"].get<int>();
    if (d.contains("stride")) c.dataset.stride = d["stride"].get<int>();
    if (d.contains("train_fraction")) c.dataset.train_fraction = d["train_fraction"].get<double>();

    if (j.contains("scenario")) {
        const json& s = j.at("scenario");
        expect_keys(s, "scenario", {"kind", "group_sizes"});
        c.scenario.kind = scenario_kind_from_string(s.at("kind").get<std::string>());
        if (s.contains("group_sizes")) c.scenario.group_sizes = s["group_sizes"].get<std::vector<int>>();
    }

    if (j.contains("strategy")) {
        const json& s = j.at("strategy");
        expect_keys(s, "strategy",
                    {"kind", "memory_capacity", "replay_ratio", "ewc_lambda", "lwf_lambda", "alpha", "beta"});
        c.strategy = strategy_kind_from_string(s.at("kind").get<std::string>());
        if (s.contains("memory_capacity")) c.strategy_params.memory_capacity = s["memory_capacity"].get<std::size_t>();
        if (s.contains("replay_ratio")) c.strategy_params.replay_ratio = s["replay_ratio"].get<double>();
        if (s.contains("ewc_lambda")) c.strategy_params.ewc_lambda = s["ewc_lambda"].get<double>();
        if (s.contains("lwf_lambda")) c.strategy_params.lwf_lambda = s["lwf_lambda"].get<double>();
        if (s.contains("alpha")) c.strategy_params.derpp_alpha = s["alpha"].get<double>();
        if (s.contains("beta")) c.strategy_params.derpp_beta = s["beta"].get<double>();
    }

    if (j.contains("model")) {
        const json& m = j.at("model");
        expect_keys(m, "model",
                    {"hidden_size", "num_layers", "dropout", "max_classes", "learning_rate",
                     "batch_size", "epochs_per_task", "early_stopping", "validation_fraction",
                     "patience"});
        if (m.contains("hidden_size")) c.model.hidden_size = m["hidden_size"].get<int>();
        if (m.contains("num_layers")) c.model.num_layers = m["num_layers"].get<int>();
        if (m.contains("dropout")) c.model.dropout = m["dropout"].get<double>();
        if (m.contains("max_classes")) c.model.max_classes = m["max_classes"].get<int>();
        if (m.contains("learning_rate")) c.model.learning_rate = m["learning_rate"].get<double>();
        if (m.contains("batch_size")) c.model.batch_size = m["batch_size"].get<int>();
        if (m.contains("epochs_per_task")) c.model.epochs_per_task = m["epochs_per_task"].get<int>();
        if (m.contains("early_stopping")) c.model.early_stopping = m["early_stopping"].get<bool>();
        if (m.contains("validation_fraction")) c.model.validation_fraction = m["validation_fraction"].get<double>();
        if (m.contains("patience")) c.model.patience = m["patience"].get<int>();
    }

    if (j.contains("smoothing")) {
        const json& s = j.at("smoothing");
        expect_keys(s, "smoothing", {"enabled", "window"});
        if (s.contains("enabled")) c.smoothing.enabled = s["enabled"].get<bool>();
        if (s.contains("window")) c.smoothing.window = s["window"].get<int>();
    }

    if (j.contains("seeds")) c.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
    if (j.contains("permutations")) c.permutations = j["permutations"].get<std::vector<std::uint64_t>>();
    if (j.contains("output_dir")) c.output_dir = j["output_dir"].get<std::string>();
    if (j.contains("workers")) c.workers = j["workers"].get<int>();
    if (j.contains("export_traces")) c.export_traces = j["export_traces"].get<bool>();
    if (j.contains("joint_reference")) c.joint_reference = j["joint_reference"].get<std::string>();

    c.validate();
    return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open config: " + path.string());
    json j;
    try {
        j = json::parse(is);
    } catch (const json::parse_error& e) {
        throw ParseError("config " + path.string() + ": " + e.what());
    }
    return from_json(j);
}

json ExperimentConfig::to_json() const {
    json d;
    if (!dataset.prepared_dir.empty()) d["prepared_dir"] = dataset.prepared_dir;
    if (dataset.synthetic) {
        d["synthetic"] = {{"drivers", dataset.synthetic->n_drivers},
                          {"sessions_per_driver", dataset.synthetic->sessions_per_driver},
                          {"records_per_session", dataset.synthetic->records_per_session},
                          {"features", dataset.synthetic->n_features},
                          {"seed", dataset.synthetic->seed}};
    }
    d["window_length"] = dataset.window_length;
    d["stride"] = dataset.stride;
    d["train_fraction"] = dataset.train_fraction;

    json sc = {{"kind", to_string(scenario.kind)}};
    if (!scenario.group_sizes.empty()) sc["group_sizes"] = scenario.group_sizes;

    json st = {{"kind", to_string(strategy)},
               {"memory_capacity", strategy_params.memory_capacity},
               {"replay_ratio", strategy_params.replay_ratio},
               {"ewc_lambda", strategy_params.ewc_lambda},
               {"lwf_lambda", strategy_params.lwf_lambda},
               {"alpha", strategy_params.derpp_alpha},
               {"beta", strategy_params.derpp_beta}};

    json m = {{"hidden_size", model.hidden_size},
              {"num_layers", model.num_layers},
              {"dropout", model.dropout},
              {"max_classes", model.max_classes},
              {"learning_rate", model.learning_rate},
              {"batch_size", model.batch_size},
              {"epochs_per_task", model.epochs_per_task},
              {"early_stopping", model.early_stopping},
              {"validation_fraction", model.validation_fraction},
              {"patience", model.patience}};

    json out;
    out["dataset"] = d;
    out["scenario"] = sc;
    out["strategy"] = st;
    out["model"] = m;
    out["smoothing"] = {{"enabled", smoothing.enabled}, {"window", smoothing.window}};
    out["seeds"] = seeds;
    out["permutations"] = permutations;
    out["output_dir"] = output_dir;
    out["workers"] = workers;
    out["export_traces"] = export_traces;
    if (!joint_reference.empty()) out["joint_reference"] = joint_reference;
    return out;
}

void ExperimentConfig::validate() const {
    if (dataset.prepared_dir.empty() && !dataset.synthetic)
        throw ConfigError("dataset needs either prepared_dir or a synthetic spec");
    if (!dataset.prepared_dir.empty() && dataset.synthetic)
        throw ConfigError("dataset cannot have both prepared_dir and a synthetic spec");
    if (dataset.window_length < 1 || dataset.stride < 1)
        throw ConfigError("window_length and stride must be >= 1");
    if (!(dataset.train_fraction > 0.0 && dataset.train_fraction < 1.0))
        throw ConfigError("train_fraction must be in (0, 1)");
    if (scenario.kind == ScenarioKind::Custom && scenario.group_sizes.empty())
        throw ConfigError("custom scenario needs group_sizes");
    if (scenario.kind != ScenarioKind::Custom && !scenario.group_sizes.empty())
        throw ConfigError("group_sizes is only valid for the custom scenario");
    if (seeds.empty()) throw ConfigError("at least one seed is required");
    if (permutations.empty()) throw ConfigError("at least one permutation is required");
    if (workers < 1) throw ConfigError("workers must be >= 1");
    if (smoothing.window < 1) throw ConfigError("smoothing window must be >= 1");
    // full model validation happens after input_features is resolved; check
    // the user-settable fields here
    if (!(model.dropout >= 0.0 && model.dropout < 1.0)) throw ConfigError("dropout must be in [0, 1)");
    if (model.hidden_size < 1 || model.num_layers < 1 || model.batch_size < 1 || model.epochs_per_task < 1)
        throw ConfigError("model sizes must be positive");
    if (!(strategy_params.replay_ratio >= 0.0 && strategy_params.replay_ratio <= 1.0))
        throw ConfigError("replay_ratio must be in [0, 1]");
}

} // namespace canid
