#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "canid/runner.hpp"

using namespace canid;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// 4 synthetic drivers, 2 tasks of 2 drivers each, tiny model
ExperimentConfig tiny_experiment(StrategyKind strategy) {
    ExperimentConfig c;
    c.dataset.synthetic = SyntheticSpec{4, 2, 120, 4, 11};
    c.dataset.window_length = 12;
    c.dataset.stride = 6;
    c.scenario.kind = ScenarioKind::TwoNewDrivers;
    c.strategy = strategy;
    c.strategy_params.memory_capacity = 24;
    c.model.hidden_size = 8;
    c.model.num_layers = 1;
    c.model.dropout = 0.0;
    c.model.max_classes = 4;
    c.model.batch_size = 16;
    c.model.epochs_per_task = 3;
    c.seeds = {1};
    c.permutations = {0};
    return c;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    REQUIRE(is);
    return std::string(std::istreambuf_iterator<char>(is), {});
}

fs::path temp_dir(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("canid_runner_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

} // namespace

TEST_CASE("config validation rejects unknown keys and inconsistent settings") {
    json good = tiny_experiment(StrategyKind::FineTune).to_json();
    CHECK_NOTHROW(ExperimentConfig::from_json(good));

    SUBCASE("unknown top-level key") {
        json bad = good;
        bad["surprise"] = 1;
        CHECK_THROWS_AS(ExperimentConfig::from_json(bad), ConfigError);
    }
    SUBCASE("unknown nested key") {
        json bad = good;
        bad["model"]["hidden"] = 12;
        CHECK_THROWS_AS(ExperimentConfig::from_json(bad), ConfigError);
    }
    SUBCASE("dataset must be synthetic xor prepared") {
        json bad = good;
        bad["dataset"]["prepared_dir"] = "somewhere";
        CHECK_THROWS_AS(ExperimentConfig::from_json(bad), ConfigError);
        json none = good;
        none["dataset"].erase("synthetic");
        CHECK_THROWS_AS(ExperimentConfig::from_json(none), ConfigError);
    }
    SUBCASE("group_sizes only with the custom scenario") {
        json bad = good;
        bad["scenario"]["group_sizes"] = {2, 2};
        CHECK_THROWS_AS(ExperimentConfig::from_json(bad), ConfigError);
        json custom = good;
        custom["scenario"]["kind"] = "custom";
        custom["scenario"]["group_sizes"] = {2, 2};
        CHECK_NOTHROW(ExperimentConfig::from_json(custom));
    }
    SUBCASE("round trip preserves the configuration") {
        ExperimentConfig c = ExperimentConfig::from_json(good);
        CHECK(c.to_json() == good);
    }
}

TEST_CASE("runner smoke test: accuracies in range, strategy bytes recorded") {
    ExperimentConfig cfg = tiny_experiment(StrategyKind::ER);
    cfg.smoothing.enabled = true;
    cfg.smoothing.window = 6;
    ExperimentRunner runner(cfg);
    MetricsReport r = runner.run_cell_in_memory(1, 0);
    REQUIRE(r.tasks.size() == 2);
    CHECK(r.complete);
    for (const TaskRecord& t : r.tasks) {
        CHECK(t.accuracy_raw >= 0.0);
        CHECK(t.accuracy_raw <= 1.0);
        CHECK(t.accuracy_smoothed >= 0.0);
        CHECK(t.accuracy_smoothed <= 1.0);
        CHECK(t.epochs_run == 3);
    }
    // ER bytes: capacity x (W*F*4 + 8)
    CHECK(r.tasks[0].strategy_bytes == 24ull * (12 * 4 * 4 + 8));
    // eval set grows between tasks, final covers the pool
    CHECK(r.tasks[1].per_driver_accuracy.size() == 4);
    CHECK(r.tasks[0].per_driver_accuracy.size() == 2);
}

TEST_CASE("joint accuracy equals cumulative's final-task accuracy under shared seeds") {
    ExperimentConfig joint_cfg = tiny_experiment(StrategyKind::Joint);
    ExperimentConfig cum_cfg = tiny_experiment(StrategyKind::Cumulative);
    MetricsReport joint = ExperimentRunner(joint_cfg).run_cell_in_memory(7, 0);
    MetricsReport cumulative = ExperimentRunner(cum_cfg).run_cell_in_memory(7, 0);
    REQUIRE(joint.tasks.size() == 2);
    REQUIRE(cumulative.tasks.size() == 2);
    // bit-identical training path -> exactly equal accuracies at the final task
    CHECK(joint.final_accuracy_raw == cumulative.final_accuracy_raw);
    CHECK(joint.tasks[1].per_driver_accuracy == cumulative.tasks[1].per_driver_accuracy);
}

TEST_CASE("identical configurations rerun to identical reports") {
    ExperimentConfig cfg = tiny_experiment(StrategyKind::DERpp);
    MetricsReport a = ExperimentRunner(cfg).run_cell_in_memory(3, 0);
    MetricsReport b = ExperimentRunner(cfg).run_cell_in_memory(3, 0);
    CHECK(a.to_json() == b.to_json());
    MetricsReport other = ExperimentRunner(cfg).run_cell_in_memory(4, 0);
    CHECK(a.to_json() != other.to_json());
}

TEST_CASE("filesystem runs: aggregate artifacts, resume no-op, interrupt equivalence") {
    ExperimentConfig cfg = tiny_experiment(StrategyKind::ER);
    cfg.seeds = {1, 2};

    fs::path full_dir = temp_dir("full");
    cfg.output_dir = full_dir.string();
    AggregateReport full = ExperimentRunner(cfg).run();
    REQUIRE(full.runs.size() == 2);
    CHECK(fs::exists(full_dir / "report.json"));
    CHECK(fs::exists(full_dir / "report.csv"));
    CHECK(fs::exists(full_dir / "timing.json"));
    CHECK(fs::exists(full_dir / "runs" / "s1_p0" / "report.json"));
    CHECK(fs::exists(full_dir / "runs" / "s1_p0" / "stream.json"));

    SUBCASE("mean of finals matches the runs") {
        double mean = (full.runs[0].final_accuracy_raw + full.runs[1].final_accuracy_raw) / 2.0;
        CHECK(std::abs(full.mean_final_raw - mean) < 1e-12);
    }

    SUBCASE("interrupting after task 1 and resuming reproduces report.json byte for byte") {
        fs::path int_dir = temp_dir("interrupted");
        ExperimentConfig icfg = cfg;
        icfg.output_dir = int_dir.string();
        RunOptions stop;
        stop.stop_after_task = 1;
        ExperimentRunner stopped(icfg, stop);
        AggregateReport partial = stopped.run();
        CHECK(!fs::exists(int_dir / "report.json")); // no aggregate while incomplete
        CHECK(fs::exists(int_dir / "runs" / "s1_p0" / "progress.json"));

        AggregateReport resumed = ExperimentRunner::resume(int_dir);
        REQUIRE(resumed.runs.size() == 2);
        CHECK(slurp(int_dir / "report.json") == slurp(full_dir / "report.json"));
        CHECK(slurp(int_dir / "runs" / "s1_p0" / "report.json") ==
              slurp(full_dir / "runs" / "s1_p0" / "report.json"));
        fs::remove_all(int_dir);
    }

    SUBCASE("resuming a completed directory is a no-op") {
        std::string before = slurp(full_dir / "report.json");
        AggregateReport again = ExperimentRunner::resume(full_dir);
        CHECK(again.runs.size() == 2);
        CHECK(slurp(full_dir / "report.json") == before);
    }

    SUBCASE("a tampered checkpoint is refused on resume") {
        fs::path int_dir = temp_dir("tampered");
        ExperimentConfig icfg = cfg;
        icfg.output_dir = int_dir.string();
        RunOptions stop;
        stop.stop_after_task = 1;
        ExperimentRunner(icfg, stop).run();
        fs::path ckpt = int_dir / "runs" / "s1_p0" / "state" / "checkpoint.bin";
        REQUIRE(fs::exists(ckpt));
        {
            std::fstream f(ckpt, std::ios::in | std::ios::out | std::ios::binary);
            f.seekp(-2, std::ios::end);
            char junk = 0x7f;
            f.write(&junk, 1);
        }
        CHECK_THROWS(ExperimentRunner::resume(int_dir));
        fs::remove_all(int_dir);
    }

    SUBCASE("a different config in the same directory is refused") {
        ExperimentConfig other = cfg;
        other.model.hidden_size = 10;
        other.output_dir = full_dir.string();
        CHECK_THROWS_AS(ExperimentRunner(other).run(), StateError);
    }

    fs::remove_all(full_dir);
}

TEST_CASE("gap is computed against a joint reference sharing the grid") {
    fs::path joint_dir = temp_dir("jointref");
    ExperimentConfig joint_cfg = tiny_experiment(StrategyKind::Joint);
    joint_cfg.output_dir = joint_dir.string();
    ExperimentRunner(joint_cfg).run();

    ExperimentConfig er_cfg = tiny_experiment(StrategyKind::ER);
    fs::path er_dir = temp_dir("erref");
    er_cfg.output_dir = er_dir.string();
    er_cfg.joint_reference = (joint_dir / "report.json").string();
    AggregateReport agg = ExperimentRunner(er_cfg).run();
    AggregateReport joint = AggregateReport::from_json(json::parse(slurp(joint_dir / "report.json")));
    CHECK(agg.gap_raw ==
          doctest::Approx((joint.mean_final_raw - agg.mean_final_raw) * 100.0).epsilon(1e-9));
    fs::remove_all(joint_dir);
    fs::remove_all(er_dir);
}
