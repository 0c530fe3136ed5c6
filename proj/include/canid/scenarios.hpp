#pragma once
// Task stream construction: the three incremental-driver scenarios, seeded
// class-order permutations, and the cumulative evaluation-set rule (a driver's
// test data joins the evaluation pool as soon as the driver appears).

#include <cstdint>
#include <filesystem>
#include <set>
#include <vector>

#include "canid/data.hpp"

namespace canid {

enum class ScenarioKind { TwoNewDrivers, OneNewDriver, TwoNewSessions, Custom };

const char* to_string(ScenarioKind k);
ScenarioKind scenario_kind_from_string(const std::string& s);

struct Task {
    int task_id = 0; // 1-based
    std::vector<std::uint32_t> train_windows; // indices into dataset.train
    std::vector<int> classes_introduced;      // sorted driver ids, may be empty
    std::vector<std::pair<int, int>> sessions_included; // (driver, session)
};

struct TaskStream {
    ScenarioKind kind = ScenarioKind::Custom;
    std::vector<Task> tasks;
    std::vector<int> permutation; // driver order used to build the stream
    std::uint64_t seed = 0;

    // drivers introduced in tasks 1..t, sorted
    std::vector<int> seen_classes(int t) const;

    void save_manifest(const std::filesystem::path& path) const;
    static TaskStream load_manifest(const std::filesystem::path& path, const PreparedDataset& dataset);
};

// Deterministic permutation of the driver ids; seed 0 is the sorted order.
std::vector<int> permute_classes(const std::vector<int>& driver_ids, std::uint64_t permutation_seed);

// Groups of new classes per task, e.g. {2,2,2,2,2}. Both sessions of each new
// driver contribute their training windows to the task.
TaskStream build_class_groups(const PreparedDataset& dataset, const std::vector<int>& order,
                              const std::vector<int>& group_sizes, ScenarioKind kind, std::uint64_t seed);

// Two new drivers per task, five tasks on the ten-driver dataset.
TaskStream build_scenario1(const PreparedDataset& dataset, const std::vector<int>& order, std::uint64_t seed = 0);

// Class sequence 2,1,1,... for a total of n_drivers - 1 tasks.
TaskStream build_scenario2(const PreparedDataset& dataset, const std::vector<int>& order, std::uint64_t seed = 0);

// Two driving sessions per task over a seeded session order constrained so
// each driver's session 1 precedes their session 2.
TaskStream build_scenario3(const PreparedDataset& dataset, std::uint64_t session_order_seed);

// Same, with an explicit session order (validated against the constraint).
TaskStream build_scenario3_with_order(const PreparedDataset& dataset,
                                      const std::vector<std::pair<int, int>>& session_order,
                                      std::uint64_t seed);

// All test windows of every driver introduced in tasks 1..t, session-major and
// temporally ordered within each session. Membership is by driver label: both
// sessions count as soon as the driver has appeared.
std::vector<std::uint32_t> eval_set(const TaskStream& stream, int t, const PreparedDataset& dataset);

// Training windows of tasks 1..t concatenated in task order.
std::vector<std::uint32_t> cumulative_train_set(const TaskStream& stream, int t);

} // namespace canid
