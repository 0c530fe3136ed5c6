#include "canid/scenarios.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include <json.hpp>

namespace canid {

using nlohmann::json;

const char* to_string(ScenarioKind k) {
    switch (k) {
        case ScenarioKind::TwoNewDrivers: return "scenario1";
        case ScenarioKind::OneNewDriver: return "scenario2";
        case ScenarioKind::TwoNewSessions: return "scenario3";
        case ScenarioKind::Custom: return "custom";
    }
    return "custom";
}

ScenarioKind scenario_kind_from_string(const std::string& s) {
    if (s == "scenario1") return ScenarioKind::TwoNewDrivers;
    if (s == "scenario2") return ScenarioKind::OneNewDriver;
    if (s == "scenario3") return ScenarioKind::TwoNewSessions;
    if (s == "custom") return ScenarioKind::Custom;
    throw ConfigError("unknown scenario kind: " + s);
}

std::vector<int> TaskStream::seen_classes(int t) const {
    if (t < 1 || t > static_cast<int>(tasks.size())) throw IndexError("task index out of range");
    std::set<int> seen;
    for (int i = 0; i < t; ++i)
        seen.insert(tasks[static_cast<std::size_t>(i)].classes_introduced.begin(),
                    tasks[static_cast<std::size_t>(i)].classes_introduced.end());
    return {seen.begin(), seen.end()};
}

std::vector<int> permute_classes(const std::vector<int>& driver_ids, std::uint64_t permutation_seed) {
    if (driver_ids.empty()) throw ConfigError("no drivers to permute");
    std::vector<int> order(driver_ids.begin(), driver_ids.end());
    std::sort(order.begin(), order.end());
    if (permutation_seed == 0) return order; // seed 0 is the sorted order by convention
    Rng rng(derive_seed(permutation_seed, "class-permutation"));
    rng.shuffle(order);
    return order;
}

namespace {

std::vector<std::uint32_t> session_train_windows(const PreparedDataset& ds, int driver, int session) {
    const SessionRange& r = ds.session(driver, session);
    std::vector<std::uint32_t> out;
    for (std::uint32_t i = r.train_begin; i < r.train_end; ++i) out.push_back(i);
    return out;
}

} // namespace

TaskStream build_class_groups(const PreparedDataset& dataset, const std::vector<int>& order,
                              const std::vector<int>& group_sizes, ScenarioKind kind, std::uint64_t seed) {
    std::size_t total = 0;
    for (int g : group_sizes) {
        if (g < 1) throw ConfigError("group sizes must be >= 1");
        total += static_cast<std::size_t>(g);
    }
    if (total != order.size())
        throw ConfigError("group sizes cover " + std::to_string(total) + " drivers, order has " +
                          std::to_string(order.size()));

    TaskStream stream;
    stream.kind = kind;
    stream.permutation = order;
    stream.seed = seed;
    std::size_t next = 0;
    for (std::size_t g = 0; g < group_sizes.size(); ++g) {
        Task task;
        task.task_id = static_cast<int>(g) + 1;
        // sessions_included order defines the train_windows order; manifests
        // rebuild the stream from it, so it is never re-sorted
        for (int k = 0; k < group_sizes[g]; ++k) {
            int driver = order[next++];
            task.classes_introduced.push_back(driver);
            for (const SessionRange& r : dataset.sessions) {
                if (r.driver != driver) continue;
                task.sessions_included.emplace_back(r.driver, r.session);
                for (std::uint32_t i = r.train_begin; i < r.train_end; ++i) task.train_windows.push_back(i);
            }
        }
        std::sort(task.classes_introduced.begin(), task.classes_introduced.end());
        if (task.train_windows.empty()) throw ConfigError("task " + std::to_string(task.task_id) + " has no training windows");
        stream.tasks.push_back(std::move(task));
    }
    return stream;
}

TaskStream build_scenario1(const PreparedDataset& dataset, const std::vector<int>& order, std::uint64_t seed) {
    if (order.size() % 2 != 0) throw ConfigError("two-new-drivers scenario needs an even driver count");
    std::vector<int> groups(order.size() / 2, 2);
    return build_class_groups(dataset, order, groups, ScenarioKind::TwoNewDrivers, seed);
}

TaskStream build_scenario2(const PreparedDataset& dataset, const std::vector<int>& order, std::uint64_t seed) {
    if (order.size() < 3) throw ConfigError("one-new-driver scenario needs at least 3 drivers");
    std::vector<int> groups;
    groups.push_back(2);
    for (std::size_t i = 2; i < order.size(); ++i) groups.push_back(1);
    return build_class_groups(dataset, order, groups, ScenarioKind::OneNewDriver, seed);
}

TaskStream build_scenario3_with_order(const PreparedDataset& dataset,
                                      const std::vector<std::pair<int, int>>& session_order,
                                      std::uint64_t seed) {
    if (session_order.size() % 2 != 0) throw ConfigError("two-new-sessions scenario needs an even session count");
    // validate the session-1-before-session-2 constraint
    std::map<int, std::size_t> first_pos;
    for (std::size_t i = 0; i < session_order.size(); ++i) {
        auto [driver, session] = session_order[i];
        if (session == 1) {
            first_pos[driver] = i;
        } else if (!first_pos.count(driver) || first_pos[driver] > i) {
            throw ConfigError("session 2 of driver " + std::to_string(driver) + " precedes session 1");
        }
    }

    TaskStream stream;
    stream.kind = ScenarioKind::TwoNewSessions;
    stream.seed = seed;
    std::set<int> seen;
    for (std::size_t i = 0; i < session_order.size(); i += 2) {
        Task task;
        task.task_id = static_cast<int>(i / 2) + 1;
        for (std::size_t k = i; k < i + 2; ++k) {
            auto [driver, session] = session_order[k];
            task.sessions_included.emplace_back(driver, session);
            if (!seen.count(driver)) {
                seen.insert(driver);
                task.classes_introduced.push_back(driver);
                stream.permutation.push_back(driver);
            }
            std::vector<std::uint32_t> idx = session_train_windows(dataset, driver, session);
            task.train_windows.insert(task.train_windows.end(), idx.begin(), idx.end());
        }
        std::sort(task.classes_introduced.begin(), task.classes_introduced.end());
        stream.tasks.push_back(std::move(task));
    }
    return stream;
}

TaskStream build_scenario3(const PreparedDataset& dataset, std::uint64_t session_order_seed) {
    std::vector<std::pair<int, int>> units;
    for (const SessionRange& r : dataset.sessions) units.emplace_back(r.driver, r.session);
    if (units.size() % 2 != 0) throw ConfigError("two-new-sessions scenario needs an even session count");
    for (int d : dataset.driver_ids)
        if (dataset.sessions_per_driver(d) != 2)
            throw ConfigError("driver " + std::to_string(d) + " does not have exactly 2 sessions");

    Rng rng(derive_seed(session_order_seed, "session-order"));
    rng.shuffle(units);
    // enforce session 1 before session 2 per driver by swapping occupants
    std::map<int, std::size_t> pos1, pos2;
    for (std::size_t i = 0; i < units.size(); ++i) {
        auto [driver, session] = units[i];
        (session == 1 ? pos1 : pos2)[driver] = i;
    }
    for (const auto& [driver, p1] : pos1) {
        std::size_t p2 = pos2.at(driver);
        if (p2 < p1) std::swap(units[p1], units[p2]);
    }
    return build_scenario3_with_order(dataset, units, session_order_seed);
}

std::vector<std::uint32_t> eval_set(const TaskStream& stream, int t, const PreparedDataset& dataset) {
    if (t < 1 || t > static_cast<int>(stream.tasks.size())) throw IndexError("task index out of range");
    std::vector<int> seen = stream.seen_classes(t);
    std::set<int> seen_set(seen.begin(), seen.end());
    std::vector<std::uint32_t> out;
    // dataset.sessions is sorted by (driver, session) and test indices are
    // temporally ordered within each session
    for (const SessionRange& r : dataset.sessions) {
        if (!seen_set.count(r.driver)) continue;
        for (std::uint32_t i = r.test_begin; i < r.test_end; ++i) out.push_back(i);
    }
    return out;
}

std::vector<std::uint32_t> cumulative_train_set(const TaskStream& stream, int t) {
    if (t < 1 || t > static_cast<int>(stream.tasks.size())) throw IndexError("task index out of range");
    std::vector<std::uint32_t> out;
    for (int i = 0; i < t; ++i) {
        const Task& task = stream.tasks[static_cast<std::size_t>(i)];
        out.insert(out.end(), task.train_windows.begin(), task.train_windows.end());
    }
    return out;
}

void TaskStream::save_manifest(const std::filesystem::path& path) const {
    json j;
    j["scenario"] = to_string(kind);
    j["seed"] = seed;
    j["permutation"] = permutation;
    j["tasks"] = json::array();
    for (const Task& t : tasks) {
        json jt;
        jt["task_id"] = t.task_id;
        jt["classes_introduced"] = t.classes_introduced;
        json sess = json::array();
        for (auto [d, s] : t.sessions_included) sess.push_back({{"driver", d}, {"session", s}});
        jt["sessions"] = sess;
        jt["train_window_count"] = t.train_windows.size();
        j["tasks"].push_back(jt);
    }
    std::ofstream os(path);
    if (!os) throw IoError("cannot write stream manifest: " + path.string());
    os << j.dump(2) << '\n';
}

TaskStream TaskStream::load_manifest(const std::filesystem::path& path, const PreparedDataset& dataset) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot read stream manifest: " + path.string());
    json j = json::parse(is);
    TaskStream stream;
    stream.kind = scenario_kind_from_string(j.at("scenario").get<std::string>());
    stream.seed = j.at("seed").get<std::uint64_t>();
    stream.permutation = j.at("permutation").get<std::vector<int>>();
    for (const json& jt : j.at("tasks")) {
        Task t;
        t.task_id = jt.at("task_id").get<int>();
        t.classes_introduced = jt.at("classes_introduced").get<std::vector<int>>();
        for (const json& s : jt.at("sessions")) {
            int driver = s.at("driver").get<int>();
            int session = s.at("session").get<int>();
            t.sessions_included.emplace_back(driver, session);
            const SessionRange& r = dataset.session(driver, session);
            for (std::uint32_t i = r.train_begin; i < r.train_end; ++i) t.train_windows.push_back(i);
        }
        if (t.train_windows.size() != jt.at("train_window_count").get<std::size_t>())
            throw StateError("stream manifest does not match the prepared dataset");
        stream.tasks.push_back(std::move(t));
    }
    return stream;
}

} // namespace canid
