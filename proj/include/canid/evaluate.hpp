#pragma once
// Evaluation protocol: accuracy over all seen drivers' test windows (raw and
// smoothed), gap vs. the joint reference, wall-clock task timing, byte-exact
// strategy memory accounting.

#include <chrono>
#include <cmath>
#include <map>
#include <optional>
#include <span>

#include "canid/model.hpp"
#include "canid/smoothing.hpp"
#include "canid/strategies.hpp"

namespace canid {

struct EvalOptions {
    bool smoothing = false;
    int smoothing_window = 6;
    bool capture_trace = false;
    int batch_size = 64;
};

struct WindowPrediction {
    int driver = 0;
    int session = 0;
    int index = 0;
    int raw_pred = -1;
    int smooth_pred = -1;
    std::vector<float> raw_logits;
    std::vector<double> smoothed_logits;
};

struct PerDriverCount {
    std::size_t correct = 0;
    std::size_t total = 0;
};

struct EvalResult {
    std::size_t total = 0;
    std::size_t correct_raw = 0;
    std::size_t correct_smoothed = 0;
    bool smoothed = false;
    std::map<int, PerDriverCount> per_driver_raw;
    std::map<int, PerDriverCount> per_driver_smoothed;
    std::vector<WindowPrediction> trace; // only when capture_trace

    double accuracy_raw() const {
        return total == 0 ? 0.0 : static_cast<double>(correct_raw) / static_cast<double>(total);
    }
    double accuracy_smoothed() const {
        return total == 0 ? 0.0 : static_cast<double>(correct_smoothed) / static_cast<double>(total);
    }
    // the accuracy the configuration asked for
    double accuracy() const { return smoothed ? accuracy_smoothed() : accuracy_raw(); }
};

// eval_windows must be session-grouped and temporally ordered within each
// session (eval_set output satisfies this); smoothing state is reset at every
// session boundary.
EvalResult evaluate(const LstmClassifier& model, const PreparedDataset& dataset,
                    std::span<const std::uint32_t> eval_windows, const EvalOptions& opts);

// joint_acc - final_acc, in percentage points
double compute_gap(double final_acc, double joint_acc);

// Byte-exact strategy memory accounting (4-byte floats, 8-byte labels,
// 4-byte logit slots).
std::uint64_t account_strategy_bytes(const Strategy& strategy, const ByteAccounting& ctx);

// Wall-clock duration of a training invocation, monotone-clock based.
template <typename F>
double time_task(F&& thunk) {
    const auto t0 = std::chrono::steady_clock::now();
    thunk();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace canid
