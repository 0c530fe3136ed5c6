#include "canid/evaluate.hpp"

#include <algorithm>

namespace canid {

EvalResult evaluate(const LstmClassifier& model, const PreparedDataset& dataset,
                    std::span<const std::uint32_t> eval_windows, const EvalOptions& opts) {
    const WindowStore& store = dataset.test;
    const int k = model.active_count();
    EvalResult res;
    res.smoothed = opts.smoothing;
    res.total = eval_windows.size();
    if (eval_windows.empty()) return res;

    for (std::uint32_t w : eval_windows)
        if (model.unit_of(store.labels[w]) < 0)
            throw ProtocolError("evaluation label " + std::to_string(store.labels[w]) +
                                " is not registered on the model");

    // batched raw logits over the whole ordered set
    std::vector<float> logits(eval_windows.size() * static_cast<std::size_t>(k));
    const std::size_t wf = store.window_floats();
    std::vector<float> x;
    const std::size_t B = static_cast<std::size_t>(std::max(1, opts.batch_size));
    for (std::size_t start = 0; start < eval_windows.size(); start += B) {
        std::size_t len = std::min(B, eval_windows.size() - start);
        x.assign(len * wf, 0.0f);
        for (std::size_t s = 0; s < len; ++s) {
            auto vals = store.window(eval_windows[start + s]);
            std::copy(vals.begin(), vals.end(), x.begin() + static_cast<std::ptrdiff_t>(s * wf));
        }
        std::vector<float> z = model.forward(x, static_cast<int>(len), false);
        std::copy(z.begin(), z.end(), logits.begin() + static_cast<std::ptrdiff_t>(start * static_cast<std::size_t>(k)));
    }

    const std::vector<int>& active = model.active_classes();
    std::optional<SmoothingState> state;
    int cur_label = -1, cur_session = -1, last_index = -1;
    for (std::size_t i = 0; i < eval_windows.size(); ++i) {
        std::uint32_t w = eval_windows[i];
        int label = store.labels[w];
        int session = store.session_ids[w];
        int index = store.start_indices[w];
        if (label != cur_label || session != cur_session) {
            // new temporal stream
            cur_label = label;
            cur_session = session;
            last_index = -1;
            if (opts.smoothing) state.emplace(opts.smoothing_window, label * 1000 + session);
        } else if (index <= last_index) {
            throw ProtocolError("evaluation stream is not temporally ordered within a session");
        }
        last_index = index;

        std::span<const float> row(logits.data() + i * static_cast<std::size_t>(k),
                                   static_cast<std::size_t>(k));
        int raw_pred = active[static_cast<std::size_t>(decide(row))];
        res.per_driver_raw[label].total++;
        if (raw_pred == label) {
            res.correct_raw++;
            res.per_driver_raw[label].correct++;
        }

        int smooth_pred = -1;
        std::vector<double> z_tilde;
        if (opts.smoothing) {
            z_tilde = state->smooth(row);
            smooth_pred = active[static_cast<std::size_t>(decide(std::span<const double>(z_tilde)))];
            res.per_driver_smoothed[label].total++;
            if (smooth_pred == label) {
                res.correct_smoothed++;
                res.per_driver_smoothed[label].correct++;
            }
        }

        if (opts.capture_trace) {
            WindowPrediction p;
            p.driver = label;
            p.session = session;
            p.index = index;
            p.raw_pred = raw_pred;
            p.smooth_pred = smooth_pred;
            p.raw_logits.assign(row.begin(), row.end());
            p.smoothed_logits = z_tilde;
            res.trace.push_back(std::move(p));
        }
    }
    return res;
}

double compute_gap(double final_acc, double joint_acc) {
    if (final_acc < 0.0 || final_acc > 100.0 || joint_acc < 0.0 || joint_acc > 100.0)
        throw ConfigError("accuracies must be percentages in [0, 100]");
    return joint_acc - final_acc;
}

std::uint64_t account_strategy_bytes(const Strategy& strategy, const ByteAccounting& ctx) {
    return strategy.state_bytes(ctx);
}

} // namespace canid
