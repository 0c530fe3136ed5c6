#include "canid/strategies.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>

namespace canid {

const char* to_string(StrategyKind k) {
    switch (k) {
        case StrategyKind::Joint: return "joint";
        case StrategyKind::Cumulative: return "cumulative";
        case StrategyKind::FineTune: return "finetune";
        case StrategyKind::ER: return "er";
        case StrategyKind::EWC: return "ewc";
        case StrategyKind::LwF: return "lwf";
        case StrategyKind::DERpp: return "derpp";
    }
    return "finetune";
}

StrategyKind strategy_kind_from_string(const std::string& s) {
    if (s == "joint") return StrategyKind::Joint;
    if (s == "cumulative") return StrategyKind::Cumulative;
    if (s == "finetune") return StrategyKind::FineTune;
    if (s == "er") return StrategyKind::ER;
    if (s == "ewc") return StrategyKind::EWC;
    if (s == "lwf") return StrategyKind::LwF;
    if (s == "derpp") return StrategyKind::DERpp;
    throw ConfigError("unknown strategy kind: " + s);
}

// ---------------------------------------------------------------------------
// ReplayMemory
// ---------------------------------------------------------------------------

void ReplayMemory::insert_task(const WindowStore& store, std::span<const std::uint32_t> task_windows,
                               int task_id, Rng& rng, const LstmClassifier* logit_model) {
    for (const ReplayEntry& e : entries_)
        if (e.origin_task >= task_id)
            throw StateError("task id must be greater than every stored origin task");
    ++tasks_seen_;
    if (capacity_ == 0) return;
    std::size_t quota = capacity_ / static_cast<std::size_t>(tasks_seen_);

    // down-sample previously stored tasks to the new quota
    std::vector<ReplayEntry> kept;
    std::size_t i = 0;
    while (i < entries_.size()) {
        std::size_t j = i;
        while (j < entries_.size() && entries_[j].origin_task == entries_[i].origin_task) ++j;
        std::size_t group = j - i;
        if (group <= quota) {
            for (std::size_t g = i; g < j; ++g) kept.push_back(std::move(entries_[g]));
        } else {
            std::vector<std::size_t> picks = rng.sample_without_replacement(group, quota);
            std::sort(picks.begin(), picks.end());
            for (std::size_t p : picks) kept.push_back(std::move(entries_[i + p]));
        }
        i = j;
    }
    entries_ = std::move(kept);

    // the new task contributes a uniform sample of its windows, up to quota
    std::size_t take = std::min(quota, task_windows.size());
    std::vector<std::size_t> picks = rng.sample_without_replacement(task_windows.size(), take);
    std::sort(picks.begin(), picks.end());

    std::vector<float> logits;
    if (logit_model && !picks.empty()) {
        std::vector<float> batch(picks.size() * store.window_floats());
        for (std::size_t p = 0; p < picks.size(); ++p) {
            auto w = store.window(task_windows[picks[p]]);
            std::copy(w.begin(), w.end(), batch.begin() + static_cast<std::ptrdiff_t>(p * store.window_floats()));
        }
        logits = logit_model->forward(batch, static_cast<int>(picks.size()), false);
    }
    int k = logit_model ? logit_model->active_count() : 0;
    for (std::size_t p = 0; p < picks.size(); ++p) {
        std::uint32_t w = task_windows[picks[p]];
        ReplayEntry e;
        auto vals = store.window(w);
        e.window.assign(vals.begin(), vals.end());
        e.label = store.labels[w];
        e.origin_task = task_id;
        if (logit_model)
            e.logits.assign(logits.begin() + static_cast<std::ptrdiff_t>(p * k),
                            logits.begin() + static_cast<std::ptrdiff_t>((p + 1) * k));
        entries_.push_back(std::move(e));
    }
}

std::vector<std::size_t> ReplayMemory::draw(std::size_t n, Rng& rng) const {
    if (entries_.empty()) throw StateError("cannot draw from an empty replay memory");
    if (entries_.size() >= n) return rng.sample_without_replacement(entries_.size(), n);
    std::vector<std::size_t> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = rng.index(entries_.size());
    return out;
}

namespace {
constexpr char kMemoryMagic[] = "CANIDRM1";
}

void ReplayMemory::save(const std::filesystem::path& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot write replay memory: " + path.string());
    os.write(kMemoryMagic, 8);
    io::write_u64(os, capacity_);
    io::write_i32(os, tasks_seen_);
    io::write_u64(os, entries_.size());
    for (const ReplayEntry& e : entries_) {
        io::write_u64(os, e.window.size());
        io::write_f32_array(os, e.window.data(), e.window.size());
        io::write_i32(os, e.label);
        io::write_i32(os, e.origin_task);
        io::write_u64(os, e.logits.size());
        io::write_f32_array(os, e.logits.data(), e.logits.size());
    }
}

void ReplayMemory::load(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot read replay memory: " + path.string());
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kMemoryMagic, 8) != 0) throw ParseError("not a replay memory file");
    capacity_ = io::read_u64(is);
    tasks_seen_ = io::read_i32(is);
    std::uint64_t n = io::read_u64(is);
    entries_.clear();
    for (std::uint64_t i = 0; i < n; ++i) {
        ReplayEntry e;
        e.window.resize(io::read_u64(is));
        io::read_f32_array(is, e.window.data(), e.window.size());
        e.label = io::read_i32(is);
        e.origin_task = io::read_i32(is);
        e.logits.resize(io::read_u64(is));
        io::read_f32_array(is, e.logits.data(), e.logits.size());
        entries_.push_back(std::move(e));
    }
}

// ---------------------------------------------------------------------------
// EWC / LwF / DER++ loss pieces
// ---------------------------------------------------------------------------

double ewc_penalty(const LstmClassifier& model, const std::vector<FisherBundle>& bundles, double lambda) {
    const std::vector<float>& theta = model.net().params;
    double total = 0.0;
    for (const FisherBundle& b : bundles) {
        if (b.importance.size() != theta.size() || b.anchor.size() != theta.size())
            throw StateError("fisher bundle shape does not match the model");
        for (std::size_t i = 0; i < theta.size(); ++i) {
            double d = static_cast<double>(theta[i]) - static_cast<double>(b.anchor[i]);
            total += static_cast<double>(b.importance[i]) * d * d;
        }
    }
    return 0.5 * lambda * total;
}

FisherBundle compute_fisher_bundle(const LstmClassifier& model, const WindowStore& store,
                                   std::span<const std::uint32_t> task_windows, int task_id) {
    const std::size_t P = model.param_count();
    const int k = model.active_count();
    if (k == 0) throw StateError("cannot compute fisher with no active classes");
    FisherBundle bundle;
    bundle.task_id = task_id;
    bundle.importance.assign(P, 0.0f);
    bundle.anchor = model.net().params;

    const std::size_t wf = store.window_floats();
    const int chunk = 64;
    std::vector<float> x, logits, dlogits;
    std::vector<int> units;
    nn::BatchCache<float> cache;
    nn::GradScratch<float> scratch;
    for (std::size_t start = 0; start < task_windows.size(); start += chunk) {
        int B = static_cast<int>(std::min<std::size_t>(chunk, task_windows.size() - start));
        x.assign(static_cast<std::size_t>(B) * wf, 0.0f);
        units.assign(static_cast<std::size_t>(B), 0);
        for (int s = 0; s < B; ++s) {
            std::uint32_t w = task_windows[start + static_cast<std::size_t>(s)];
            auto vals = store.window(w);
            std::copy(vals.begin(), vals.end(), x.begin() + static_cast<std::ptrdiff_t>(s * wf));
            int unit = model.unit_of(store.labels[w]);
            if (unit < 0) throw StateError("fisher sample label is not registered");
            units[static_cast<std::size_t>(s)] = unit;
        }
        logits.assign(static_cast<std::size_t>(B) * k, 0.0f);
        nn::forward_batch(model.net(), x.data(), B, k, false, 0.0, 0, cache, logits.data());
        // per-sample loss scaling: gradient of that sample's own mean-BCE
        dlogits.assign(static_cast<std::size_t>(B) * k, 0.0f);
        for (int s = 0; s < B; ++s)
            for (int j = 0; j < k; ++j) {
                std::size_t idx = static_cast<std::size_t>(s) * k + j;
                double p = static_cast<double>(nn::sigmoid(logits[idx]));
                double y = units[static_cast<std::size_t>(s)] == j ? 1.0 : 0.0;
                dlogits[idx] = static_cast<float>((p - y) / k);
            }
        nn::backward_batch_squared(model.net(), x.data(), B, dlogits.data(), k, cache, scratch,
                                   bundle.importance.data());
    }
    const float inv = task_windows.empty() ? 0.0f : 1.0f / static_cast<float>(task_windows.size());
    for (float& v : bundle.importance) v *= inv;
    return bundle;
}

double lwf_loss(std::span<const float> student_logits, std::span<const float> teacher_logits,
                double lambda) {
    if (student_logits.size() != teacher_logits.size())
        throw ShapeError("student/teacher logit shapes differ");
    return lambda * nn::mse_loss(student_logits.data(), teacher_logits.data(), student_logits.size());
}

double derpp_loss(double current_loss, const LstmClassifier& model, std::span<const float> logit_x,
                  int logit_batch, std::span<const float> stored_logits, std::span<const int> widths,
                  int stored_stride, std::span<const float> label_x, int label_batch,
                  std::span<const int> label_units, double alpha, double beta) {
    double total = current_loss;
    const int k = model.active_count();
    if (logit_batch > 0) {
        std::vector<float> z = model.forward(logit_x, logit_batch, false);
        double term = 0.0;
        for (int s = 0; s < logit_batch; ++s) {
            int width = widths[static_cast<std::size_t>(s)];
            double entry = 0.0;
            for (int j = 0; j < width; ++j) {
                double d = static_cast<double>(z[static_cast<std::size_t>(s) * k + j]) -
                           static_cast<double>(stored_logits[static_cast<std::size_t>(s) * stored_stride + j]);
                entry += d * d;
            }
            term += entry / width;
        }
        total += alpha * term / logit_batch;
    }
    if (label_batch > 0) {
        std::vector<float> z = model.forward(label_x, label_batch, false);
        total += beta * nn::sigmoid_bce_loss(z.data(), label_batch, k, label_units.data());
    }
    return total;
}

// ---------------------------------------------------------------------------
// Strategy base
// ---------------------------------------------------------------------------

void Strategy::before_task(LstmClassifier&, const TaskContext&, std::vector<std::uint32_t>&) {}

void Strategy::after_task(LstmClassifier&, const TaskContext&, std::span<const std::uint32_t>, Rng&) {}

void Strategy::gather_current(const LstmClassifier& model, const WindowStore& store,
                              std::span<const std::uint32_t> chunk, StepScratch& scratch) {
    const std::size_t wf = store.window_floats();
    scratch.x.assign(chunk.size() * wf, 0.0f);
    scratch.labels.assign(chunk.size(), 0);
    for (std::size_t i = 0; i < chunk.size(); ++i) {
        auto vals = store.window(chunk[i]);
        std::copy(vals.begin(), vals.end(), scratch.x.begin() + static_cast<std::ptrdiff_t>(i * wf));
        int unit = model.unit_of(store.labels[chunk[i]]);
        if (unit < 0)
            throw StateError("label " + std::to_string(store.labels[chunk[i]]) + " is not registered");
        scratch.labels[i] = unit;
    }
}

nn::StepInputs<float> Strategy::compose_step(const LstmClassifier& model, const WindowStore& store,
                                             std::span<const std::uint32_t> chunk, Rng&,
                                             StepScratch& scratch) {
    gather_current(model, store, chunk, scratch);
    nn::StepInputs<float> step;
    step.x = scratch.x.data();
    step.batch = static_cast<int>(chunk.size());
    step.labels = scratch.labels.data();
    return step;
}

// ---------------------------------------------------------------------------
// Concrete strategies
// ---------------------------------------------------------------------------

namespace {

std::uint64_t window_bytes(const ByteAccounting& ctx) {
    // 4-byte float per value plus an 8-byte label per stored sample
    return static_cast<std::uint64_t>(ctx.window_length) * ctx.features * 4 + 8;
}

class FineTuneStrategy : public Strategy {
  public:
    explicit FineTuneStrategy(StrategyHyperparams hp) : Strategy(std::move(hp)) {}
    StrategyKind kind() const override { return StrategyKind::FineTune; }
    std::uint64_t state_bytes(const ByteAccounting&) const override { return 0; }
};

class CumulativeStrategy : public Strategy {
  public:
    explicit CumulativeStrategy(StrategyHyperparams hp) : Strategy(std::move(hp)) {}
    StrategyKind kind() const override { return StrategyKind::Cumulative; }

    void before_task(LstmClassifier& model, const TaskContext& ctx,
                     std::vector<std::uint32_t>& effective_train) override {
        // from-scratch retraining on everything seen so far
        effective_train = cumulative_train_set(*ctx.stream, ctx.task_index);
        model.reset_parameters();
    }

    std::uint64_t state_bytes(const ByteAccounting& ctx) const override {
        return window_bytes(ctx) * ctx.windows_seen;
    }
};

class JointStrategy : public CumulativeStrategy {
  public:
    explicit JointStrategy(StrategyHyperparams hp) : CumulativeStrategy(std::move(hp)) {}
    StrategyKind kind() const override { return StrategyKind::Joint; }
};

class ErStrategy : public Strategy {
  public:
    explicit ErStrategy(StrategyHyperparams hp)
        : Strategy(std::move(hp)), memory_(hp_.memory_capacity) {}
    StrategyKind kind() const override { return StrategyKind::ER; }

    int current_quota(int batch_size) const override {
        if (memory_.size() == 0) return batch_size; // no replay before the first boundary
        int replay = static_cast<int>(std::llround(hp_.replay_ratio * batch_size));
        replay = std::clamp(replay, 0, batch_size);
        return batch_size - replay;
    }

    nn::StepInputs<float> compose_step(const LstmClassifier& model, const WindowStore& store,
                                       std::span<const std::uint32_t> chunk, Rng& rng,
                                       StepScratch& scratch) override {
        gather_current(model, store, chunk, scratch);
        if (memory_.size() > 0) {
            const std::size_t wf = store.window_floats();
            const int batch = model.config().batch_size;
            std::size_t replay = static_cast<std::size_t>(batch) - chunk.size();
            std::vector<std::size_t> picks = memory_.draw(replay, rng);
            for (std::size_t p : picks) {
                const ReplayEntry& e = memory_.entries()[p];
                scratch.x.insert(scratch.x.end(), e.window.begin(), e.window.end());
                int unit = model.unit_of(e.label);
                if (unit < 0) throw StateError("replayed label is not registered");
                scratch.labels.push_back(unit);
            }
            (void)wf;
        }
        nn::StepInputs<float> step;
        step.x = scratch.x.data();
        step.batch = static_cast<int>(scratch.labels.size());
        step.labels = scratch.labels.data();
        return step;
    }

    void after_task(LstmClassifier&, const TaskContext& ctx,
                    std::span<const std::uint32_t> task_windows, Rng& rng) override {
        memory_.insert_task(ctx.dataset->train, task_windows, ctx.task_index, rng, nullptr);
    }

    std::uint64_t state_bytes(const ByteAccounting& ctx) const override {
        return static_cast<std::uint64_t>(memory_.capacity()) * window_bytes(ctx);
    }

    void save_state(const std::filesystem::path& dir) const override {
        memory_.save(dir / "replay_memory.bin");
    }
    void load_state(const std::filesystem::path& dir) override {
        memory_.load(dir / "replay_memory.bin");
    }
    const ReplayMemory* memory() const override { return &memory_; }

  protected:
    ReplayMemory memory_;
};

class DerppStrategy : public Strategy {
  public:
    explicit DerppStrategy(StrategyHyperparams hp)
        : Strategy(std::move(hp)), memory_(hp_.memory_capacity) {}
    StrategyKind kind() const override { return StrategyKind::DERpp; }

    nn::StepInputs<float> compose_step(const LstmClassifier& model, const WindowStore& store,
                                       std::span<const std::uint32_t> chunk, Rng& rng,
                                       StepScratch& scratch) override {
        nn::StepInputs<float> step = Strategy::compose_step(model, store, chunk, rng, scratch);
        if (memory_.size() == 0) return step;

        const std::size_t wf = store.window_floats();
        const int batch = model.config().batch_size;
        int m = static_cast<int>(std::llround(hp_.replay_ratio * batch));
        m = std::clamp(m, 1, batch);

        // two independent draws, one per auxiliary term
        std::vector<std::size_t> logit_picks = memory_.draw(static_cast<std::size_t>(m), rng);
        int stride = 1;
        for (std::size_t p : logit_picks)
            stride = std::max(stride, static_cast<int>(memory_.entries()[p].logits.size()));
        scratch.logit_x.assign(logit_picks.size() * wf, 0.0f);
        scratch.stored_logits.assign(logit_picks.size() * static_cast<std::size_t>(stride), 0.0f);
        scratch.stored_widths.assign(logit_picks.size(), 0);
        for (std::size_t i = 0; i < logit_picks.size(); ++i) {
            const ReplayEntry& e = memory_.entries()[logit_picks[i]];
            std::copy(e.window.begin(), e.window.end(),
                      scratch.logit_x.begin() + static_cast<std::ptrdiff_t>(i * wf));
            std::copy(e.logits.begin(), e.logits.end(),
                      scratch.stored_logits.begin() + static_cast<std::ptrdiff_t>(i * static_cast<std::size_t>(stride)));
            scratch.stored_widths[i] = static_cast<int>(e.logits.size());
        }
        step.logit_x = scratch.logit_x.data();
        step.logit_batch = m;
        step.stored_logits = scratch.stored_logits.data();
        step.stored_widths = scratch.stored_widths.data();
        step.stored_stride = stride;
        step.logit_replay_weight = hp_.derpp_alpha;

        std::vector<std::size_t> label_picks = memory_.draw(static_cast<std::size_t>(m), rng);
        scratch.label_x.assign(label_picks.size() * wf, 0.0f);
        scratch.replay_labels.assign(label_picks.size(), 0);
        for (std::size_t i = 0; i < label_picks.size(); ++i) {
            const ReplayEntry& e = memory_.entries()[label_picks[i]];
            std::copy(e.window.begin(), e.window.end(),
                      scratch.label_x.begin() + static_cast<std::ptrdiff_t>(i * wf));
            int unit = model.unit_of(e.label);
            if (unit < 0) throw StateError("replayed label is not registered");
            scratch.replay_labels[i] = unit;
        }
        step.label_x = scratch.label_x.data();
        step.label_batch = m;
        step.replay_labels = scratch.replay_labels.data();
        step.label_replay_weight = hp_.derpp_beta;
        return step;
    }

    void after_task(LstmClassifier& model, const TaskContext& ctx,
                    std::span<const std::uint32_t> task_windows, Rng& rng) override {
        memory_.insert_task(ctx.dataset->train, task_windows, ctx.task_index, rng, &model);
    }

    std::uint64_t state_bytes(const ByteAccounting& ctx) const override {
        return static_cast<std::uint64_t>(memory_.capacity()) *
               (window_bytes(ctx) + static_cast<std::uint64_t>(ctx.max_classes) * 4);
    }

    void save_state(const std::filesystem::path& dir) const override {
        memory_.save(dir / "replay_memory.bin");
    }
    void load_state(const std::filesystem::path& dir) override {
        memory_.load(dir / "replay_memory.bin");
    }
    const ReplayMemory* memory() const override { return &memory_; }

  private:
    ReplayMemory memory_;
};

class EwcStrategy : public Strategy {
  public:
    explicit EwcStrategy(StrategyHyperparams hp) : Strategy(std::move(hp)) {}
    StrategyKind kind() const override { return StrategyKind::EWC; }

    nn::StepInputs<float> compose_step(const LstmClassifier& model, const WindowStore& store,
                                       std::span<const std::uint32_t> chunk, Rng& rng,
                                       StepScratch& scratch) override {
        nn::StepInputs<float> step = Strategy::compose_step(model, store, chunk, rng, scratch);
        if (!bundles_.empty()) {
            scratch.bundle_views.clear();
            for (const FisherBundle& b : bundles_)
                scratch.bundle_views.push_back({b.importance.data(), b.anchor.data()});
            step.bundles = &scratch.bundle_views;
            step.penalty_weight = hp_.ewc_lambda;
        }
        return step;
    }

    void after_task(LstmClassifier& model, const TaskContext& ctx,
                    std::span<const std::uint32_t> task_windows, Rng&) override {
        bundles_.push_back(compute_fisher_bundle(model, ctx.dataset->train, task_windows, ctx.task_index));
    }

    std::uint64_t state_bytes(const ByteAccounting& ctx) const override {
        return static_cast<std::uint64_t>(bundles_.size()) * 2 * ctx.param_count * 4;
    }

    void save_state(const std::filesystem::path& dir) const override {
        std::ofstream os(dir / "fisher_bundles.bin", std::ios::binary);
        if (!os) throw IoError("cannot write fisher bundles");
        io::write_u64(os, bundles_.size());
        for (const FisherBundle& b : bundles_) {
            io::write_i32(os, b.task_id);
            io::write_u64(os, b.importance.size());
            io::write_f32_array(os, b.importance.data(), b.importance.size());
            io::write_f32_array(os, b.anchor.data(), b.anchor.size());
        }
    }
    void load_state(const std::filesystem::path& dir) override {
        std::ifstream is(dir / "fisher_bundles.bin", std::ios::binary);
        if (!is) throw IoError("cannot read fisher bundles");
        bundles_.clear();
        std::uint64_t n = io::read_u64(is);
        for (std::uint64_t i = 0; i < n; ++i) {
            FisherBundle b;
            b.task_id = io::read_i32(is);
            std::uint64_t p = io::read_u64(is);
            b.importance.resize(p);
            b.anchor.resize(p);
            io::read_f32_array(is, b.importance.data(), p);
            io::read_f32_array(is, b.anchor.data(), p);
            bundles_.push_back(std::move(b));
        }
    }
    const std::vector<FisherBundle>* fisher_bundles() const override { return &bundles_; }

  private:
    std::vector<FisherBundle> bundles_;
};

class LwfStrategy : public Strategy {
  public:
    explicit LwfStrategy(StrategyHyperparams hp) : Strategy(std::move(hp)) {}
    StrategyKind kind() const override { return StrategyKind::LwF; }

    void before_task(LstmClassifier& model, const TaskContext&, std::vector<std::uint32_t>&) override {
        // no teacher before the first task
        if (model.active_count() > 0)
            teacher_.emplace(model);
        else
            teacher_.reset();
    }

    nn::StepInputs<float> compose_step(const LstmClassifier& model, const WindowStore& store,
                                       std::span<const std::uint32_t> chunk, Rng& rng,
                                       StepScratch& scratch) override {
        nn::StepInputs<float> step = Strategy::compose_step(model, store, chunk, rng, scratch);
        if (teacher_ && step.batch > 0) {
            scratch.teacher_logits = teacher_->forward(
                std::span<const float>(scratch.x.data(), scratch.x.size()), step.batch, false);
            step.teacher_logits = scratch.teacher_logits.data();
            step.teacher_k = teacher_->active_count();
            step.distill_weight = hp_.lwf_lambda;
        }
        return step;
    }

    std::uint64_t state_bytes(const ByteAccounting& ctx) const override {
        // one frozen teacher snapshot
        return ctx.param_count * 4;
    }

  private:
    std::optional<LstmClassifier> teacher_;
};

} // namespace

std::unique_ptr<Strategy> make_strategy(StrategyKind kind, const StrategyHyperparams& hp) {
    switch (kind) {
        case StrategyKind::Joint: return std::make_unique<JointStrategy>(hp);
        case StrategyKind::Cumulative: return std::make_unique<CumulativeStrategy>(hp);
        case StrategyKind::FineTune: return std::make_unique<FineTuneStrategy>(hp);
        case StrategyKind::ER: return std::make_unique<ErStrategy>(hp);
        case StrategyKind::EWC: return std::make_unique<EwcStrategy>(hp);
        case StrategyKind::LwF: return std::make_unique<LwfStrategy>(hp);
        case StrategyKind::DERpp: return std::make_unique<DerppStrategy>(hp);
    }
    throw ConfigError("unknown strategy kind");
}

// ---------------------------------------------------------------------------
// Training loop
// ---------------------------------------------------------------------------

TrainingLog train_task(LstmClassifier& model, const WindowStore& store,
                       std::span<const std::uint32_t> train_windows, Strategy& strategy,
                       std::uint64_t rng_seed, int epochs_override) {
    if (train_windows.empty()) throw ConfigError("task has no training data");
    const ClassifierConfig& cfg = model.config();
    for (std::uint32_t w : train_windows)
        if (model.unit_of(store.labels[w]) < 0)
            throw StateError("label " + std::to_string(store.labels[w]) + " is not registered");

    const auto t0 = std::chrono::steady_clock::now();
    const int epochs = epochs_override > 0 ? epochs_override : cfg.epochs_per_task;
    const int B = cfg.batch_size;
    Rng rng(derive_seed(rng_seed, "train-task"));

    std::vector<std::uint32_t> order(train_windows.begin(), train_windows.end());
    std::vector<std::uint32_t> validation;
    if (cfg.early_stopping && order.size() >= 4) {
        std::size_t val_n = std::max<std::size_t>(1, static_cast<std::size_t>(
                                                         cfg.validation_fraction * static_cast<double>(order.size())));
        std::vector<std::size_t> picks = rng.sample_without_replacement(order.size(), val_n);
        std::sort(picks.begin(), picks.end());
        std::vector<std::uint32_t> rest;
        std::size_t pi = 0;
        for (std::size_t i = 0; i < order.size(); ++i) {
            if (pi < picks.size() && picks[pi] == i) {
                validation.push_back(order[i]);
                ++pi;
            } else {
                rest.push_back(order[i]);
            }
        }
        order = std::move(rest);
    }

    const std::size_t P = model.param_count();
    std::vector<float> grad(P, 0.0f);
    nn::Adam<float> adam;
    adam.lr = cfg.learning_rate;
    adam.init(P);
    StepScratch scratch;
    nn::StepWorkspace<float> ws;

    TrainingLog log;
    double best_val = std::numeric_limits<double>::infinity();
    int wait = 0;
    for (int epoch = 0; epoch < epochs; ++epoch) {
        rng.shuffle(order);
        int chunk_size = strategy.current_quota(B);
        double loss_sum = 0.0;
        int batches = 0;
        auto run_step = [&](std::span<const std::uint32_t> chunk) {
            nn::StepInputs<float> step = strategy.compose_step(model, store, chunk, rng, scratch);
            step.dropout_seed = rng.next_u64();
            std::fill(grad.begin(), grad.end(), 0.0f);
            nn::LossParts parts = nn::compute_loss_and_grad(model.net(), model.active_count(),
                                                            cfg.dropout, step, ws, grad.data());
            adam.update(model.net().params.data(), grad.data(), P);
            loss_sum += parts.total;
            ++batches;
        };
        if (chunk_size > 0) {
            for (std::size_t i = 0; i < order.size(); i += static_cast<std::size_t>(chunk_size)) {
                std::size_t len = std::min<std::size_t>(static_cast<std::size_t>(chunk_size), order.size() - i);
                run_step(std::span<const std::uint32_t>(order.data() + i, len));
            }
        } else {
            // pure-memory batches: keep the usual number of steps per epoch
            std::size_t steps = (order.size() + static_cast<std::size_t>(B) - 1) / static_cast<std::size_t>(B);
            for (std::size_t i = 0; i < steps; ++i) run_step({});
        }
        log.epochs.push_back({batches > 0 ? loss_sum / batches : 0.0, batches});

        if (!validation.empty()) {
            double val = 0.0;
            const std::size_t wf = store.window_floats();
            std::vector<float> x;
            std::vector<int> units;
            for (std::size_t i = 0; i < validation.size(); i += static_cast<std::size_t>(B)) {
                std::size_t len = std::min<std::size_t>(static_cast<std::size_t>(B), validation.size() - i);
                x.assign(len * wf, 0.0f);
                units.assign(len, 0);
                for (std::size_t s = 0; s < len; ++s) {
                    auto vals = store.window(validation[i + s]);
                    std::copy(vals.begin(), vals.end(), x.begin() + static_cast<std::ptrdiff_t>(s * wf));
                    units[s] = model.unit_of(store.labels[validation[i + s]]);
                }
                std::vector<float> z = model.forward(x, static_cast<int>(len), false);
                val += nn::sigmoid_bce_loss(z.data(), static_cast<int>(len), model.active_count(), units.data()) *
                       static_cast<double>(len);
            }
            val /= static_cast<double>(validation.size());
            if (val < best_val - 1e-6) {
                best_val = val;
                wait = 0;
            } else if (++wait >= cfg.patience) {
                log.stopped_early_at = epoch;
                break;
            }
        }
    }
    log.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return log;
}

} // namespace canid
