#pragma once
// Continual-learning strategy engine. A strategy hooks into the training loop
// at three points: before a task (swap the effective training set, snapshot a
// teacher, reset parameters), per batch (compose the batch and attach
// auxiliary loss terms), and after a task (insert into replay memory, compute
// importance bundles). Strategy state serializes next to the checkpoint so an
// interrupted stream resumes exactly.

#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "canid/model.hpp"
#include "canid/nn/train.hpp"
#include "canid/scenarios.hpp"

namespace canid {

enum class StrategyKind { Joint, Cumulative, FineTune, ER, EWC, LwF, DERpp };

const char* to_string(StrategyKind k);
StrategyKind strategy_kind_from_string(const std::string& s);

struct StrategyHyperparams {
    std::size_t memory_capacity = 1000;
    double replay_ratio = 0.5;
    double ewc_lambda = 10000.0;
    double lwf_lambda = 5.0;
    double derpp_alpha = 1.0;
    double derpp_beta = 1.0;
};

// ---------------------------------------------------------------------------
// Replay memory
// ---------------------------------------------------------------------------

struct ReplayEntry {
    std::vector<float> window; // W x F
    int label = 0;             // driver id
    std::vector<float> logits; // captured at insertion; empty unless the owner stores logits
    int origin_task = 0;
};

// Fixed capacity, equal per-task quota: floor(capacity / tasks_seen), with
// previously stored tasks randomly down-sampled at each boundary.
class ReplayMemory {
  public:
    explicit ReplayMemory(std::size_t capacity) : capacity_(capacity) {}

    std::size_t capacity() const { return capacity_; }
    std::size_t size() const { return entries_.size(); }
    int tasks_seen() const { return tasks_seen_; }
    const std::vector<ReplayEntry>& entries() const { return entries_; }

    // store_logits: capture the model's eval-mode logits for each stored
    // sample (dark-knowledge replay)
    void insert_task(const WindowStore& store, std::span<const std::uint32_t> task_windows,
                     int task_id, Rng& rng, const LstmClassifier* logit_model);

    // uniform draw of n entry indices; without replacement when enough
    // entries exist, with replacement otherwise
    std::vector<std::size_t> draw(std::size_t n, Rng& rng) const;

    void save(const std::filesystem::path& path) const;
    void load(const std::filesystem::path& path);

  private:
    std::size_t capacity_ = 0;
    int tasks_seen_ = 0;
    std::vector<ReplayEntry> entries_;
};

struct FisherBundle {
    int task_id = 0;
    std::vector<float> importance; // per-parameter, >= 0
    std::vector<float> anchor;     // parameters right after the task
};

// (lambda/2) * sum over bundles of sum_j importance_j * (theta_j - anchor_j)^2
double ewc_penalty(const LstmClassifier& model, const std::vector<FisherBundle>& bundles, double lambda);

// Empirical diagonal Fisher: mean over samples of the squared per-sample
// gradient of the classification loss, evaluated without dropout.
FisherBundle compute_fisher_bundle(const LstmClassifier& model, const WindowStore& store,
                                   std::span<const std::uint32_t> task_windows, int task_id);

// lambda * MSE between student and teacher logits over the teacher's classes.
double lwf_loss(std::span<const float> student_logits, std::span<const float> teacher_logits,
                double lambda);

// Composite rehearsal loss evaluated with eval-mode forwards:
// current_loss + alpha * per-entry-width MSE against stored logits
//              + beta * classification loss against stored labels.
double derpp_loss(double current_loss, const LstmClassifier& model, std::span<const float> logit_x,
                  int logit_batch, std::span<const float> stored_logits, std::span<const int> widths,
                  int stored_stride, std::span<const float> label_x, int label_batch,
                  std::span<const int> label_units, double alpha, double beta);

// ---------------------------------------------------------------------------
// Strategy interface
// ---------------------------------------------------------------------------

struct TaskContext {
    const PreparedDataset* dataset = nullptr;
    const TaskStream* stream = nullptr;
    int task_index = 0; // 1-based
};

// inputs to state_bytes accounting
struct ByteAccounting {
    int window_length = 60;
    int features = 46;
    int max_classes = 10;
    std::size_t param_count = 0;
    std::size_t windows_seen = 0; // cumulative training windows through the current task
};

// reusable buffers for composed batches, owned by the training loop
struct StepScratch {
    std::vector<float> x;
    std::vector<int> labels;
    std::vector<float> teacher_logits;
    std::vector<float> logit_x;
    std::vector<float> stored_logits;
    std::vector<int> stored_widths;
    std::vector<float> label_x;
    std::vector<int> replay_labels;
    std::vector<nn::EwcBundleView<float>> bundle_views;
};

class Strategy {
  public:
    virtual ~Strategy() = default;

    virtual StrategyKind kind() const = 0;
    const StrategyHyperparams& params() const { return hp_; }

    // default: train on the task's own windows, leave the model alone
    virtual void before_task(LstmClassifier& model, const TaskContext& ctx,
                             std::vector<std::uint32_t>& effective_train);

    // default: nothing to consolidate
    virtual void after_task(LstmClassifier& model, const TaskContext& ctx,
                            std::span<const std::uint32_t> task_windows, Rng& rng);

    // current-task samples per composed batch (the rest comes from memory)
    virtual int current_quota(int batch_size) const { return batch_size; }

    // build one training step from a chunk of current-task windows
    virtual nn::StepInputs<float> compose_step(const LstmClassifier& model, const WindowStore& store,
                                               std::span<const std::uint32_t> chunk, Rng& rng,
                                               StepScratch& scratch);

    virtual std::uint64_t state_bytes(const ByteAccounting& ctx) const = 0;

    // resume support; strategies without state write nothing
    virtual void save_state(const std::filesystem::path&) const {}
    virtual void load_state(const std::filesystem::path&) {}

    // introspection for tests
    virtual const ReplayMemory* memory() const { return nullptr; }
    virtual const std::vector<FisherBundle>* fisher_bundles() const { return nullptr; }

  protected:
    explicit Strategy(StrategyHyperparams hp) : hp_(std::move(hp)) {}

    // gathers a chunk of store windows into scratch.x / scratch.labels
    static void gather_current(const LstmClassifier& model, const WindowStore& store,
                               std::span<const std::uint32_t> chunk, StepScratch& scratch);

    StrategyHyperparams hp_;
};

std::unique_ptr<Strategy> make_strategy(StrategyKind kind, const StrategyHyperparams& hp);

// ---------------------------------------------------------------------------
// Training loop
// ---------------------------------------------------------------------------

// Runs epochs_per_task epochs of minibatch Adam on the effective training
// windows, composing each batch through the strategy. Deterministic given
// rng_seed; optimizer state starts fresh.
TrainingLog train_task(LstmClassifier& model, const WindowStore& store,
                       std::span<const std::uint32_t> train_windows, Strategy& strategy,
                       std::uint64_t rng_seed, int epochs_override = 0);

} // namespace canid
