#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <map>
#include <set>

#include "canid/evaluate.hpp"
#include "canid/nn/reference.hpp"
#include "canid/strategies.hpp"

using namespace canid;
namespace fs = std::filesystem;

namespace {

PreparedDataset small_dataset(int drivers, std::uint64_t seed = 13) {
    SyntheticSpec spec{drivers, 2, 120, 4, seed};
    PrepareOptions opts;
    opts.window_length = 12;
    opts.stride = 6;
    return prepare_dataset(generate_synthetic(spec), opts);
}

ClassifierConfig small_model_config(const PreparedDataset& ds, int max_classes) {
    ClassifierConfig c;
    c.input_features = ds.train.features;
    c.window_length = ds.window_length;
    c.hidden_size = 10;
    c.num_layers = 1;
    c.dropout = 0.0;
    c.max_classes = max_classes;
    c.batch_size = 8;
    c.epochs_per_task = 2;
    return c;
}

std::vector<std::uint32_t> session_windows(const PreparedDataset& ds, int driver) {
    std::vector<std::uint32_t> out;
    for (const SessionRange& r : ds.sessions)
        if (r.driver == driver)
            for (std::uint32_t i = r.train_begin; i < r.train_end; ++i) out.push_back(i);
    return out;
}

} // namespace

TEST_CASE("fine-tuning hooks are identities") {
    PreparedDataset ds = small_dataset(2);
    auto strategy = make_strategy(StrategyKind::FineTune, {});
    LstmClassifier model(small_model_config(ds, 2), 1);
    model.register_classes(ds.driver_ids);

    std::vector<std::uint32_t> chunk = {0, 1, 2};
    StepScratch scratch;
    Rng rng(5);
    nn::StepInputs<float> step = strategy->compose_step(model, ds.train, chunk, rng, scratch);
    CHECK(step.batch == 3);
    CHECK(step.distill_weight == 0.0);
    CHECK(step.logit_batch == 0);
    CHECK(step.label_batch == 0);
    CHECK(step.bundles == nullptr);
    // composed batch is exactly the input windows
    for (std::size_t i = 0; i < chunk.size(); ++i) {
        auto w = ds.train.window(chunk[i]);
        for (std::size_t j = 0; j < w.size(); ++j) CHECK(scratch.x[i * w.size() + j] == w[j]);
    }
    CHECK(strategy->state_bytes({60, 46, 10, 0, 0}) == 0);
}

TEST_CASE("cumulative swaps in all data seen so far and resets parameters") {
    PreparedDataset ds = small_dataset(4);
    TaskStream stream = build_scenario1(ds, permute_classes(ds.driver_ids, 0));
    auto strategy = make_strategy(StrategyKind::Cumulative, {});
    LstmClassifier model(small_model_config(ds, 4), 1);
    std::vector<float> init = model.net().params;

    std::size_t task1 = stream.tasks[0].train_windows.size();
    std::size_t task2 = stream.tasks[1].train_windows.size();

    TaskContext ctx1{&ds, &stream, 1};
    std::vector<std::uint32_t> eff = stream.tasks[0].train_windows;
    strategy->before_task(model, ctx1, eff);
    CHECK(eff.size() == task1); // task 1 is identical to fine-tuning

    model.net().params[0] += 0.5f;
    TaskContext ctx2{&ds, &stream, 2};
    eff = stream.tasks[1].train_windows;
    strategy->before_task(model, ctx2, eff);
    CHECK(eff.size() == task1 + task2); // cumulative set sizes add up
    CHECK(model.net().params == init);  // from-scratch retraining

    // joint strategy shares the cumulative machinery, and the final-task
    // cumulative set equals the full training pool
    TaskContext ctxT{&ds, &stream, 2};
    eff.clear();
    auto joint = make_strategy(StrategyKind::Joint, {});
    joint->before_task(model, ctxT, eff);
    std::vector<std::uint32_t> sorted_eff = eff;
    std::sort(sorted_eff.begin(), sorted_eff.end());
    std::vector<std::uint32_t> all(ds.train.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<std::uint32_t>(i);
    CHECK(sorted_eff == all);

    // byte accounting reports the stored dataset
    ByteAccounting ba{ds.window_length, ds.train.features, 4, 0, eff.size()};
    CHECK(strategy->state_bytes(ba) ==
          eff.size() * (static_cast<std::uint64_t>(ds.window_length) * ds.train.features * 4 + 8));
}

TEST_CASE("replay memory keeps the per-task quota law") {
    SUBCASE("after task 2 at capacity 1000 both tasks hold 500") {
        PreparedDataset ds = small_dataset(4);
        ReplayMemory mem(1000);
        Rng rng(3);
        // make two "tasks" out of driver windows; each bigger than the quota
        std::vector<std::uint32_t> t1 = session_windows(ds, 0);
        std::vector<std::uint32_t> t2 = session_windows(ds, 1);
        // windows per driver is small here, so shrink capacity instead
        ReplayMemory mem2(20);
        mem2.insert_task(ds.train, t1, 1, rng, nullptr);
        CHECK(mem2.size() == 20);
        mem2.insert_task(ds.train, t2, 2, rng, nullptr);
        CHECK(mem2.size() == 20);
        std::map<int, int> per_task;
        for (const ReplayEntry& e : mem2.entries()) per_task[e.origin_task]++;
        CHECK(per_task[1] == 10);
        CHECK(per_task[2] == 10);
        (void)mem;
    }

    SUBCASE("randomized streams never exceed capacity and stay within +-1 of the quota") {
        Rng meta(17);
        for (std::size_t cap : {10ul, 100ul, 1000ul}) {
            for (int trial = 0; trial < 6; ++trial) {
                PreparedDataset ds = small_dataset(2, 40 + trial);
                int n_tasks = 2 + static_cast<int>(meta.index(9));
                ReplayMemory mem(cap);
                Rng rng(meta.next_u64());
                std::vector<std::size_t> task_sizes;
                for (int t = 1; t <= n_tasks; ++t) {
                    // synthesize a task from a random slice of the train store
                    std::size_t n = 1 + meta.index(ds.train.size());
                    std::vector<std::uint32_t> task;
                    for (std::size_t i = 0; i < n; ++i)
                        task.push_back(static_cast<std::uint32_t>(meta.index(ds.train.size())));
                    task_sizes.push_back(n);
                    mem.insert_task(ds.train, task, t, rng, nullptr);

                    CHECK(mem.size() <= cap);
                    std::size_t quota = cap / static_cast<std::size_t>(t);
                    std::map<int, std::size_t> per_task;
                    for (const ReplayEntry& e : mem.entries()) per_task[e.origin_task]++;
                    for (int origin = 1; origin <= t; ++origin) {
                        std::size_t stored = per_task[origin];
                        std::size_t source = task_sizes[static_cast<std::size_t>(origin - 1)];
                        if (source < quota) {
                            CHECK(stored <= source);
                        } else {
                            CHECK(stored + 1 >= quota);
                            CHECK(stored <= quota + 1);
                        }
                    }
                }
            }
        }
    }

    SUBCASE("a task smaller than the quota is stored whole") {
        PreparedDataset ds = small_dataset(2);
        ReplayMemory mem(1000);
        Rng rng(1);
        std::vector<std::uint32_t> tiny = {0, 1, 2};
        mem.insert_task(ds.train, tiny, 1, rng, nullptr);
        CHECK(mem.size() == 3);
    }

    SUBCASE("task ids must strictly increase") {
        PreparedDataset ds = small_dataset(2);
        ReplayMemory mem(10);
        Rng rng(1);
        std::vector<std::uint32_t> first{0, 1}, second{2, 3};
        mem.insert_task(ds.train, first, 2, rng, nullptr);
        CHECK_THROWS_AS(mem.insert_task(ds.train, second, 2, rng, nullptr), StateError);
    }

    SUBCASE("capacity zero stores nothing") {
        PreparedDataset ds = small_dataset(2);
        ReplayMemory mem(0);
        Rng rng(1);
        std::vector<std::uint32_t> some{0, 1, 2};
        mem.insert_task(ds.train, some, 1, rng, nullptr);
        CHECK(mem.size() == 0);
    }
}

TEST_CASE("ER batch composition mixes current and memory halves") {
    PreparedDataset ds = small_dataset(4);
    StrategyHyperparams hp;
    hp.memory_capacity = 50;
    hp.replay_ratio = 0.5;
    auto strategy = make_strategy(StrategyKind::ER, hp);
    ClassifierConfig mc = small_model_config(ds, 4);
    mc.batch_size = 32;
    LstmClassifier model(mc, 1);
    model.register_classes(ds.driver_ids);
    TaskStream stream = build_scenario1(ds, permute_classes(ds.driver_ids, 0));

    SUBCASE("before any insertion the hook degrades to identity") {
        CHECK(strategy->current_quota(32) == 32);
        StepScratch scratch;
        Rng rng(2);
        std::vector<std::uint32_t> chunk(32);
        for (std::size_t i = 0; i < 32; ++i) chunk[i] = static_cast<std::uint32_t>(i);
        nn::StepInputs<float> step = strategy->compose_step(model, ds.train, chunk, rng, scratch);
        CHECK(step.batch == 32);
    }

    SUBCASE("after a task the composed batch is 16 current + 16 replayed") {
        TaskContext ctx{&ds, &stream, 1};
        Rng rng(2);
        strategy->after_task(model, ctx, stream.tasks[0].train_windows, rng);
        CHECK(strategy->memory()->size() == 50);
        CHECK(strategy->current_quota(32) == 16);

        StepScratch scratch;
        std::vector<std::uint32_t> chunk(16);
        for (std::size_t i = 0; i < 16; ++i) chunk[i] = stream.tasks[1].train_windows[i];
        nn::StepInputs<float> step = strategy->compose_step(model, ds.train, chunk, rng, scratch);
        CHECK(step.batch == 32);
        // first 16 labels come from the chunk, the rest from memory (task 1 drivers)
        std::set<int> replay_labels;
        for (int i = 16; i < 32; ++i)
            replay_labels.insert(model.active_classes()[static_cast<std::size_t>(scratch.labels[static_cast<std::size_t>(i)])]);
        for (int d : replay_labels) CHECK((d == 0 || d == 1));

        SUBCASE("composition is deterministic for a fixed rng") {
            StepScratch s2;
            Rng rng2(2);
            strategy->compose_step(model, ds.train, chunk, rng2, s2);
            Rng rng3(2);
            StepScratch s3;
            strategy->compose_step(model, ds.train, chunk, rng3, s3);
            CHECK(s2.x == s3.x);
            CHECK(s2.labels == s3.labels);
        }
    }

    SUBCASE("ratio 0 is pure current, ratio 1 is pure memory") {
        StrategyHyperparams hp0 = hp;
        hp0.replay_ratio = 0.0;
        auto s0 = make_strategy(StrategyKind::ER, hp0);
        TaskContext ctx{&ds, &stream, 1};
        Rng rng(2);
        s0->after_task(model, ctx, stream.tasks[0].train_windows, rng);
        CHECK(s0->current_quota(32) == 32);

        StrategyHyperparams hp1 = hp;
        hp1.replay_ratio = 1.0;
        auto s1 = make_strategy(StrategyKind::ER, hp1);
        s1->after_task(model, ctx, stream.tasks[0].train_windows, rng);
        CHECK(s1->current_quota(32) == 0);
        StepScratch scratch;
        nn::StepInputs<float> step = s1->compose_step(model, ds.train, {}, rng, scratch);
        CHECK(step.batch == 32); // all from memory
    }

    SUBCASE("byte accounting uses the capacity, not the fill") {
        ByteAccounting ba{60, 46, 10, 1234, 0};
        CHECK(strategy->state_bytes(ba) == 50ull * (60 * 46 * 4 + 8));
    }
}

TEST_CASE("replay draw is uniform without replacement when possible") {
    PreparedDataset ds = small_dataset(2);
    ReplayMemory mem(8);
    Rng rng(9);
    std::vector<std::uint32_t> eight{0, 1, 2, 3, 4, 5, 6, 7};
    mem.insert_task(ds.train, eight, 1, rng, nullptr);
    REQUIRE(mem.size() == 8);
    std::vector<std::size_t> picks = mem.draw(8, rng);
    std::set<std::size_t> unique(picks.begin(), picks.end());
    CHECK(unique.size() == 8); // without replacement
    picks = mem.draw(20, rng); // more than stored: with replacement
    CHECK(picks.size() == 20);
    ReplayMemory empty(4);
    CHECK_THROWS_AS(empty.draw(1, rng), StateError);
}

TEST_CASE("replay memory serialization round-trips") {
    PreparedDataset ds = small_dataset(2);
    LstmClassifier model(small_model_config(ds, 2), 3);
    model.register_classes(ds.driver_ids);
    ReplayMemory mem(12);
    Rng rng(4);
    std::vector<std::uint32_t> task = session_windows(ds, 0);
    mem.insert_task(ds.train, task, 1, rng, &model); // stores logits too

    fs::path p = fs::temp_directory_path() / "canid_test_memory.bin";
    mem.save(p);
    ReplayMemory loaded(0);
    loaded.load(p);
    CHECK(loaded.capacity() == mem.capacity());
    CHECK(loaded.tasks_seen() == mem.tasks_seen());
    REQUIRE(loaded.size() == mem.size());
    for (std::size_t i = 0; i < mem.size(); ++i) {
        CHECK(loaded.entries()[i].window == mem.entries()[i].window);
        CHECK(loaded.entries()[i].label == mem.entries()[i].label);
        CHECK(loaded.entries()[i].logits == mem.entries()[i].logits);
        CHECK(loaded.entries()[i].origin_task == mem.entries()[i].origin_task);
    }
    fs::remove(p);
}

TEST_CASE("EWC fisher bundles and penalty") {
    PreparedDataset ds = small_dataset(2);
    ClassifierConfig mc = small_model_config(ds, 3); // one unit stays inactive
    LstmClassifier model(mc, 6);
    model.register_classes(ds.driver_ids);
    std::vector<std::uint32_t> task = session_windows(ds, 0);
    task.resize(16);

    FisherBundle bundle = compute_fisher_bundle(model, ds.train, task, 1);
    REQUIRE(bundle.importance.size() == model.param_count());
    CHECK(bundle.anchor == model.net().params);

    SUBCASE("importance is elementwise nonnegative") {
        for (float v : bundle.importance) CHECK(v >= 0.0f);
    }

    SUBCASE("parameters the loss never touches have exactly zero importance") {
        // head row of the inactive third unit
        const nn::NetDims& d = model.net().dims;
        std::size_t row = d.head_w_offset() + 2 * static_cast<std::size_t>(mc.hidden_size);
        for (std::size_t i = 0; i < static_cast<std::size_t>(mc.hidden_size); ++i)
            CHECK(bundle.importance[row + i] == 0.0f);
        CHECK(bundle.importance[d.head_b_offset() + 2] == 0.0f);
    }

    SUBCASE("matches a brute-force per-sample squared-gradient average") {
        // oracle path: per-sample gradients through the independent serial
        // reference implementation
        const int k = model.active_count();
        const std::size_t P = model.param_count();
        std::vector<double> expect(P, 0.0);
        for (std::uint32_t w : task) {
            std::vector<float> x(ds.train.window(w).begin(), ds.train.window(w).end());
            std::vector<nn::ref::SampleTape<float>> tapes;
            std::vector<float> logits(static_cast<std::size_t>(k));
            nn::ref::forward_batch(model.net(), x.data(), 1, k, false, 0.0, 0, tapes, logits.data());
            std::vector<float> dlogits(static_cast<std::size_t>(k));
            int unit = model.unit_of(ds.train.labels[w]);
            for (int j = 0; j < k; ++j) {
                double p = 1.0 / (1.0 + std::exp(-static_cast<double>(logits[static_cast<std::size_t>(j)])));
                dlogits[static_cast<std::size_t>(j)] = static_cast<float>((p - (unit == j ? 1.0 : 0.0)) / k);
            }
            std::vector<float> g(P, 0.0f);
            nn::ref::backward_batch(model.net(), 1, dlogits.data(), k, false, 0.0, 0, tapes, g.data());
            for (std::size_t i = 0; i < P; ++i) expect[i] += static_cast<double>(g[i]) * g[i];
        }
        for (std::size_t i = 0; i < P; ++i) {
            double want = expect[i] / static_cast<double>(task.size());
            CHECK(std::abs(bundle.importance[i] - want) < 1e-6);
        }
    }

    SUBCASE("penalty closed forms") {
        std::vector<FisherBundle> bundles;
        CHECK(ewc_penalty(model, bundles, 10000.0) == 0.0);

        FisherBundle b;
        b.importance.assign(model.param_count(), 1.0f);
        b.anchor = model.net().params;
        bundles.push_back(b);
        CHECK(ewc_penalty(model, bundles, 10000.0) == 0.0); // theta == anchor

        // unit offset in one coordinate with lambda 2 gives exactly 1
        model.net().params[7] += 1.0f;
        CHECK(ewc_penalty(model, bundles, 2.0) == doctest::Approx(1.0).epsilon(1e-6));
        model.net().params[7] -= 1.0f;

        FisherBundle bad;
        bad.importance.assign(3, 1.0f);
        bad.anchor.assign(3, 0.0f);
        CHECK_THROWS_AS(ewc_penalty(model, {bad}, 1.0), StateError);
    }

    SUBCASE("after_task accumulates one bundle per task") {
        auto strategy = make_strategy(StrategyKind::EWC, {});
        TaskStream stream = build_scenario1(ds, permute_classes(ds.driver_ids, 0));
        TaskContext ctx{&ds, &stream, 1};
        Rng rng(1);
        strategy->after_task(model, ctx, task, rng);
        CHECK(strategy->fisher_bundles()->size() == 1);
        TaskContext ctx2{&ds, &stream, 2};
        strategy->after_task(model, ctx2, task, rng);
        CHECK(strategy->fisher_bundles()->size() == 2);
        ByteAccounting ba{12, 4, 3, model.param_count(), 0};
        CHECK(strategy->state_bytes(ba) == 2ull * 2 * model.param_count() * 4);
    }
}

TEST_CASE("LwF distillation loss") {
    SUBCASE("student identical to teacher gives zero") {
        std::vector<float> s{0.5f, -1.0f, 2.0f, 0.0f};
        CHECK(lwf_loss(s, s, 5.0) == 0.0);
    }
    SUBCASE("constant offset delta with lambda 1 gives delta squared") {
        std::vector<float> s{1.5f, -0.5f, 2.5f};
        std::vector<float> t{1.0f, -1.0f, 2.0f};
        CHECK(lwf_loss(s, t, 1.0) == doctest::Approx(0.25).epsilon(1e-6));
    }
    SUBCASE("random tensors match the scalar oracle") {
        Rng rng(77);
        for (int trial = 0; trial < 220; ++trial) {
            std::size_t n = 1 + rng.index(40);
            std::vector<float> s(n), t(n);
            for (std::size_t i = 0; i < n; ++i) {
                s[i] = static_cast<float>(rng.real(-3.0, 3.0));
                t[i] = static_cast<float>(rng.real(-3.0, 3.0));
            }
            double expect = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                expect += (static_cast<double>(s[i]) - t[i]) * (static_cast<double>(s[i]) - t[i]);
            expect = 5.0 * expect / static_cast<double>(n);
            CHECK(lwf_loss(s, t, 5.0) == doctest::Approx(expect).epsilon(1e-6));
        }
    }
    SUBCASE("shape mismatch is rejected") {
        std::vector<float> s{1.0f, 2.0f};
        std::vector<float> t{1.0f};
        CHECK_THROWS_AS(lwf_loss(s, t, 1.0), ShapeError);
    }
}

TEST_CASE("LwF strategy distills toward the pre-task teacher") {
    PreparedDataset ds = small_dataset(4);
    StrategyHyperparams hp;
    hp.lwf_lambda = 5.0;
    auto strategy = make_strategy(StrategyKind::LwF, hp);
    LstmClassifier model(small_model_config(ds, 4), 2);
    TaskStream stream = build_scenario1(ds, permute_classes(ds.driver_ids, 0));

    // task 1: no teacher yet
    TaskContext ctx1{&ds, &stream, 1};
    std::vector<std::uint32_t> eff = stream.tasks[0].train_windows;
    strategy->before_task(model, ctx1, eff);
    model.register_classes(stream.tasks[0].classes_introduced);
    StepScratch scratch;
    Rng rng(3);
    std::vector<std::uint32_t> chunk(eff.begin(), eff.begin() + 4);
    nn::StepInputs<float> step = strategy->compose_step(model, ds.train, chunk, rng, scratch);
    CHECK(step.distill_weight == 0.0);

    // task 2: teacher is the frozen pre-task model over the old classes
    TaskContext ctx2{&ds, &stream, 2};
    eff = stream.tasks[1].train_windows;
    strategy->before_task(model, ctx2, eff);
    model.register_classes(stream.tasks[1].classes_introduced);
    chunk.assign(eff.begin(), eff.begin() + 4);
    step = strategy->compose_step(model, ds.train, chunk, rng, scratch);
    CHECK(step.distill_weight == 5.0);
    CHECK(step.teacher_k == 2);
    REQUIRE(step.teacher_logits != nullptr);
    // student has not trained since the snapshot, so teacher logits equal the
    // student's own logits on the old-class columns
    std::vector<float> student = model.forward(
        std::span<const float>(scratch.x.data(), scratch.x.size()), step.batch, false);
    for (int s = 0; s < step.batch; ++s)
        for (int j = 0; j < 2; ++j)
            CHECK(step.teacher_logits[s * 2 + j] ==
                  doctest::Approx(student[static_cast<std::size_t>(s) * model.active_count() + j])
                      .epsilon(1e-6));
}

TEST_CASE("DER++ losses: limits and brute-force oracle") {
    PreparedDataset ds = small_dataset(4);
    StrategyHyperparams hp;
    hp.memory_capacity = 30;
    auto strategy = make_strategy(StrategyKind::DERpp, hp);
    ClassifierConfig mc = small_model_config(ds, 4);
    mc.batch_size = 8;
    LstmClassifier model(mc, 9);
    model.register_classes(ds.driver_ids);
    TaskStream stream = build_scenario1(ds, permute_classes(ds.driver_ids, 0));

    TaskContext ctx{&ds, &stream, 1};
    Rng rng(5);
    strategy->after_task(model, ctx, stream.tasks[0].train_windows, rng);
    const ReplayMemory* mem = strategy->memory();
    REQUIRE(mem->size() == 30);
    for (const ReplayEntry& e : mem->entries()) CHECK(e.logits.size() == 4);

    SUBCASE("stored logits match an eval forward at insertion time") {
        // the model is unchanged since insertion, so the logit-MSE term is 0
        const ReplayEntry& e = mem->entries()[0];
        std::vector<float> z = model.forward(e.window, 1, false);
        for (std::size_t j = 0; j < e.logits.size(); ++j)
            CHECK(z[j] == doctest::Approx(e.logits[j]).epsilon(1e-7));
    }

    SUBCASE("alpha = beta = 0 reduces to the current loss") {
        std::vector<float> lx(mem->entries()[0].window);
        std::vector<int> w{4};
        std::vector<float> sl(mem->entries()[0].logits);
        std::vector<int> lu{0};
        double total = derpp_loss(1.25, model, lx, 1, sl, w, 4, lx, 1, lu, 0.0, 0.0);
        CHECK(total == doctest::Approx(1.25));
    }

    SUBCASE("empty memory batches leave the current loss unchanged") {
        CHECK(derpp_loss(0.75, model, {}, 0, {}, {}, 0, {}, 0, {}, 1.0, 1.0) == doctest::Approx(0.75));
    }

    SUBCASE("matches a brute-force recomputation of the three-term sum") {
        Rng prng(6);
        for (int trial = 0; trial < 10; ++trial) {
            int m1 = 1 + static_cast<int>(prng.index(4));
            int m2 = 1 + static_cast<int>(prng.index(4));
            std::vector<float> lx, sl, bx;
            std::vector<int> widths, units;
            int stride = model.active_count();
            for (int i = 0; i < m1; ++i) {
                const ReplayEntry& e = mem->entries()[prng.index(mem->size())];
                lx.insert(lx.end(), e.window.begin(), e.window.end());
                int width = 1 + static_cast<int>(prng.index(static_cast<std::size_t>(stride)));
                widths.push_back(width);
                for (int j = 0; j < stride; ++j)
                    sl.push_back(j < static_cast<int>(e.logits.size()) ? e.logits[static_cast<std::size_t>(j)] +
                                                                             static_cast<float>(prng.real(-0.5, 0.5))
                                                                       : 0.0f);
            }
            for (int i = 0; i < m2; ++i) {
                const ReplayEntry& e = mem->entries()[prng.index(mem->size())];
                bx.insert(bx.end(), e.window.begin(), e.window.end());
                units.push_back(model.unit_of(e.label));
            }
            double current = prng.real(0.0, 2.0);
            double got = derpp_loss(current, model, lx, m1, sl, widths, stride, bx, m2, units, 1.0, 1.0);

            // brute force with independent arithmetic
            const int k = model.active_count();
            std::vector<float> z1 = model.forward(lx, m1, false);
            double t_alpha = 0.0;
            for (int i = 0; i < m1; ++i) {
                double entry = 0.0;
                for (int j = 0; j < widths[static_cast<std::size_t>(i)]; ++j) {
                    double d = static_cast<double>(z1[static_cast<std::size_t>(i) * k + j]) -
                               sl[static_cast<std::size_t>(i) * stride + j];
                    entry += d * d;
                }
                t_alpha += entry / widths[static_cast<std::size_t>(i)];
            }
            t_alpha /= m1;
            std::vector<float> z2 = model.forward(bx, m2, false);
            double t_beta = 0.0;
            for (int i = 0; i < m2; ++i)
                for (int j = 0; j < k; ++j) {
                    double p = 1.0 / (1.0 + std::exp(-static_cast<double>(z2[static_cast<std::size_t>(i) * k + j])));
                    double y = units[static_cast<std::size_t>(i)] == j ? 1.0 : 0.0;
                    t_beta += -(y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
                }
            t_beta /= static_cast<double>(m2) * k;
            CHECK(got == doctest::Approx(current + t_alpha + t_beta).epsilon(1e-6));
        }
    }

    SUBCASE("byte accounting includes the logit slots at full head width") {
        ByteAccounting ba{60, 46, 10, 0, 0};
        CHECK(strategy->state_bytes(ba) == 30ull * (60 * 46 * 4 + 8 + 10 * 4));
    }
}
