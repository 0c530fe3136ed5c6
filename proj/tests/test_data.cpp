#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "canid/data.hpp"

using namespace canid;
namespace fs = std::filesystem;

namespace {

SessionTrace make_trace(int driver, int session, const std::vector<std::vector<double>>& rows) {
    SessionTrace t;
    t.driver_id = driver;
    t.session_id = session;
    t.rows = static_cast<int>(rows.size());
    t.cols = rows.empty() ? 0 : static_cast<int>(rows.front().size());
    for (const auto& r : rows) t.records.insert(t.records.end(), r.begin(), r.end());
    return t;
}

fs::path temp_dir(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("canid_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

} // namespace

TEST_CASE("window count law matches brute-force offset enumeration") {
    Rng rng(7);
    for (int trial = 0; trial < 300; ++trial) {
        int T = static_cast<int>(rng.index(200));
        int length = 1 + static_cast<int>(rng.index(80));
        int stride = 1 + static_cast<int>(rng.index(12));
        int brute = 0;
        for (int off = 0; off + length <= T; off += stride) ++brute;
        CHECK(window_count(T, length, stride) == brute);
    }
    CHECK(window_count(60, 60, 6) == 1);
    CHECK(window_count(126, 60, 6) == 12);
    CHECK(window_count(59, 60, 6) == 0);
}

TEST_CASE("make_windows copies values and carries label, session and start index") {
    std::vector<std::vector<double>> rows;
    for (int r = 0; r < 26; ++r) rows.push_back({static_cast<double>(r), static_cast<double>(-r)});
    SessionTrace t = make_trace(3, 2, rows);
    WindowStore store;
    int n = make_windows(t, 10, 4, store);
    CHECK(n == 5);
    CHECK(store.size() == 5);
    for (std::size_t w = 0; w < store.size(); ++w) {
        CHECK(store.labels[w] == 3);
        CHECK(store.session_ids[w] == 2);
        CHECK(store.start_indices[w] == static_cast<int>(w) * 4);
        auto vals = store.window(w);
        CHECK(vals.size() == 20);
        CHECK(vals[0] == doctest::Approx(static_cast<double>(w * 4)));
        for (float v : vals) CHECK(std::isfinite(v));
    }
    SUBCASE("short trace yields an empty list") {
        WindowStore empty_store;
        SessionTrace tiny = make_trace(0, 1, {{1.0}, {2.0}});
        CHECK(make_windows(tiny, 10, 4, empty_store) == 0);
        CHECK(empty_store.size() == 0);
    }
    SUBCASE("invalid length or stride is rejected") {
        WindowStore s2;
        CHECK_THROWS_AS(make_windows(t, 0, 4, s2), ConfigError);
        CHECK_THROWS_AS(make_windows(t, 10, 0, s2), ConfigError);
    }
}

TEST_CASE("feature mask: {1,2,3} gives mean 2 and population std sqrt(2/3)") {
    SessionTrace t = make_trace(0, 1, {{1.0}, {2.0}, {3.0}});
    RawDataset raw;
    raw.sessions.push_back(t);
    raw.feature_names = {"a"};
    FeatureMask mask = fit_feature_mask(raw);
    REQUIRE(mask.retained_count() == 1);
    CHECK(mask.means[0] == doctest::Approx(2.0));
    CHECK(mask.stds[0] == doctest::Approx(std::sqrt(2.0 / 3.0)));

    SessionTrace z = standardize(t, mask);
    CHECK(z.at(0, 0) == doctest::Approx(-1.2247448).epsilon(1e-6));
    CHECK(z.at(1, 0) == doctest::Approx(0.0));
    CHECK(z.at(2, 0) == doctest::Approx(1.2247448).epsilon(1e-6));
}

TEST_CASE("feature mask drops exactly the zero-variance columns") {
    SessionTrace t = make_trace(0, 1, {{1.0, 7.0, 0.5}, {2.0, 7.0, 0.25}, {0.0, 7.0, 0.75}});
    RawDataset raw;
    raw.sessions.push_back(t);
    raw.feature_names = {"a", "const", "b"};
    FeatureMask mask = fit_feature_mask(raw);
    CHECK(mask.retained == std::vector<bool>{true, false, true});
    CHECK(mask.dropped_names == std::vector<std::string>{"const"});
    CHECK(mask.retained_names == std::vector<std::string>{"a", "b"});

    SUBCASE("fewer than 2 rows is insufficient") {
        RawDataset one;
        one.sessions.push_back(make_trace(0, 1, {{1.0}}));
        one.feature_names = {"a"};
        CHECK_THROWS_AS(fit_feature_mask(one), InsufficientDataError);
    }
}

TEST_CASE("standardize maps fit data to zero mean and unit variance") {
    Rng rng(11);
    std::vector<std::vector<double>> rows;
    for (int r = 0; r < 200; ++r) rows.push_back({rng.normal() * 3 + 5, rng.normal() * 0.2 - 1});
    SessionTrace t = make_trace(0, 1, rows);
    RawDataset raw;
    raw.sessions.push_back(t);
    raw.feature_names = {"a", "b"};
    FeatureMask mask = fit_feature_mask(raw);
    SessionTrace z = standardize(t, mask);

    // re-fitting on the standardized rows must give ~0 means and ~1 stds
    RawDataset zraw;
    zraw.sessions.push_back(z);
    zraw.feature_names = mask.retained_names;
    FeatureMask refit = fit_feature_mask(zraw);
    for (std::size_t i = 0; i < refit.means.size(); ++i) {
        CHECK(std::abs(refit.means[i]) < 1e-6);
        CHECK(std::abs(refit.stds[i] - 1.0) < 1e-6);
    }

    SUBCASE("constant rows equal to the means map to zero") {
        SessionTrace c = make_trace(0, 1, {{mask.means[0], mask.means[1]}, {mask.means[0], mask.means[1]}});
        SessionTrace zc = standardize(c, mask);
        CHECK(zc.at(0, 0) == doctest::Approx(0.0));
        CHECK(zc.at(1, 1) == doctest::Approx(0.0));
    }
    SUBCASE("single row substitution") {
        FeatureMask m;
        m.retained = {true};
        m.means = {2.0};
        m.stds = {1.0};
        m.retained_names = {"a"};
        SessionTrace s = make_trace(0, 1, {{4.0}});
        CHECK(standardize(s, m).at(0, 0) == doctest::Approx(2.0));
    }
    SUBCASE("dimension mismatch is a shape error") {
        SessionTrace bad = make_trace(0, 1, {{1.0, 2.0, 3.0}});
        CHECK_THROWS_AS(standardize(bad, mask), ShapeError);
    }
}

TEST_CASE("split counts use ceil for the train share") {
    CHECK(split_counts(10, 0.7) == std::pair<int, int>{7, 3});
    CHECK(split_counts(1, 0.7) == std::pair<int, int>{1, 0});
    CHECK(split_counts(523, 0.7) == std::pair<int, int>{367, 156});
    CHECK(split_counts(1103, 0.7) == std::pair<int, int>{773, 330});
    CHECK_THROWS_AS(split_counts(10, 0.0), ConfigError);
    CHECK_THROWS_AS(split_counts(10, 1.0), ConfigError);
    Rng rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        int n = 1 + static_cast<int>(rng.index(2000));
        auto [tr, te] = split_counts(n, 0.7);
        CHECK(tr + te == n);
        CHECK(tr >= 1);
        CHECK(te >= 0);
    }
}

TEST_CASE("synthetic generation is deterministic and seed-sensitive") {
    SyntheticSpec spec{5, 2, 120, 8, 0};
    RawDataset a = generate_synthetic(spec);
    RawDataset b = generate_synthetic(spec);
    REQUIRE(a.sessions.size() == 10);
    CHECK(a.feature_names.size() == 8);
    for (std::size_t i = 0; i < a.sessions.size(); ++i) {
        CHECK(a.sessions[i].records == b.sessions[i].records); // bit-identical
        CHECK(a.sessions[i].rows == 120);
    }
    SyntheticSpec other = spec;
    other.seed = 1;
    RawDataset c = generate_synthetic(other);
    CHECK(a.sessions[0].records != c.sessions[0].records);
    CHECK_THROWS_AS(generate_synthetic(SyntheticSpec{0, 1, 10, 2, 0}), ConfigError);
}

TEST_CASE("prepare_dataset: partition, finiteness and zero-variance exclusion") {
    SyntheticSpec spec{3, 2, 150, 4, 5};
    RawDataset raw = generate_synthetic(spec);
    // inject a constant column into every session
    for (SessionTrace& t : raw.sessions) {
        std::vector<double> with_const;
        for (int r = 0; r < t.rows; ++r) {
            for (int c = 0; c < t.cols; ++c) with_const.push_back(t.at(r, c));
            with_const.push_back(42.0);
        }
        t.records = std::move(with_const);
        t.cols += 1;
    }
    raw.feature_names.push_back("always42");

    PrepareOptions opts;
    opts.window_length = 30;
    opts.stride = 5;
    opts.train_fraction = 0.7;
    PreparedDataset ds = prepare_dataset(raw, opts);

    CHECK(ds.train.features == 4); // constant column never reaches windows
    CHECK(ds.mask.dropped_names == std::vector<std::string>{"always42"});
    CHECK(ds.driver_ids == std::vector<int>{0, 1, 2});

    int expected = window_count(150, 30, 5);
    auto [etr, ete] = split_counts(expected, 0.7);
    for (const SessionWindowCounts& c : ds.manifest()) {
        CHECK(c.train == etr);
        CHECK(c.test == ete);
    }
    CHECK(ds.train.size() == static_cast<std::size_t>(etr) * 6);
    CHECK(ds.test.size() == static_cast<std::size_t>(ete) * 6);
    for (float v : ds.train.values) CHECK(std::isfinite(v));

    SUBCASE("session ranges partition the stores") {
        std::size_t train_total = 0, test_total = 0;
        for (const SessionRange& r : ds.sessions) {
            train_total += r.train_end - r.train_begin;
            test_total += r.test_end - r.test_begin;
        }
        CHECK(train_total == ds.train.size());
        CHECK(test_total == ds.test.size());
    }

    SUBCASE("chronological split: test windows start after every train window") {
        for (const SessionRange& r : ds.sessions) {
            int max_train = -1;
            for (std::uint32_t i = r.train_begin; i < r.train_end; ++i)
                max_train = std::max(max_train, ds.train.start_indices[i]);
            for (std::uint32_t i = r.test_begin; i < r.test_end; ++i)
                CHECK(ds.test.start_indices[i] > max_train);
        }
    }

    SUBCASE("random split mode also partitions exactly") {
        PrepareOptions ro = opts;
        ro.split_mode = SplitMode::Random;
        ro.split_seed = 9;
        PreparedDataset rds = prepare_dataset(raw, ro);
        for (const SessionWindowCounts& c : rds.manifest()) {
            CHECK(c.train == etr);
            CHECK(c.test == ete);
        }
    }

    SUBCASE("save and load round-trips the content hash") {
        fs::path dir = temp_dir("prepared");
        ds.save(dir);
        PreparedDataset loaded = PreparedDataset::load(dir);
        CHECK(loaded.content_hash == ds.content_hash);
        CHECK(loaded.train.values == ds.train.values);
        CHECK(loaded.mask.means == ds.mask.means);
        CHECK(loaded.sessions.size() == ds.sessions.size());
        fs::remove_all(dir);
    }
}

TEST_CASE("csv loading") {
    fs::path dir = temp_dir("csv");
    CsvSchema schema;
    schema.driver_column = "Class";
    schema.session_column = "PathOrder";

    SUBCASE("minimal well-formed file") {
        fs::path p = dir / "mini.csv";
        {
            std::ofstream os(p);
            os << "s1,s2,s3,s4,s5,Class,PathOrder\n";
            for (int r = 0; r < 100; ++r)
                os << r << "," << r * 2 << "," << 1.5 << "," << -r << "," << 0.25 * r << ",A,1\n";
        }
        RawDataset ds = load_csv(p, schema);
        REQUIRE(ds.sessions.size() == 1);
        CHECK(ds.sessions[0].rows == 100);
        CHECK(ds.sessions[0].cols == 5);
        CHECK(ds.sessions[0].driver_id == 0);
        CHECK(ds.sessions[0].session_id == 1);
        CHECK(ds.feature_names == std::vector<std::string>{"s1", "s2", "s3", "s4", "s5"});
    }

    SUBCASE("drivers map to sorted ids and sessions to 1..m") {
        fs::path p = dir / "two.csv";
        {
            std::ofstream os(p);
            os << "v,Class,PathOrder\n";
            for (const char* d : {"B", "A"})
                for (int s : {7, 3})
                    for (int r = 0; r < 5; ++r) os << r << "," << d << "," << s << "\n";
        }
        RawDataset ds = load_csv(p, schema);
        REQUIRE(ds.sessions.size() == 4);
        // A -> 0, B -> 1; session values {3,7} -> {1,2}
        CHECK(ds.sessions[0].driver_id == 0);
        CHECK(ds.sessions[0].session_id == 1);
        CHECK(ds.sessions[3].driver_id == 1);
        CHECK(ds.sessions[3].session_id == 2);
    }

    SUBCASE("empty file is a parse error") {
        fs::path p = dir / "empty.csv";
        std::ofstream(p).close();
        CHECK_THROWS_AS(load_csv(p, schema), ParseError);
    }

    SUBCASE("header-only file is a parse error") {
        fs::path p = dir / "hdr.csv";
        std::ofstream(p) << "v,Class,PathOrder\n";
        CHECK_THROWS_AS(load_csv(p, schema), ParseError);
    }

    SUBCASE("malformed row reports the row number") {
        fs::path p = dir / "bad.csv";
        std::ofstream(p) << "v,Class,PathOrder\n1.0,A,1\nnot_a_number,A,1\n";
        try {
            load_csv(p, schema);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(std::string(e.what()).find("row 3") != std::string::npos);
        }
    }

    SUBCASE("unknown driver label is a schema error when labels are pinned") {
        fs::path p = dir / "unk.csv";
        std::ofstream(p) << "v,Class,PathOrder\n1.0,Z,1\n";
        CsvSchema pinned = schema;
        pinned.driver_labels = {"A", "B"};
        CHECK_THROWS_AS(load_csv(p, pinned), SchemaError);
    }

    SUBCASE("missing file is an io error") {
        CHECK_THROWS_AS(load_csv(dir / "nope.csv", schema), IoError);
    }

    SUBCASE("missing schema columns are schema errors") {
        fs::path p = dir / "cols.csv";
        std::ofstream(p) << "v,Driver,PathOrder\n1.0,A,1\n";
        CHECK_THROWS_AS(load_csv(p, schema), SchemaError);
    }

    fs::remove_all(dir);
}

TEST_CASE("feature mask json round trip") {
    FeatureMask m;
    m.retained = {true, false, true};
    m.means = {1.5, -2.25};
    m.stds = {0.5, 3.0};
    m.retained_names = {"a", "c"};
    m.dropped_names = {"b"};
    fs::path dir = temp_dir("mask");
    m.save_json(dir / "mask.json");
    FeatureMask r = FeatureMask::load_json(dir / "mask.json");
    CHECK(r.retained == m.retained);
    CHECK(r.means == m.means);
    CHECK(r.stds == m.stds);
    CHECK(r.retained_names == m.retained_names);
    CHECK(r.dropped_names == m.dropped_names);
    fs::remove_all(dir);
}
