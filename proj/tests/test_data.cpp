#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "ccrgnn/data.hpp"
#include "ccrgnn/errors.hpp"

using namespace ccrgnn;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("ccrgnn_test_" + std::to_string(std::random_device{}()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

double segment_distance(const std::vector<double>& p, const std::vector<double>& a,
                        const std::vector<double>& b) {
    // distance from p to the segment [a, b]
    double ab2 = 0.0, ap_ab = 0.0;
    for (size_t i = 0; i < p.size(); ++i) {
        ab2 += (b[i] - a[i]) * (b[i] - a[i]);
        ap_ab += (p[i] - a[i]) * (b[i] - a[i]);
    }
    const double t = ab2 > 0.0 ? std::clamp(ap_ab / ab2, 0.0, 1.0) : 0.0;
    double d2 = 0.0;
    for (size_t i = 0; i < p.size(); ++i) {
        const double proj = a[i] + t * (b[i] - a[i]);
        d2 += (p[i] - proj) * (p[i] - proj);
    }
    return std::sqrt(d2);
}

double min_segment_distance_to_class(const ProcessedRecord& synth,
                                     const std::vector<ProcessedRecord>& originals) {
    double best = 1e300;
    for (size_t i = 0; i < originals.size(); ++i) {
        if (originals[i].label_index != synth.label_index) continue;
        for (size_t j = i + 1; j < originals.size(); ++j) {
            if (originals[j].label_index != synth.label_index) continue;
            best = std::min(best, segment_distance(synth.x, originals[i].x, originals[j].x));
        }
    }
    return best;
}

}  // namespace

TEST_SUITE("data") {

TEST_CASE("load_csv basics") {
    TempDir dir;
    SUBCASE("two rows with one empty numeric cell") {
        write_file(dir.file("a.csv"), "income,sector,rating\n1.5,tech,AA\n,energy,B\n");
        const auto records = load_csv(dir.file("a.csv"));
        REQUIRE(records.size() == 2);
        CHECK(records[0].numeric.size() == 1);
        CHECK(records[0].numeric[0].second == 1.5);
        CHECK_FALSE(records[1].numeric[0].second.has_value());
        CHECK(records[0].categorical[0].second == std::string("tech"));
        CHECK(records[0].label == "AA");
        CHECK(records[1].label == "B");
    }
    SUBCASE("unknown rating string is a validation error") {
        write_file(dir.file("b.csv"), "income,rating\n1.5,ZZZ\n");
        CHECK_THROWS_AS(load_csv(dir.file("b.csv")), ValidationError);
    }
    SUBCASE("malformed row reports the row number") {
        write_file(dir.file("c.csv"), "income,rating\n1.5,AA\n1.5\n");
        CHECK_THROWS_WITH_AS(load_csv(dir.file("c.csv")), doctest::Contains("row 3"), ParseError);
    }
    SUBCASE("missing rating column") {
        write_file(dir.file("d.csv"), "income,label\n1.5,AA\n");
        CHECK_THROWS_AS(load_csv(dir.file("d.csv")), ParseError);
    }
    SUBCASE("missing file") { CHECK_THROWS_AS(load_csv(dir.file("nope.csv")), InputError); }
}

TEST_CASE("write_csv then load_csv round-trips records") {
    TempDir dir;
    std::mt19937_64 rng(20);
    std::uniform_real_distribution<double> unit(-10.0, 10.0);
    std::vector<RawRecord> records;
    const std::vector<std::string> sectors{"tech", "energy", "retail, inc.", "tel \"quoted\""};
    for (int i = 0; i < 25; ++i) {
        RawRecord r;
        r.id = "corp-" + std::to_string(i);
        r.numeric.emplace_back("income", (i % 5 == 0) ? std::nullopt
                                                      : std::optional<double>(unit(rng)));
        r.numeric.emplace_back("debt", std::optional<double>(unit(rng)));
        r.categorical.emplace_back("sector",
                                   (i % 7 == 0) ? std::nullopt
                                                : std::optional<std::string>(
                                                      sectors[static_cast<size_t>(i) % 4]));
        r.label = kRatingGrades[static_cast<size_t>(i) % 9];
        records.push_back(std::move(r));
    }
    write_csv(dir.file("rt.csv"), records);
    const auto back = load_csv(dir.file("rt.csv"));
    REQUIRE(back.size() == records.size());
    for (size_t i = 0; i < records.size(); ++i) {
        CHECK(back[i].id == records[i].id);
        CHECK(back[i].label == records[i].label);
        REQUIRE(back[i].numeric.size() == records[i].numeric.size());
        for (size_t f = 0; f < records[i].numeric.size(); ++f) {
            CHECK(back[i].numeric[f].first == records[i].numeric[f].first);
            CHECK(back[i].numeric[f].second == records[i].numeric[f].second);
        }
        REQUIRE(back[i].categorical.size() == records[i].categorical.size());
        for (size_t f = 0; f < records[i].categorical.size(); ++f)
            CHECK(back[i].categorical[f].second == records[i].categorical[f].second);
    }
}

TEST_CASE("fit_schema") {
    auto rec = [](std::optional<double> a, std::optional<double> b) {
        RawRecord r;
        r.numeric.emplace_back("a", a);
        r.numeric.emplace_back("b", b);
        r.label = "AAA";
        return r;
    };
    SUBCASE("feature missing in 60% of rows is dropped at threshold 0.5") {
        std::vector<RawRecord> rs;
        for (int i = 0; i < 10; ++i) rs.push_back(rec(i < 4 ? std::optional<double>(i) : std::nullopt, 1.0));
        const FeatureSchema s = fit_schema(rs, 0.5);
        REQUIRE(s.dropped.size() == 1);
        CHECK(s.dropped[0] == "a");
        REQUIRE(s.numeric.size() == 1);
        CHECK(s.numeric[0].name == "b");
    }
    SUBCASE("no missing values: empty drop-list, means are column means") {
        std::vector<RawRecord> rs{rec(1, 10), rec(2, 20), rec(3, 30)};
        const FeatureSchema s = fit_schema(rs, 0.5);
        CHECK(s.dropped.empty());
        CHECK(s.numeric[0].mean == doctest::Approx(2.0));
        CHECK(s.numeric[1].mean == doctest::Approx(20.0));
    }
    SUBCASE("values {1,3} with one missing: mean 2, min 1, max 3") {
        std::vector<RawRecord> rs{rec(1, 0), rec(3, 0), rec(std::nullopt, 0)};
        const FeatureSchema s = fit_schema(rs, 0.5);
        CHECK(s.numeric[0].min == 1.0);
        CHECK(s.numeric[0].max == 3.0);
        CHECK(s.numeric[0].mean == 2.0);
    }
    SUBCASE("kept feature with zero observed values is a schema error") {
        std::vector<RawRecord> rs{rec(std::nullopt, 1), rec(std::nullopt, 2)};
        CHECK_THROWS_AS(fit_schema(rs, 1.0), SchemaError);
    }
    SUBCASE("empty input is a schema error") {
        CHECK_THROWS_AS(fit_schema({}, 0.5), SchemaError);
    }
}

TEST_CASE("preprocess") {
    RawRecord r;
    r.numeric.emplace_back("a", 5.0);
    r.categorical.emplace_back("s", std::string("A"));
    r.label = "BB";
    FeatureSchema schema;
    schema.numeric.push_back({"a", 0.0, 10.0, 4.0});
    schema.categorical.push_back({"s", {"A", "B", "C"}, "A"});

    SUBCASE("numeric 5 with (min 0, max 10) scales to 0.5") {
        const ProcessedRecord p = preprocess(r, schema);
        REQUIRE(p.x.size() == 4);
        CHECK(p.x[0] == 0.5);
        CHECK(p.x[1] == 1.0);  // one-hot for "A"
        CHECK(p.x[2] == 0.0);
        CHECK(p.x[3] == 0.0);
        CHECK(p.label_index == 4);  // BB
    }
    SUBCASE("boundaries map to 0 and 1") {
        r.numeric[0].second = 0.0;
        CHECK(preprocess(r, schema).x[0] == 0.0);
        r.numeric[0].second = 10.0;
        CHECK(preprocess(r, schema).x[0] == 1.0);
    }
    SUBCASE("missing numeric uses the schema mean") {
        r.numeric[0].second = std::nullopt;
        CHECK(preprocess(r, schema).x[0] == doctest::Approx(0.4));
    }
    SUBCASE("constant feature normalizes to 0") {
        FeatureSchema s2 = schema;
        s2.numeric[0] = {"a", 7.0, 7.0, 7.0};
        r.numeric[0].second = 7.0;
        CHECK(preprocess(r, s2).x[0] == 0.0);
    }
    SUBCASE("unknown category is an encoding error") {
        r.categorical[0].second = std::string("D");
        CHECK_THROWS_AS(preprocess(r, schema), ValidationError);
    }
    SUBCASE("missing categorical falls back to the fill value") {
        r.categorical[0].second = std::nullopt;
        const ProcessedRecord p = preprocess(r, schema);
        CHECK(p.x[1] == 1.0);
    }
    SUBCASE("deterministic: re-applying the schema is bit-identical") {
        const ProcessedRecord p1 = preprocess(r, schema);
        const ProcessedRecord p2 = preprocess(r, schema);
        CHECK(p1.x == p2.x);
    }
}

TEST_CASE("preprocess keeps numeric components in [0,1] on resampled data") {
    // components from numeric features stay in range even for values seen
    // during fitting at the extremes
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> unit(-50.0, 50.0);
    std::vector<RawRecord> rs;
    for (int i = 0; i < 40; ++i) {
        RawRecord r;
        r.numeric.emplace_back("v", unit(rng));
        r.label = "A";
        rs.push_back(std::move(r));
    }
    const FeatureSchema schema = fit_schema(rs, 0.5);
    for (const auto& r : rs) {
        const ProcessedRecord p = preprocess(r, schema);
        CHECK(p.x[0] >= 0.0);
        CHECK(p.x[0] <= 1.0);
    }
}

TEST_CASE("smote") {
    std::mt19937_64 rng(22);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto make_class = [&](int label, int count) {
        std::vector<ProcessedRecord> rs;
        for (int i = 0; i < count; ++i) {
            ProcessedRecord r;
            r.label_index = label;
            r.x = {unit(rng), unit(rng), unit(rng)};
            rs.push_back(std::move(r));
        }
        return rs;
    };

    SUBCASE("already balanced dataset is returned unchanged") {
        auto a = make_class(0, 5);
        auto b = make_class(1, 5);
        std::vector<ProcessedRecord> all = a;
        all.insert(all.end(), b.begin(), b.end());
        const auto out = smote(all, 5, 7);
        REQUIRE(out.size() == all.size());
        for (size_t i = 0; i < all.size(); ++i) CHECK(out[i].x == all[i].x);
    }
    SUBCASE("classes {10,4} balance to {10,10} with on-segment synthetics") {
        auto a = make_class(0, 10);
        auto b = make_class(1, 4);
        std::vector<ProcessedRecord> all = a;
        all.insert(all.end(), b.begin(), b.end());
        const auto out = smote(all, 3, 7);
        const auto hist = class_histogram(out);
        CHECK(hist[0] == 10);
        CHECK(hist[1] == 10);
        // originals retained unchanged, in order
        for (size_t i = 0; i < all.size(); ++i) CHECK(out[i].x == all[i].x);
        // oracle: every synthetic lies on a segment between two class points
        for (size_t i = all.size(); i < out.size(); ++i) {
            CHECK(out[i].label_index == 1);
            CHECK(min_segment_distance_to_class(out[i], all) < 1e-9);
        }
    }
    SUBCASE("synthetics stay inside the class bounding box") {
        auto a = make_class(0, 12);
        auto b = make_class(1, 3);
        std::vector<ProcessedRecord> all = a;
        all.insert(all.end(), b.begin(), b.end());
        const auto out = smote(all, 5, 9);
        std::vector<double> lo(3, 1e300), hi(3, -1e300);
        for (const auto& r : all)
            if (r.label_index == 1)
                for (size_t f = 0; f < 3; ++f) {
                    lo[f] = std::min(lo[f], r.x[f]);
                    hi[f] = std::max(hi[f], r.x[f]);
                }
        for (size_t i = all.size(); i < out.size(); ++i)
            for (size_t f = 0; f < 3; ++f) {
                CHECK(out[i].x[f] >= lo[f] - 1e-12);
                CHECK(out[i].x[f] <= hi[f] + 1e-12);
            }
    }
    SUBCASE("deterministic under a fixed seed") {
        auto a = make_class(0, 8);
        auto b = make_class(1, 3);
        std::vector<ProcessedRecord> all = a;
        all.insert(all.end(), b.begin(), b.end());
        const auto out1 = smote(all, 2, 42);
        const auto out2 = smote(all, 2, 42);
        REQUIRE(out1.size() == out2.size());
        for (size_t i = 0; i < out1.size(); ++i) CHECK(out1[i].x == out2[i].x);
    }
    SUBCASE("a minority class with one sample cannot be rebalanced") {
        auto a = make_class(0, 5);
        auto b = make_class(1, 1);
        std::vector<ProcessedRecord> all = a;
        all.insert(all.end(), b.begin(), b.end());
        CHECK_THROWS_AS(smote(all, 5, 1), RebalanceError);
    }
}

TEST_CASE("stratified_split") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<ProcessedRecord> data;
    const std::vector<int> class_sizes{40, 30, 20, 10};
    for (int c = 0; c < 4; ++c)
        for (int i = 0; i < class_sizes[static_cast<size_t>(c)]; ++i) {
            ProcessedRecord r;
            r.label_index = c;
            r.x = {unit(rng), unit(rng)};
            data.push_back(std::move(r));
        }

    SUBCASE("100 samples at fraction 0.2 split 80/20") {
        const auto [train, test] = stratified_split(data, 0.2, 5);
        CHECK(train.size() == 80);
        CHECK(test.size() == 20);
    }
    SUBCASE("per-class counts within one of proportional") {
        const auto [train, test] = stratified_split(data, 0.2, 5);
        const auto hist = class_histogram(test);
        for (int c = 0; c < 4; ++c) {
            const double want = 0.2 * class_sizes[static_cast<size_t>(c)];
            CHECK(std::abs(hist[static_cast<size_t>(c)] - want) <= 1.0);
        }
    }
    SUBCASE("disjoint and exhaustive") {
        const auto [train, test] = stratified_split(data, 0.3, 6);
        CHECK(train.size() + test.size() == data.size());
        // vectors are continuous draws, so equality identifies records
        std::set<std::vector<double>> seen;
        for (const auto& r : train) seen.insert(r.x);
        for (const auto& r : test) CHECK(seen.count(r.x) == 0);
    }
    SUBCASE("two seeds give different partitions of the same sizes") {
        const auto [t1, e1] = stratified_split(data, 0.2, 1);
        const auto [t2, e2] = stratified_split(data, 0.2, 2);
        CHECK(e1.size() == e2.size());
        bool different = false;
        for (size_t i = 0; i < e1.size() && !different; ++i) different = e1[i].x != e2[i].x;
        CHECK(different);
    }
    SUBCASE("a single-sample class goes to train") {
        std::vector<ProcessedRecord> tiny = data;
        ProcessedRecord lone;
        lone.label_index = 7;
        lone.x = {0.5, 0.5};
        tiny.push_back(lone);
        const auto [train, test] = stratified_split(tiny, 0.5, 3);
        bool in_train = false;
        for (const auto& r : train) in_train = in_train || r.label_index == 7;
        CHECK(in_train);
    }
    SUBCASE("bad fraction is a config error") {
        CHECK_THROWS_AS(stratified_split(data, 0.0, 1), ConfigError);
        CHECK_THROWS_AS(stratified_split(data, 1.0, 1), ConfigError);
    }
}

TEST_CASE("generate_synthetic") {
    SUBCASE("n=9, m=9, uniform imbalance: one sample per class") {
        const std::vector<double> uniform(9, 1.0 / 9.0);
        const auto data = generate_synthetic(9, 4, 9, 1.0, uniform, 1);
        const auto hist = class_histogram(data);
        REQUIRE(hist.size() == 9);
        for (int c : hist) CHECK(c == 1);
    }
    SUBCASE("separation 0 with zero noise: all samples identical") {
        const std::vector<double> uniform(3, 1.0 / 3.0);
        const auto data = generate_synthetic(9, 5, 3, 0.0, uniform, 2, 0.0);
        for (const auto& r : data) CHECK(r.x == data[0].x);
    }
    SUBCASE("samples stay in the unit cube") {
        const std::vector<double> uniform(4, 0.25);
        const auto data = generate_synthetic(100, 6, 4, 1.0, uniform, 3, 0.3);
        for (const auto& r : data)
            for (double v : r.x) {
                CHECK(v >= 0.0);
                CHECK(v <= 1.0);
            }
    }
    SUBCASE("large separation, small noise: nearest class centroid is exact") {
        const std::vector<double> uniform(5, 0.2);
        const auto data = generate_synthetic(200, 10, 5, 1.0, uniform, 4, 0.01);
        // oracle: nearest-centroid classifier on the training set
        std::vector<std::vector<double>> centroid(5, std::vector<double>(10, 0.0));
        std::vector<int> count(5, 0);
        for (const auto& r : data) {
            for (size_t f = 0; f < 10; ++f) centroid[static_cast<size_t>(r.label_index)][f] += r.x[f];
            ++count[static_cast<size_t>(r.label_index)];
        }
        for (int c = 0; c < 5; ++c)
            for (double& v : centroid[static_cast<size_t>(c)]) v /= count[static_cast<size_t>(c)];
        for (const auto& r : data) {
            int best = -1;
            double best_d = 1e300;
            for (int c = 0; c < 5; ++c) {
                double d2 = 0.0;
                for (size_t f = 0; f < 10; ++f)
                    d2 += (r.x[f] - centroid[static_cast<size_t>(c)][f]) *
                          (r.x[f] - centroid[static_cast<size_t>(c)][f]);
                if (d2 < best_d) {
                    best_d = d2;
                    best = c;
                }
            }
            CHECK(best == r.label_index);
        }
    }
    SUBCASE("bad imbalance vectors are config errors") {
        CHECK_THROWS_AS(generate_synthetic(10, 4, 3, 1.0, {0.5, 0.5}, 1), ConfigError);
        CHECK_THROWS_AS(generate_synthetic(10, 4, 3, 1.0, {0.5, 0.4, 0.2}, 1), ConfigError);
        CHECK_THROWS_AS(generate_synthetic(2, 4, 3, 1.0, {0.3, 0.3, 0.4}, 1), ConfigError);
    }
    SUBCASE("deterministic under seed") {
        const std::vector<double> w{0.6, 0.4};
        const auto a = generate_synthetic(20, 3, 2, 0.8, w, 11);
        const auto b = generate_synthetic(20, 3, 2, 0.8, w, 11);
        REQUIRE(a.size() == b.size());
        for (size_t i = 0; i < a.size(); ++i) CHECK(a[i].x == b[i].x);
    }
}

TEST_CASE("processed CSV and schema files round-trip") {
    TempDir dir;
    const std::vector<double> w{0.5, 0.3, 0.2};
    const auto data = generate_synthetic(30, 5, 3, 0.9, w, 12);
    write_processed_csv(dir.file("p.csv"), data);
    const auto back = load_processed_csv(dir.file("p.csv"));
    REQUIRE(back.size() == data.size());
    for (size_t i = 0; i < data.size(); ++i) {
        CHECK(back[i].x == data[i].x);  // %.17g round-trips doubles exactly
        CHECK(back[i].label_index == data[i].label_index);
    }

    FeatureSchema schema;
    schema.numeric.push_back({"a", -1.0, 2.0, 0.25});
    schema.categorical.push_back({"s", {"x", "y"}, "x"});
    schema.dropped.push_back("junk");
    save_schema(dir.file("schema.json"), schema);
    const FeatureSchema s2 = load_schema(dir.file("schema.json"));
    CHECK(s2.numeric.size() == 1);
    CHECK(s2.numeric[0].mean == 0.25);
    CHECK(s2.categorical[0].vocabulary == std::vector<std::string>{"x", "y"});
    CHECK(s2.dropped == std::vector<std::string>{"junk"});
    CHECK(s2.dimension() == 3);
}

}  // TEST_SUITE
