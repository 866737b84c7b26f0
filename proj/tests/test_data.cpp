#include <algorithm>
#include <cmath>
#include <doctest.h>
#include <numeric>
#include <set>

#include "pce/csv.hpp"
#include "pce/dataset.hpp"
#include "pce/rng.hpp"
#include "test_support.hpp"

using namespace pce;

namespace {

// Independent formula implementations, kept deliberately separate from the
// library's generators.
double oracle_case1(const double* x) {
    double y = 2.0 * x[0];
    y -= 3.0 * x[1];
    y += 0.5 * x[2];
    y += 1.5 * x[0] * x[1];
    y -= 2.0 * x[2] * x[3];
    y += x[4] * std::sin(x[3]);
    y += (x[0] > 0.0) ? 5.0 : -5.0;
    return y;
}

double oracle_case2(const double* x) {
    const double pi = std::acos(-1.0);
    double y = std::sin(pi * x[0] * x[1]);
    y += std::sin(pi * x[2] * x[3]);
    y += std::pow(x[4], 2.0);
    y -= 0.5 * x[0] * std::pow(x[2], 2.0);
    y += 0.7 * x[1] * x[3] * x[4];
    return y;
}

double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
    const double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

TEST_CASE("case1 structural values by hand") {
    const double origin[5] = {0, 0, 0, 0, 0};
    CHECK(case1_truth({origin, 5}) == doctest::Approx(-5.0).epsilon(1e-12));
    const double ones[5] = {1, 1, 1, 1, 1};
    CHECK(case1_truth({ones, 5}) == doctest::Approx(4.0 + std::sin(1.0)).epsilon(1e-12));
}

TEST_CASE("case2 structural values by hand") {
    const double origin[5] = {0, 0, 0, 0, 0};
    CHECK(case2_truth({origin, 5}) == doctest::Approx(0.0));
    const double pt[5] = {1, 0, 0, 0, 2};
    CHECK(case2_truth({pt, 5}) == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("noise-free generators match the independent formula oracle") {
    const Dataset d1 = generate_case1(1000, 99, true);
    for (std::size_t i = 0; i < d1.n; ++i)
        CHECK(d1.target[i] == doctest::Approx(oracle_case1(d1.row(i).data())).epsilon(1e-12));
    const Dataset d2 = generate_case2(1000, 123, true);
    for (std::size_t i = 0; i < d2.n; ++i)
        CHECK(d2.target[i] == doctest::Approx(oracle_case2(d2.row(i).data())).epsilon(1e-12));
}

TEST_CASE("generator sample moments sit near the reported values") {
    const Dataset d1 = generate_case1(1000, 7);
    CHECK(std::abs(mean_of(d1.target) - 1.733) < 8.1);
    CHECK(std::abs(sample_std(d1.target) - 84.931) < 10.0);
    const Dataset d2 = generate_case2(1000, 7);
    CHECK(std::abs(mean_of(d2.target) - 36.262) < 17.9);
    CHECK(std::abs(sample_std(d2.target) - 188.296) < 20.0);
}

TEST_CASE("generators reject non-positive n and are seed-deterministic") {
    CHECK_THROWS_AS(generate_case1(0, 1), InvalidArgument);
    CHECK_THROWS_AS(generate_case2(0, 1), InvalidArgument);
    CHECK_THROWS_AS(generate_survey_surrogate(0, 1), InvalidArgument);
    const Dataset a = generate_case1(50, 42);
    const Dataset b = generate_case1(50, 42);
    CHECK(a.features == b.features);
    CHECK(a.target == b.target);
    const Dataset c = generate_case1(50, 43);
    CHECK(a.features != c.features);
}

TEST_CASE("noise hook only zeroes the disturbance") {
    const Dataset noisy = generate_case1(200, 11, false);
    const Dataset clean = generate_case1(200, 11, true);
    CHECK(noisy.features == clean.features);
    for (std::size_t i = 0; i < clean.n; ++i)
        CHECK(clean.target[i] == doctest::Approx(case1_truth(clean.row(i))).epsilon(1e-12));
}

TEST_CASE("survey surrogate shape and planted-score behaviour") {
    const Dataset d = generate_survey_surrogate(500, 3);
    CHECK(d.n == 500);
    CHECK(d.r == 21);
    CHECK(d.feature_names[0] == "sex");
    CHECK(d.feature_names[2] == "T1");
    CHECK(d.feature_names[20] == "T19");
    for (std::size_t i = 0; i < d.n; ++i) {
        for (std::size_t k = 2; k < 21; ++k) {
            const double v = d.at(i, k);
            CHECK((v == 0.0 || v == 1.0));
        }
        CHECK(d.at(i, 1) >= 15.0);
        CHECK(d.at(i, 1) <= 18.0);
    }
    CHECK(std::abs(mean_of(d.target) - 50.0) < 2.0);
    const Dataset clean = generate_survey_surrogate(500, 3, true);
    for (std::size_t i = 0; i < clean.n; ++i)
        CHECK(clean.target[i] == doctest::Approx(survey_truth(clean.row(i))).epsilon(1e-12));
}

TEST_CASE("csv ingestion parses a small table") {
    test::TempDir tmp("ingest");
    test::write_text(tmp.file("t.csv"), "a,b,y\n1,0,2\n0,1,3\n1,1,4\n");
    const Dataset d = ingest_csv(tmp.file("t.csv"), "y");
    CHECK(d.n == 3);
    CHECK(d.r == 2);
    CHECK(d.feature_kinds[0] == FeatureKind::binary01);
    CHECK(d.feature_kinds[1] == FeatureKind::binary01);
    CHECK(d.target == std::vector<double>{2, 3, 4});
    CHECK(d.at(2, 0) == 1.0);
}

TEST_CASE("csv ingestion error contracts") {
    test::TempDir tmp("ingest_err");
    CHECK_THROWS_AS(ingest_csv(tmp.file("missing.csv"), "y"), IoError);

    test::write_text(tmp.file("bad.csv"), "a,y\n1,2\nabc,3\n");
    CHECK_THROWS_WITH_AS(ingest_csv(tmp.file("bad.csv"), "y"),
                         doctest::Contains("row 2"), ParseError);
    try {
        ingest_csv(tmp.file("bad.csv"), "y");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("'a'") != std::string::npos);
    }

    test::write_text(tmp.file("no_target.csv"), "a,b\n1,2\n");
    CHECK_THROWS_AS(ingest_csv(tmp.file("no_target.csv"), "y"), ParseError);

    test::write_text(tmp.file("empty.csv"), "a,y\n");
    CHECK_THROWS_AS(ingest_csv(tmp.file("empty.csv"), "y"), ParseError);

    test::write_text(tmp.file("t.csv"), "a,y\n0,2\n");
    CHECK_THROWS_AS(ingest_csv(tmp.file("t.csv"), "y", {{"missing", FeatureKind::binary01}}),
                    InvalidArgument);
}

TEST_CASE("export then ingest reproduces the dataset exactly") {
    test::TempDir tmp("roundtrip");
    const Dataset d = generate_case1(100, 7);
    export_csv(d, tmp.file("d.csv"));
    const Dataset back = ingest_csv(tmp.file("d.csv"), "y");
    REQUIRE(back.n == d.n);
    REQUIRE(back.r == d.r);
    for (std::size_t i = 0; i < d.n; ++i) {
        CHECK(std::abs(back.target[i] - d.target[i]) <= 1e-12);
        for (std::size_t j = 0; j < d.r; ++j)
            CHECK(std::abs(back.at(i, j) - d.at(i, j)) <= 1e-12);
    }
    CHECK(back.feature_names == d.feature_names);
}

TEST_CASE("repeated splits partition the rows") {
    const Dataset d = generate_case1(10, 5);
    const auto splits = split_indices(d.n, {1, 0.7, 9});
    REQUIRE(splits.size() == 1);
    CHECK(splits[0].train.size() == 7);
    CHECK(splits[0].test.size() == 3);
    std::set<std::size_t> all(splits[0].train.begin(), splits[0].train.end());
    all.insert(splits[0].test.begin(), splits[0].test.end());
    CHECK(all.size() == 10);
}

TEST_CASE("splits are deterministic under the seed") {
    const auto a = split_indices(100, {5, 0.7, 77});
    const auto b = split_indices(100, {5, 0.7, 77});
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].train == b[i].train);
        CHECK(a[i].test == b[i].test);
    }
    const auto c = split_indices(100, {5, 0.7, 78});
    CHECK(a[0].train != c[0].train);
}

TEST_CASE("twenty splits of a thousand rows give 700/300") {
    const auto splits = split_indices(1000, {20, 0.7, 1});
    CHECK(splits.size() == 20);
    for (const auto& s : splits) {
        CHECK(s.train.size() == 700);
        CHECK(s.test.size() == 300);
        std::vector<std::size_t> merged = s.train;
        merged.insert(merged.end(), s.test.begin(), s.test.end());
        std::sort(merged.begin(), merged.end());
        for (std::size_t i = 0; i < merged.size(); ++i) CHECK(merged[i] == i);
    }
}

TEST_CASE("splits reject degenerate sizes") {
    CHECK_THROWS_AS(split_indices(1, {1, 0.5, 0}), InvalidArgument);
    CHECK_THROWS_AS(split_indices(100, {0, 0.5, 0}), InvalidArgument);
    CHECK_THROWS_AS(split_indices(100, {1, 0.0, 0}), InvalidArgument);
    CHECK_THROWS_AS(split_indices(100, {1, 1.0, 0}), InvalidArgument);
    CHECK_THROWS_AS(split_indices(3, {1, 0.99, 0}), InvalidArgument);
}

TEST_CASE("repeated_splits materializes matching subsets") {
    const Dataset d = generate_case2(60, 8);
    const auto pairs = repeated_splits(d, {3, 0.7, 4});
    const auto idx = split_indices(d.n, {3, 0.7, 4});
    REQUIRE(pairs.size() == 3);
    for (std::size_t s = 0; s < 3; ++s) {
        REQUIRE(pairs[s].first.n == idx[s].train.size());
        for (std::size_t i = 0; i < idx[s].train.size(); ++i)
            CHECK(pairs[s].first.target[i] == d.target[idx[s].train[i]]);
    }
}

TEST_CASE("describe computes hand-checked statistics") {
    Dataset d;
    d.feature_names = {"c", "pair", "bin"};
    d.feature_kinds = {FeatureKind::continuous, FeatureKind::continuous, FeatureKind::binary01};
    d.n = 4;
    d.r = 3;
    d.features = {1, 0, 0,  //
                  1, 2, 1,  //
                  1, 0, 1,  //
                  1, 2, 0};
    d.target = {1, 2, 3, 4};
    const DescriptiveStats stats = describe(d);
    REQUIRE(stats.columns.size() == 4);
    CHECK(stats.columns[0].mean == doctest::Approx(1.0));
    CHECK(stats.columns[0].stddev == doctest::Approx(0.0));
    CHECK(stats.columns[0].min == 1.0);
    CHECK(stats.columns[0].max == 1.0);
    CHECK(stats.columns[1].mean == doctest::Approx(1.0));
    CHECK(stats.columns[1].stddev == doctest::Approx(std::sqrt(4.0 / 3.0)));
    CHECK(stats.columns[2].mean == doctest::Approx(0.5));
    CHECK(stats.columns[3].name == "y");

    Dataset two;
    two.feature_names = {"a"};
    two.feature_kinds = {FeatureKind::continuous};
    two.n = 2;
    two.r = 1;
    two.features = {0, 2};
    two.target = {0, 0};
    const auto s2 = describe(two);
    CHECK(s2.columns[0].mean == doctest::Approx(1.0));
    CHECK(s2.columns[0].stddev == doctest::Approx(std::sqrt(2.0)));

    two.n = 1;
    two.features = {0};
    two.target = {0};
    CHECK_THROWS_AS(describe(two), InvalidArgument);
}

TEST_CASE("describe csv emission") {
    test::TempDir tmp("describe");
    const Dataset d = generate_case1(50, 3);
    write_describe_csv(describe(d), tmp.file("stats.csv"));
    const std::string text = test::read_text(tmp.file("stats.csv"));
    CHECK(text.rfind("name,mean,std,min,max\n", 0) == 0);
    CHECK(text.find("\nx5,") != std::string::npos);
    CHECK(text.find("\ny,") != std::string::npos);
}

TEST_CASE("dataset invariants are enforced") {
    Dataset d;
    d.feature_names = {"a", "a"};
    d.feature_kinds = {FeatureKind::continuous, FeatureKind::continuous};
    d.n = 1;
    d.r = 2;
    d.features = {1, 2};
    d.target = {0};
    CHECK_THROWS_AS(d.validate(), InvalidArgument);  // duplicate names
    d.feature_names = {"a", "b"};
    CHECK_NOTHROW(d.validate());
    d.feature_kinds[1] = FeatureKind::binary01;
    CHECK_THROWS_AS(d.validate(), InvalidArgument);  // 2 is not in [0,1]
}

TEST_CASE("format_double round-trips exactly") {
    Rng rng(5);
    for (int i = 0; i < 200; ++i) {
        const double v = (rng.uniform01() - 0.5) * std::pow(10.0, rng.uniform(-8, 8));
        CHECK(std::stod(format_double(v)) == v);
    }
}
