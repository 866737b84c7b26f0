#include <algorithm>
#include <cmath>
#include <doctest.h>
#include <numeric>

#include "pce/dataset.hpp"
#include "pce/metrics.hpp"
#include "pce/rng.hpp"
#include "test_support.hpp"

using namespace pce;

namespace {

CESet make_set(std::vector<std::vector<double>> points, std::vector<std::vector<double>> preds,
               std::vector<std::string> labels, TargetMode mode = TargetMode::maximize,
               double target = 0.0) {
    CESet ces;
    const std::size_t r = points[0].size();
    ces.problem.base.assign(r, 0.0);
    ces.problem.target_mode = mode;
    ces.problem.target_value = target;
    ces.problem.distance_bound = 1e9;
    for (std::size_t j = 0; j < r; ++j) {
        ces.problem.feature_names.push_back("f" + std::to_string(j + 1));
        ces.problem.feature_kinds.push_back(FeatureKind::continuous);
        ces.problem.lower.push_back(-1e9);
        ces.problem.upper.push_back(1e9);
        ces.problem.rules.push_back(DirectionRule::free);
    }
    ces.method = "method3";
    ces.model_labels = std::move(labels);
    ces.objective_models.resize(ces.model_labels.size());
    std::iota(ces.objective_models.begin(), ces.objective_models.end(), std::size_t{0});
    ces.requested = points.size();
    ces.explanations = std::move(points);
    ces.predictions = std::move(preds);
    return ces;
}

Dataset rows_dataset(std::vector<std::vector<double>> rows) {
    Dataset d;
    d.n = rows.size();
    d.r = rows[0].size();
    for (std::size_t j = 0; j < d.r; ++j) {
        d.feature_names.push_back("f" + std::to_string(j + 1));
        d.feature_kinds.push_back(FeatureKind::continuous);
    }
    for (const auto& row : rows) d.features.insert(d.features.end(), row.begin(), row.end());
    d.target.assign(d.n, 0.0);
    return d;
}

}  // namespace

TEST_CASE("validity under both target modes") {
    const CESet maxi = make_set({{0.0}, {0.0}}, {{1.0}, {3.0}}, {"m"});
    CHECK(validity(maxi, 0) == doctest::Approx(2.0));

    const CESet exact =
        make_set({{0.0}, {0.0}}, {{5.0}, {5.0}}, {"m"}, TargetMode::match, 5.0);
    CHECK(validity(exact, 0) == doctest::Approx(0.0));

    const CESet off = make_set({{0.0}, {0.0}}, {{1.0}, {-1.0}}, {"m"}, TargetMode::match, 0.0);
    CHECK(validity(off, 0) == doctest::Approx(1.0));

    CHECK_THROWS_AS(validity(maxi, 5), InvalidArgument);
}

TEST_CASE("dissimilarity hand cases") {
    CESet same = make_set({{0.0, 0.0}, {0.0, 0.0}}, {{0.0}, {0.0}}, {"m"});
    CHECK(dissimilarity(same) == doctest::Approx(0.0));

    CESet unit = make_set({{1.0, 0.0, 0.0}}, {{0.0}}, {"m"});
    CHECK(dissimilarity(unit) == doctest::Approx(1.0));

    CESet pair = make_set({{2.0, 0.0}, {0.0, 4.0}}, {{0.0}, {0.0}}, {"m"});
    CHECK(dissimilarity(pair) == doctest::Approx(10.0));  // (4 + 16) / 2
}

TEST_CASE("plausibility equals the brute-force nearest-neighbor scan") {
    const CESet hit = make_set({{1.0, 2.0}}, {{0.0}}, {"m"});
    const Dataset train1 = rows_dataset({{1.0, 2.0}, {9.0, 9.0}});
    CHECK(plausibility(hit, train1) == doctest::Approx(0.0));

    const CESet single = make_set({{3.0, 0.0}}, {{0.0}}, {"m"});
    const Dataset train2 = rows_dataset({{0.0, 0.0}});
    CHECK(plausibility(single, train2) == doctest::Approx(9.0));

    Rng rng(41);
    std::vector<std::vector<double>> points, rows;
    for (int i = 0; i < 100; ++i) points.push_back({rng.uniform(-5, 5), rng.uniform(-5, 5),
                                                    rng.uniform(-5, 5)});
    for (int i = 0; i < 200; ++i) rows.push_back({rng.uniform(-5, 5), rng.uniform(-5, 5),
                                                  rng.uniform(-5, 5)});
    std::vector<std::vector<double>> preds(points.size(), {0.0});
    const CESet many = make_set(points, preds, {"m"});
    const Dataset train3 = rows_dataset(rows);

    double oracle = 0.0;
    for (const auto& x : many.explanations) {
        double best = 1e300;
        for (const auto& row : rows) {
            double sq = 0.0;
            for (std::size_t j = 0; j < 3; ++j) sq += (x[j] - row[j]) * (x[j] - row[j]);
            best = std::min(best, sq);
        }
        oracle += best;
    }
    oracle /= static_cast<double>(many.size());
    CHECK(plausibility(many, train3) == doctest::Approx(oracle).epsilon(1e-12));

    Dataset empty = train3;
    empty.n = 0;
    empty.features.clear();
    empty.target.clear();
    CHECK_THROWS_AS(plausibility(many, empty), InvalidArgument);
}

TEST_CASE("true improvement ratio counts strict improvements") {
    TruthFn truth = [](std::span<const double> x) { return x[0]; };
    const CESet all = make_set({{1.0}, {2.0}}, {{0.0}, {0.0}}, {"m"});
    CHECK(true_improvement_ratio(all, truth) == doctest::Approx(1.0));
    const CESet none = make_set({{-1.0}, {0.0}}, {{0.0}, {0.0}}, {"m"});
    CHECK(true_improvement_ratio(none, truth) == doctest::Approx(0.0));

    std::vector<std::vector<double>> pts;
    std::vector<std::vector<double>> preds;
    for (int i = 0; i < 20; ++i) {
        pts.push_back({i < 10 ? 1.0 : -1.0});
        preds.push_back({0.0});
    }
    const CESet half = make_set(pts, preds, {"m"});
    CHECK(true_improvement_ratio(half, truth) == doctest::Approx(0.5));

    CHECK_THROWS_AS(true_improvement_ratio(all, TruthFn{}), UnsupportedError);
}

TEST_CASE("tir is invariant to constant shifts of the truth") {
    Rng rng(42);
    std::vector<std::vector<double>> pts;
    std::vector<std::vector<double>> preds;
    for (int i = 0; i < 30; ++i) {
        pts.push_back({rng.uniform(-2, 2), rng.uniform(-2, 2)});
        preds.push_back({0.0});
    }
    const CESet ces = make_set(pts, preds, {"m"});
    TruthFn truth = [](std::span<const double> x) { return x[0] * x[0] - x[1]; };
    TruthFn shifted = [](std::span<const double> x) { return x[0] * x[0] - x[1] + 1234.5; };
    CHECK(true_improvement_ratio(ces, truth) == true_improvement_ratio(ces, shifted));
}

TEST_CASE("metrics are invariant to permuting the explanations") {
    Rng rng(43);
    std::vector<std::vector<double>> pts;
    std::vector<std::vector<double>> preds;
    for (int i = 0; i < 12; ++i) {
        pts.push_back({rng.uniform(-3, 3), rng.uniform(-3, 3)});
        preds.push_back({rng.uniform(0, 10), rng.uniform(0, 10)});
    }
    const Dataset train = rows_dataset({{0.0, 0.0}, {1.0, 1.0}, {-2.0, 0.5}});
    const CESet a = make_set(pts, preds, {"m1", "m2"});
    std::vector<std::size_t> perm(pts.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    rng.shuffle(perm);
    std::vector<std::vector<double>> pts2, preds2;
    for (std::size_t i : perm) {
        pts2.push_back(pts[i]);
        preds2.push_back(preds[i]);
    }
    const CESet b = make_set(pts2, preds2, {"m1", "m2"});
    CHECK(validity(a, 0) == doctest::Approx(validity(b, 0)).epsilon(1e-12));
    CHECK(dissimilarity(a) == doctest::Approx(dissimilarity(b)).epsilon(1e-12));
    CHECK(plausibility(a, train) == doctest::Approx(plausibility(b, train)).epsilon(1e-12));
}

TEST_CASE("plausibility is bounded by dissimilarity when the base is a training row") {
    Rng rng(44);
    std::vector<std::vector<double>> pts;
    std::vector<std::vector<double>> preds;
    for (int i = 0; i < 10; ++i) {
        pts.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1)});
        preds.push_back({0.0});
    }
    CESet ces = make_set(pts, preds, {"m"});
    Dataset train = rows_dataset({{0.0, 0.0}, {5.0, 5.0}});  // base (0,0) is a training row
    CHECK(plausibility(ces, train) <= dissimilarity(ces) + 1e-12);
}

TEST_CASE("compute_metrics assembles the per-case report") {
    const Dataset train = rows_dataset({{0.0, 0.0}, {1.0, 0.0}});
    const CESet ces =
        make_set({{1.0, 0.0}, {0.0, 1.0}}, {{2.0, 10.0}, {4.0, 20.0}}, {"a", "b"});
    TruthFn truth = [](std::span<const double> x) { return x[0] + x[1]; };
    const MetricsReport rep = compute_metrics(ces, train, &truth);
    CHECK(rep.val == std::vector<double>{3.0, 15.0});
    CHECK(rep.ave_val == doctest::Approx(9.0));
    CHECK(rep.dissim == doctest::Approx(1.0));
    CHECK(rep.tir.has_value());
    CHECK(*rep.tir == doctest::Approx(1.0));
    CHECK(rep.s_effective == 2);
    REQUIRE(rep.ratio_val_dissim.has_value());
    CHECK(*rep.ratio_val_dissim == doctest::Approx(9.0));

    const MetricsReport no_tir = compute_metrics(ces, train, nullptr);
    CHECK_FALSE(no_tir.tir.has_value());
}

TEST_CASE("ratio denominators below the floor are flagged absent") {
    const Dataset train = rows_dataset({{0.0}});
    const CESet ces = make_set({{0.0}}, {{5.0}}, {"m"});  // dissim = plaus = 0
    const MetricsReport rep = compute_metrics(ces, train, nullptr);
    CHECK_FALSE(rep.ratio_val_dissim.has_value());
    CHECK_FALSE(rep.ratio_val_plaus.has_value());
}

TEST_CASE("aggregate means, method3 averaging rule, and top-3 marks") {
    auto rep = [](std::vector<std::string> labels, std::vector<double> vals, double dissim,
                  double plaus, std::optional<double> tir) {
        MetricsReport r;
        r.val_labels = std::move(labels);
        r.val = std::move(vals);
        r.ave_val = std::accumulate(r.val.begin(), r.val.end(), 0.0) /
                    static_cast<double>(r.val.size());
        r.dissim = dissim;
        r.plaus = plaus;
        r.tir = tir;
        r.s_effective = 20;
        return r;
    };

    std::vector<TaggedReport> reports;
    reports.push_back({"method3", "method3_m3", rep({"a", "b", "c"}, {10, 20, 30}, 1.0, 2.0, 0.9)});
    reports.push_back({"method3", "method3_m3", rep({"a", "b", "c"}, {20, 30, 40}, 3.0, 4.0, 0.7)});
    reports.push_back({"method1", "method1_a", rep({"a"}, {50}, 9.0, 8.0, 0.2)});
    reports.push_back({"method2", "method2", rep({"stack"}, {60}, 7.0, 9.0, 0.4)});

    const AggregateReport agg = aggregate(reports);
    REQUIRE(agg.rows.size() == 3);
    const AggregateRow& m3 = agg.rows[0];
    CHECK(m3.label == "method3_m3");
    CHECK(m3.n_cases == 2);
    CHECK(m3.val == std::vector<double>{15, 25, 35});
    CHECK(m3.ave_val == doctest::Approx(25.0));  // mean of per-model vals
    CHECK(m3.dissim == doctest::Approx(2.0));
    REQUIRE(m3.tir.has_value());
    CHECK(*m3.tir == doctest::Approx(0.8));
    // ratio of aggregated means, not mean of ratios
    CHECK(*m3.ratio_val_dissim == doctest::Approx(25.0 / 2.0));

    CHECK(m3.top3_dissim);
    CHECK(m3.top3_tir);
    CHECK(agg.rows[1].top3_dissim);
    CHECK(agg.rows[2].top3_dissim);
    CHECK(agg.model_columns ==
          std::vector<std::string>{"a", "b", "c", "stack"});

    CHECK_THROWS_AS(aggregate(std::vector<TaggedReport>{}), InvalidArgument);
}

TEST_CASE("aggregate single report is the identity") {
    MetricsReport r;
    r.val_labels = {"m"};
    r.val = {4.0};
    r.ave_val = 4.0;
    r.dissim = 2.0;
    r.plaus = 1.0;
    r.s_effective = 5;
    std::vector<TaggedReport> reports = {{"method1", "method1_m", r}};
    const AggregateReport agg = aggregate(reports);
    CHECK(agg.rows[0].ave_val == 4.0);
    CHECK(agg.rows[0].dissim == 2.0);
    CHECK(agg.rows[0].plaus == 1.0);
    CHECK_FALSE(agg.rows[0].tir.has_value());
}

TEST_CASE("aggregate means match a streaming-sum oracle") {
    Rng rng(45);
    std::vector<TaggedReport> reports;
    double sum_dissim = 0.0;
    for (int i = 0; i < 50; ++i) {
        MetricsReport r;
        r.val_labels = {"m"};
        r.val = {rng.uniform(0, 100)};
        r.ave_val = r.val[0];
        r.dissim = rng.uniform(0, 10);
        r.plaus = rng.uniform(0, 10);
        r.s_effective = 20;
        sum_dissim += r.dissim;
        reports.push_back({"method1", "cell", r});
    }
    const AggregateReport agg = aggregate(reports);
    CHECK(agg.rows[0].dissim == doctest::Approx(sum_dissim / 50.0).epsilon(1e-12));
}

TEST_CASE("aggregate table emission") {
    test::TempDir tmp("agg");
    MetricsReport r;
    r.val_labels = {"linear", "gbt"};
    r.val = {1.0, 2.0};
    r.ave_val = 1.5;
    r.dissim = 0.5;
    r.plaus = 0.25;
    r.tir = 0.75;
    std::vector<TaggedReport> reports = {{"method3", "method3_m2", r}};
    const AggregateReport agg = aggregate(reports);
    write_aggregate_csv(agg, tmp.file("agg.csv"));
    const std::string csv = test::read_text(tmp.file("agg.csv"));
    CHECK(csv.find("method,label,val_linear,val_gbt,ave_val,dissim,plaus,tir") == 0);
    CHECK(csv.find("method3,method3_m2,1,2,1.5,0.5,0.25,0.75") != std::string::npos);
    write_aggregate_markdown(agg, tmp.file("agg.md"));
    const std::string md = test::read_text(tmp.file("agg.md"));
    CHECK(md.find("| method |") == 0);
    CHECK(md.find("**") != std::string::npos);  // top-3 bolding present
}
