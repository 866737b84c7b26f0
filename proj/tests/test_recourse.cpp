#include <algorithm>
#include <cmath>
#include <doctest.h>
#include <numeric>

#include "pce/csv.hpp"
#include "pce/recourse.hpp"
#include "pce/rng.hpp"
#include "test_support.hpp"

using namespace pce;

namespace {

std::shared_ptr<LinearModel> linear_predictor(std::vector<double> w, double intercept = 0.0) {
    auto m = std::make_shared<LinearModel>();
    m->coefficients = std::move(w);
    m->intercept = intercept;
    return m;
}

CEProblem wide_problem(std::size_t r, double C, double lambda) {
    CEProblem p;
    p.base.assign(r, 0.0);
    p.distance_bound = C;
    p.lambda = lambda;
    for (std::size_t j = 0; j < r; ++j) {
        p.feature_names.push_back("f" + std::to_string(j + 1));
        p.feature_kinds.push_back(FeatureKind::continuous);
        p.lower.push_back(-10.0);
        p.upper.push_back(10.0);
        p.rules.push_back(DirectionRule::free);
    }
    return p;
}

double norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

CESet manual_set(std::vector<std::vector<double>> points) {
    CESet ces;
    const std::size_t r = points[0].size();
    ces.problem.base.assign(r, 0.0);
    ces.problem.distance_bound = 1e9;
    for (std::size_t j = 0; j < r; ++j) {
        ces.problem.feature_names.push_back("f" + std::to_string(j + 1));
        ces.problem.feature_kinds.push_back(FeatureKind::continuous);
        ces.problem.lower.push_back(-1e9);
        ces.problem.upper.push_back(1e9);
        ces.problem.rules.push_back(DirectionRule::free);
    }
    ces.method = "method3";
    ces.model_labels = {"m"};
    ces.objective_models = {0};
    ces.requested = points.size();
    ces.explanations = std::move(points);
    ces.predictions.assign(ces.explanations.size(), {0.0});
    return ces;
}

}  // namespace

TEST_CASE("distance kinds") {
    const std::vector<double> a = {0, 0}, b = {3, 4};
    CHECK(distance(a, a, DistanceKind::euclidean) == 0.0);
    CHECK(distance(a, b, DistanceKind::euclidean) == doctest::Approx(5.0));
    CHECK(distance(a, b, DistanceKind::squared_euclidean) == doctest::Approx(25.0));
    CHECK_THROWS_AS(distance(a, std::vector<double>{1.0}, DistanceKind::euclidean),
                    InvalidArgument);
}

TEST_CASE("build_problem derives bounds and monotone rules") {
    const Dataset d = generate_survey_surrogate(200, 1);
    std::vector<double> base(d.row(0).begin(), d.row(0).end());
    base[2 + 4] = 1.0;  // force T5 = 1
    RuleSpec rules;
    rules.binary_policy = BinaryRulePolicy::monotone_from_base;
    rules.fixed_features = {"sex", "age"};
    const CEProblem p = build_problem(base, d, 5.0, 2.0, rules);

    const std::size_t t5 = 6;  // sex, age, T1..T5
    CHECK(p.rules[t5] == DirectionRule::nonincreasing);
    CHECK(p.lower[t5] == 0.0);
    CHECK(p.upper[t5] == 1.0);
    CHECK(p.rules[0] == DirectionRule::fixed);
    CHECK(p.rules[1] == DirectionRule::fixed);
    for (std::size_t k = 0; k < 19; ++k) {
        const std::size_t j = 2 + k;
        CHECK((p.rules[j] == DirectionRule::nonincreasing ||
               p.rules[j] == DirectionRule::nondecreasing));
        if (base[j] > 0.5) CHECK(p.rules[j] == DirectionRule::nonincreasing);
        if (base[j] < 0.5) CHECK(p.rules[j] == DirectionRule::nondecreasing);
    }

    std::vector<double> lo, hi;
    p.effective_intervals(lo, hi);
    CHECK(lo[0] == base[0]);
    CHECK(hi[0] == base[0]);
    CHECK(lo[t5] == 0.0);
    CHECK(hi[t5] == 1.0);  // value 1 may only decrease inside [0,1]
}

TEST_CASE("build_problem uses observed feature ranges and flags out-of-range bases") {
    const Dataset d = generate_case1(300, 2);
    std::vector<double> base(5, 0.0);
    CEProblem p = build_problem(base, d, 3.0, 2.0, RuleSpec{});
    for (std::size_t j = 0; j < 5; ++j) {
        CHECK(p.lower[j] >= -10.0);
        CHECK(p.upper[j] <= 10.0);
        CHECK(p.lower[j] < -9.0);
        CHECK(p.upper[j] > 9.0);
    }
    CHECK(p.warnings.empty());

    base[0] = 50.0;
    p = build_problem(base, d, 3.0, 2.0, RuleSpec{});
    CHECK(p.upper[0] == 50.0);
    REQUIRE(!p.warnings.empty());
    CHECK(p.warnings[0].find("x1") != std::string::npos);

    CHECK_THROWS_AS(build_problem(std::vector<double>(3, 0.0), d, 3.0, 2.0, RuleSpec{}),
                    InvalidArgument);
    RuleSpec bad;
    bad.fixed_features = {"nope"};
    CHECK_THROWS_AS(build_problem(std::vector<double>(5, 0.0), d, 3.0, 2.0, bad),
                    InvalidArgument);
}

TEST_CASE("method1 finds the analytic optimum of a linear objective on the ball") {
    const std::vector<double> w = {3.0, -1.0, 2.0};
    auto model = linear_predictor(w);
    CEProblem p = wide_problem(3, 2.0, 0.0);
    LabeledModel lm{"linear", model};
    const CESet ces = method1_generate(p, lm, 8, 42);
    REQUIRE(ces.size() == 8);
    const double wn = norm(w);
    for (std::size_t s = 0; s < ces.size(); ++s) {
        for (std::size_t j = 0; j < 3; ++j) {
            const double target = 2.0 * w[j] / wn;
            CHECK(std::abs(ces.explanations[s][j] - target) < 1e-3);
        }
    }
    validate_ceset(ces, 1e-6);
}

TEST_CASE("huge lambda pins method1 outputs to the base point") {
    auto model = linear_predictor({1.0, 1.0});
    CEProblem p = wide_problem(2, 3.0, 1e6);
    const CESet ces = method1_generate(p, {"linear", model}, 5, 1);
    for (const auto& x : ces.explanations)
        CHECK(distance(x, p.base, DistanceKind::euclidean) < 1e-3);
}

TEST_CASE("method1 respects the ball on every output") {
    auto model = linear_predictor({5.0, 1.0, 0.0, -2.0});
    CEProblem p = wide_problem(4, 1.5, 2.0);
    const CESet ces = method1_generate(p, {"linear", model}, 12, 3);
    for (const auto& x : ces.explanations)
        CHECK(distance(x, p.base, DistanceKind::euclidean) <= 1.5 + 1e-6);
    CHECK(ces.model_labels == std::vector<std::string>{"linear"});
    CHECK(ces.objective_models == std::vector<std::size_t>{0});
}

TEST_CASE("method2 with a unit-weight stack reduces to method1") {
    auto base_model = linear_predictor({2.0, -1.0});
    auto stack = std::make_shared<StackingModel>();
    stack->bases = {base_model};
    stack->weights = {1.0};
    stack->intercept = 0.0;

    CEProblem p = wide_problem(2, 2.5, 2.0);
    const CESet m1 = method1_generate(p, {"linear", base_model}, 6, 77);
    const CESet m2 = method2_generate(p, {"stack", std::shared_ptr<const Predictor>(stack)}, 6, 77);
    REQUIRE(m1.size() == m2.size());
    for (std::size_t s = 0; s < m1.size(); ++s) CHECK(m1.explanations[s] == m2.explanations[s]);
    CHECK(m2.method == "method2");
    // default report set covers the stack and its base models
    CHECK(m2.model_labels.size() == 2);
    CHECK(m2.model_labels[0] == "stack");
}

TEST_CASE("method2 rejects non-stacking predictors") {
    auto model = linear_predictor({1.0});
    CEProblem p = wide_problem(1, 1.0, 0.0);
    CHECK_THROWS_AS(method2_generate(p, {"linear", model}, 3, 0), InvalidArgument);
}

TEST_CASE("method3 front spans the ball diameter for opposed linear models") {
    const std::vector<double> w = {1.0, 0.0, 0.0};
    std::vector<LabeledModel> models = {{"plus", linear_predictor(w)},
                                        {"minus", linear_predictor({-1.0, 0.0, 0.0})}};
    CEProblem p = wide_problem(3, 2.0, 0.0);
    for (std::size_t j = 0; j < 3; ++j) {
        p.lower[j] = -2.5;
        p.upper[j] = 2.5;
    }
    Method3Options opt;
    opt.moo.population = 100;
    opt.moo.generations = 300;
    opt.moo.seed = 5;
    const CESet ces = method3_generate(p, models, 20, opt);
    REQUIRE(ces.size() > 2);
    validate_ceset(ces, 1e-9);

    double best_plus = 1e9, best_minus = 1e9;
    for (const auto& x : ces.explanations) {
        const std::vector<double> plus = {2.0, 0.0, 0.0};
        const std::vector<double> minus = {-2.0, 0.0, 0.0};
        best_plus = std::min(best_plus, distance(x, plus, DistanceKind::euclidean));
        best_minus = std::min(best_minus, distance(x, minus, DistanceKind::euclidean));
    }
    CHECK(best_plus <= 0.05 * 2.0);
    CHECK(best_minus <= 0.05 * 2.0);
}

TEST_CASE("method3 outputs are mutually non-dominated in prediction space") {
    const Dataset d = generate_case1(200, 6);
    std::vector<LabeledModel> models = {
        {"linear", std::shared_ptr<const Predictor>(fit_linear(d).release())},
        {"gbt", std::shared_ptr<const Predictor>(fit_gbt(d, {.n_rounds = 20}, 1).release())}};
    std::vector<double> base(d.row(3).begin(), d.row(3).end());
    CEProblem p = build_problem(base, d, 3.0, 2.0, RuleSpec{});
    Method3Options opt;
    opt.moo.population = 60;
    opt.moo.generations = 60;
    opt.moo.seed = 6;
    const CESet ces = method3_generate(p, models, 20, opt);
    validate_ceset(ces, 1e-9);
    for (std::size_t i = 0; i < ces.size(); ++i) {
        for (std::size_t j = 0; j < ces.size(); ++j) {
            if (i == j) continue;
            bool weakly_better_everywhere = true, strictly_somewhere = false;
            for (std::size_t m = 0; m < ces.model_labels.size(); ++m) {
                if (ces.predictions[j][m] < ces.predictions[i][m])
                    weakly_better_everywhere = false;
                if (ces.predictions[j][m] > ces.predictions[i][m]) strictly_somewhere = true;
            }
            CHECK_FALSE((weakly_better_everywhere && strictly_somewhere));
        }
    }
}

TEST_CASE("method3 with duplicated models returns equal-prediction outputs") {
    auto model = linear_predictor({1.0, 2.0});
    std::vector<LabeledModel> models = {{"a", model}, {"b", model}};
    CEProblem p = wide_problem(2, 1.0, 0.0);
    Method3Options opt;
    opt.moo.population = 40;
    opt.moo.generations = 40;
    opt.moo.seed = 7;
    const CESet ces = method3_generate(p, models, 10, opt);
    for (const auto& preds : ces.predictions) CHECK(preds[0] == preds[1]);
}

TEST_CASE("method3 honors fixed coordinates") {
    const Dataset d = generate_survey_surrogate(150, 8);
    std::vector<double> base(d.row(0).begin(), d.row(0).end());
    RuleSpec rules;
    rules.binary_policy = BinaryRulePolicy::monotone_from_base;
    rules.fixed_features = {"sex", "age"};
    CEProblem p = build_problem(base, d, 5.0, 2.0, rules);
    std::vector<LabeledModel> models = {
        {"linear", std::shared_ptr<const Predictor>(fit_linear(d).release())},
        {"gbt", std::shared_ptr<const Predictor>(fit_gbt(d, {.n_rounds = 15}, 2).release())}};
    Method3Options opt;
    opt.moo.population = 40;
    opt.moo.generations = 30;
    opt.moo.seed = 8;
    const CESet ces = method3_generate(p, models, 10, opt);
    validate_ceset(ces, 1e-9);
    for (const auto& x : ces.explanations) {
        CHECK(x[0] == base[0]);
        CHECK(x[1] == base[1]);
        for (std::size_t k = 0; k < 19; ++k) {
            const std::size_t j = 2 + k;
            if (base[j] > 0.5) CHECK(x[j] <= base[j] + 1e-12);
            if (base[j] < 0.5) CHECK(x[j] >= base[j] - 1e-12);
        }
    }
}

TEST_CASE("method3 reports infeasibility with the best violation") {
    auto model = linear_predictor({1.0});
    CEProblem p = wide_problem(1, 1.0, 0.0);
    EqualityConstraint eq;
    eq.fn = [](std::span<const double>) { return 1.0; };  // unsatisfiable
    p.equalities.push_back(eq);
    Method3Options opt;
    opt.moo.population = 8;
    opt.moo.generations = 3;
    std::vector<LabeledModel> models = {{"m", model}, {"m2", model}};
    CHECK_THROWS_AS(method3_generate(p, models, 4, opt), InfeasibleError);
}

TEST_CASE("improvement floors force strict Pareto improvements over the base") {
    const Dataset d = generate_case2(200, 9);
    std::vector<LabeledModel> models = {
        {"linear", std::shared_ptr<const Predictor>(fit_linear(d).release())},
        {"gbt", std::shared_ptr<const Predictor>(fit_gbt(d, {.n_rounds = 20}, 3).release())}};
    std::vector<double> base(d.row(11).begin(), d.row(11).end());
    CEProblem p = build_problem(base, d, 3.0, 2.0, RuleSpec{});
    Method3Options opt;
    opt.moo.population = 60;
    opt.moo.generations = 40;
    opt.moo.seed = 9;
    opt.enforce_improvement = true;
    const CESet ces = method3_generate(p, models, 15, opt);
    for (std::size_t s = 0; s < ces.size(); ++s) {
        bool strict = false;
        for (std::size_t m = 0; m < models.size(); ++m) {
            const double at_base = models[m].model->predict(base);
            CHECK(ces.predictions[s][m] >= at_base - 1e-9);
            strict = strict || ces.predictions[s][m] > at_base;
        }
        CHECK(strict);
    }
}

TEST_CASE("method3 single-model run keeps pace with method1") {
    const Dataset d = generate_case1(250, 10);
    std::shared_ptr<const Predictor> gbt(fit_gbt(d, {.n_rounds = 30}, 4).release());
    std::vector<double> base(d.row(5).begin(), d.row(5).end());
    CEProblem p = build_problem(base, d, 3.0, 2.0, RuleSpec{});

    const CESet m1 = method1_generate(p, {"gbt", gbt}, 11, 10);
    std::vector<double> preds;
    for (const auto& row : m1.predictions) preds.push_back(row[0]);
    std::sort(preds.begin(), preds.end());
    const double median = preds[preds.size() / 2];
    const double range = preds.back() - preds.front();

    Method3Options opt;
    opt.moo.population = 60;
    opt.moo.generations = 60;
    opt.moo.seed = 10;
    std::vector<LabeledModel> one = {{"gbt", gbt}};
    const CESet m3 = method3_generate(p, one, 11, opt);
    double best = -1e18;
    for (const auto& row : m3.predictions) best = std::max(best, row[0]);
    CHECK(best >= median - 0.05 * std::max(range, 1e-9));
}

TEST_CASE("medoid and centroid representatives") {
    const CESet line = manual_set({{0.0}, {1.0}, {10.0}});
    CHECK(select_medoid(line) == std::vector<double>{1.0});
    CHECK(select_closest_to_centroid(line) == std::vector<double>{1.0});

    const CESet lone = manual_set({{4.0, 2.0}});
    CHECK(select_medoid(lone) == std::vector<double>{4.0, 2.0});
    CHECK(select_closest_to_centroid(lone) == std::vector<double>{4.0, 2.0});

    const CESet sym = manual_set({{-3.0}, {3.0}});
    CHECK(select_closest_to_centroid(sym) == std::vector<double>{-3.0});  // tie -> lowest index

    CESet empty = manual_set({{0.0}});
    empty.explanations.clear();
    empty.predictions.clear();
    CHECK_THROWS_AS(select_medoid(empty), InvalidArgument);
    CHECK_THROWS_AS(select_closest_to_centroid(empty), InvalidArgument);

    const CESet member = manual_set({{0.5, 0.5}, {2.0, -1.0}, {0.4, 0.6}});
    const auto rep = select_medoid(member);
    CHECK(std::count(member.explanations.begin(), member.explanations.end(), rep) == 1);
}

TEST_CASE("ce generation is deterministic given seeds and config") {
    const Dataset d = generate_case1(150, 11);
    std::vector<LabeledModel> models = {
        {"linear", std::shared_ptr<const Predictor>(fit_linear(d).release())},
        {"gbt", std::shared_ptr<const Predictor>(fit_gbt(d, {.n_rounds = 10}, 5).release())}};
    std::vector<double> base(d.row(7).begin(), d.row(7).end());
    CEProblem p = build_problem(base, d, 3.0, 2.0, RuleSpec{});

    const CESet a1 = method1_generate(p, models[0], 6, 123, models);
    const CESet a2 = method1_generate(p, models[0], 6, 123, models);
    CHECK(a1.explanations == a2.explanations);
    CHECK(a1.predictions == a2.predictions);

    Method3Options opt;
    opt.moo.population = 40;
    opt.moo.generations = 25;
    opt.moo.seed = 99;
    const CESet b1 = method3_generate(p, models, 8, opt);
    const CESet b2 = method3_generate(p, models, 8, opt);
    CHECK(b1.explanations == b2.explanations);
    CHECK(b1.predictions == b2.predictions);
}

TEST_CASE("ceset serialization round trip and csv emission") {
    test::TempDir tmp("ceset");
    const Dataset d = generate_survey_surrogate(120, 12);
    std::vector<double> base(d.row(4).begin(), d.row(4).end());
    RuleSpec rules;
    rules.binary_policy = BinaryRulePolicy::monotone_from_base;
    rules.fixed_features = {"sex", "age"};
    CEProblem p = build_problem(base, d, 5.0, 2.0, rules);
    std::vector<LabeledModel> models = {
        {"linear", std::shared_ptr<const Predictor>(fit_linear(d).release())}};
    const CESet ces = method1_generate(p, models[0], 4, 5, models);

    save_ceset(ces, tmp.file("ces.json"));
    const CESet back = load_ceset(tmp.file("ces.json"));
    CHECK(back.method == ces.method);
    CHECK(back.explanations == ces.explanations);
    CHECK(back.predictions == ces.predictions);
    CHECK(back.model_labels == ces.model_labels);
    CHECK(back.problem.base == ces.problem.base);
    CHECK(back.problem.distance_bound == ces.problem.distance_bound);
    CHECK(back.problem.rules == ces.problem.rules);
    validate_ceset(back, 1e-9);
    verify_predictions(back, models, 1e-12);

    write_ceset_csv(ces, tmp.file("ces.csv"));
    const std::string text = test::read_text(tmp.file("ces.csv"));
    CHECK(text.find("delta_sex") == 0);
    CHECK(text.find("pred_linear") != std::string::npos);
    CHECK(std::count(text.begin(), text.end(), '\n') == 5);

    write_ceset_csv(ces, tmp.file("snapped.csv"), true);
    CHECK_NOTHROW(read_numeric_csv(tmp.file("snapped.csv")));
}

TEST_CASE("validate_ceset catches violations") {
    CESet bad = manual_set({{1.0, 1.0}});
    bad.problem.distance_bound = 1.0;
    CHECK_THROWS_AS(validate_ceset(bad, 1e-9), InvalidArgument);

    CESet rule_breaker = manual_set({{0.5}});
    rule_breaker.problem.rules[0] = DirectionRule::nonincreasing;  // base 0, so x must be <= 0
    CHECK_THROWS_AS(validate_ceset(rule_breaker, 1e-9), InvalidArgument);
}
