#include <algorithm>
#include <cmath>
#include <doctest.h>
#include <set>

#include "pce/moo.hpp"
#include "pce/rng.hpp"
#include "test_support.hpp"

using namespace pce;

namespace {

Individual make_ind(std::vector<double> obj, double violation = 0.0) {
    Individual ind;
    ind.objectives = std::move(obj);
    ind.total_violation = violation;
    return ind;
}

// Independent layer-peeling rank oracle with its own dominance test.
std::vector<int> oracle_ranks(const std::vector<Individual>& pop) {
    auto beats = [](const Individual& a, const Individual& b) {
        const bool fa = a.total_violation <= 0.0;
        const bool fb = b.total_violation <= 0.0;
        if (fa && !fb) return true;
        if (!fa && fb) return false;
        if (!fa && !fb) return a.total_violation < b.total_violation;
        bool some_less = false, some_more = false;
        for (std::size_t l = 0; l < a.objectives.size(); ++l) {
            if (a.objectives[l] < b.objectives[l]) some_less = true;
            if (a.objectives[l] > b.objectives[l]) some_more = true;
        }
        return some_less && !some_more;
    };
    std::vector<int> ranks(pop.size(), -1);
    int rank = 0;
    std::size_t assigned = 0;
    while (assigned < pop.size()) {
        std::vector<std::size_t> layer;
        for (std::size_t i = 0; i < pop.size(); ++i) {
            if (ranks[i] >= 0) continue;
            bool dominated = false;
            for (std::size_t j = 0; j < pop.size() && !dominated; ++j)
                dominated = j != i && ranks[j] < 0 && beats(pop[j], pop[i]);
            if (!dominated) layer.push_back(i);
        }
        for (std::size_t i : layer) ranks[i] = rank;
        assigned += layer.size();
        ++rank;
    }
    return ranks;
}

MooProblem schaffer() {
    MooProblem p;
    p.dimension = 1;
    p.lower = {-5.0};
    p.upper = {5.0};
    p.n_objectives = 2;
    p.objectives = [](std::span<const double> x) {
        return std::vector<double>{x[0] * x[0], (x[0] - 2.0) * (x[0] - 2.0)};
    };
    return p;
}

}  // namespace

TEST_CASE("dominance over objective pairs") {
    CHECK(dominates(make_ind({1, 2}), make_ind({2, 3})));
    CHECK_FALSE(dominates(make_ind({1, 2}), make_ind({2, 1})));
    CHECK_FALSE(dominates(make_ind({2, 1}), make_ind({1, 2})));
    CHECK_FALSE(dominates(make_ind({1, 2}), make_ind({1, 2})));
    CHECK(dominates(make_ind({9, 9}), make_ind({0, 0}, 1.0)));  // feasibility first
    CHECK(dominates(make_ind({0, 0}, 0.5), make_ind({0, 0}, 2.0)));
    CHECK_THROWS_AS(dominates(make_ind({1}), make_ind({1, 2})), InvalidArgument);
}

TEST_CASE("non-dominated sorting on hand cases") {
    std::vector<Individual> single = {make_ind({1, 1})};
    auto fronts = fast_nondominated_sort(single);
    REQUIRE(fronts.size() == 1);
    CHECK(fronts[0] == std::vector<std::size_t>{0});
    CHECK(single[0].rank == 0);

    std::vector<Individual> three = {make_ind({1, 2}), make_ind({2, 1}), make_ind({3, 3})};
    fronts = fast_nondominated_sort(three);
    REQUIRE(fronts.size() == 2);
    CHECK(fronts[0] == std::vector<std::size_t>{0, 1});
    CHECK(fronts[1] == std::vector<std::size_t>{2});

    std::vector<Individual> empty;
    CHECK(fast_nondominated_sort(empty).empty());
}

TEST_CASE("non-dominated sorting agrees with the peeling oracle") {
    Rng rng(31);
    for (int round = 0; round < 20; ++round) {
        std::vector<Individual> pop;
        for (int i = 0; i < 120; ++i) {
            Individual ind = make_ind({rng.uniform(0, 10), rng.uniform(0, 10), rng.uniform(0, 10)});
            if (round % 2 == 1 && rng.uniform01() < 0.3) ind.total_violation = rng.uniform(0.1, 2.0);
            pop.push_back(std::move(ind));
        }
        const auto expected = oracle_ranks(pop);
        auto fronts = fast_nondominated_sort(pop);
        std::size_t covered = 0;
        for (std::size_t f = 0; f < fronts.size(); ++f) {
            for (std::size_t i : fronts[f]) {
                CHECK(pop[i].rank == static_cast<int>(f));
                CHECK(expected[i] == static_cast<int>(f));
                ++covered;
            }
        }
        CHECK(covered == pop.size());
    }
}

TEST_CASE("crowding distance hand cases") {
    std::vector<Individual> pair = {make_ind({0, 1}), make_ind({1, 0})};
    auto d = crowding_distance(pair);
    CHECK(std::isinf(d[0]));
    CHECK(std::isinf(d[1]));

    std::vector<Individual> line = {make_ind({0, 4}), make_ind({1, 3}), make_ind({2, 2})};
    d = crowding_distance(line);
    CHECK(std::isinf(d[0]));
    CHECK(d[1] == doctest::Approx(2.0));
    CHECK(std::isinf(d[2]));

    std::vector<Individual> same = {make_ind({1, 1}), make_ind({1, 1}), make_ind({1, 1}),
                                    make_ind({1, 1})};
    d = crowding_distance(same);
    bool found_zero = false;
    for (double v : d) found_zero = found_zero || v == 0.0;
    CHECK(found_zero);
}

TEST_CASE("evolve approximates the analytic schaffer front") {
    MooConfig cfg;
    cfg.population = 100;
    cfg.generations = 100;
    cfg.seed = 5;
    const MooResult res = evolve(schaffer(), cfg);
    REQUIRE(res.feasible);
    REQUIRE(!res.archive.empty());
    for (const auto& ind : res.archive) {
        const double f1 = ind.objectives[0];
        const double f2 = ind.objectives[1];
        CHECK(f1 >= -1e-12);
        CHECK(f1 <= 4.0 + 0.05);
        const double expected = std::pow(std::sqrt(std::max(0.0, f1)) - 2.0, 2.0);
        CHECK(std::abs(f2 - expected) < 0.05);
        CHECK(ind.genome[0] >= -5.0);
        CHECK(ind.genome[0] <= 5.0);
    }
}

TEST_CASE("evolve output contains no dominated member and respects bounds") {
    MooConfig cfg;
    cfg.population = 60;
    cfg.generations = 40;
    cfg.seed = 6;
    const MooResult res = evolve(schaffer(), cfg);
    for (std::size_t i = 0; i < res.archive.size(); ++i) {
        for (std::size_t j = 0; j < res.archive.size(); ++j) {
            if (i == j) continue;
            CHECK_FALSE(dominates(res.archive[j], res.archive[i]));
        }
    }
}

TEST_CASE("single-objective degenerate run converges") {
    MooProblem p;
    p.dimension = 1;
    p.lower = {-5.0};
    p.upper = {5.0};
    p.n_objectives = 1;
    p.objectives = [](std::span<const double> x) { return std::vector<double>{x[0] * x[0]}; };
    MooConfig cfg;
    cfg.population = 60;
    cfg.generations = 100;
    cfg.seed = 7;
    const MooResult res = evolve(p, cfg);
    double best = 1e9;
    for (const auto& ind : res.archive) best = std::min(best, std::abs(ind.genome[0]));
    CHECK(best < 0.01);
}

TEST_CASE("constraint keeps the archive feasible") {
    MooProblem p;
    p.dimension = 1;
    p.lower = {-5.0};
    p.upper = {5.0};
    p.n_objectives = 2;
    p.objectives = [](std::span<const double> x) {
        return std::vector<double>{x[0] * x[0], x[0]};
    };
    p.constraints = [](std::span<const double> x) {
        return std::vector<double>{std::max(0.0, 1.0 - x[0])};
    };
    MooConfig cfg;
    cfg.population = 60;
    cfg.generations = 60;
    cfg.seed = 8;
    const MooResult res = evolve(p, cfg);
    REQUIRE(res.feasible);
    for (const auto& ind : res.archive) CHECK(ind.genome[0] >= 1.0 - 1e-9);
}

TEST_CASE("per-objective best over the feasible front never worsens") {
    std::vector<GenerationStats> trace;
    MooConfig cfg;
    cfg.population = 60;
    cfg.generations = 50;
    cfg.seed = 9;
    evolve(schaffer(), cfg, [&](const GenerationStats& s) { trace.push_back(s); });
    REQUIRE(trace.size() == 50);
    for (std::size_t g = 1; g < trace.size(); ++g) {
        for (std::size_t l = 0; l < 2; ++l)
            CHECK(trace[g].best_objective[l] <= trace[g - 1].best_objective[l]);
    }
}

TEST_CASE("evolve is deterministic under the seed") {
    MooConfig cfg;
    cfg.population = 40;
    cfg.generations = 30;
    cfg.seed = 10;
    const MooResult a = evolve(schaffer(), cfg);
    const MooResult b = evolve(schaffer(), cfg);
    REQUIRE(a.archive.size() == b.archive.size());
    for (std::size_t i = 0; i < a.archive.size(); ++i) {
        CHECK(a.archive[i].genome == b.archive[i].genome);
        CHECK(a.archive[i].objectives == b.archive[i].objectives);
    }
}

TEST_CASE("seeded initial point is clipped into bounds") {
    MooProblem p = schaffer();
    MooConfig cfg;
    cfg.population = 8;
    cfg.generations = 1;
    cfg.seed = 11;
    cfg.initial_point = std::vector<double>{99.0};
    CHECK_NOTHROW(evolve(p, cfg));
}

TEST_CASE("non-finite objectives raise a run error naming the genome") {
    MooProblem p;
    p.dimension = 1;
    p.lower = {0.0};
    p.upper = {1.0};
    p.n_objectives = 1;
    p.objectives = [](std::span<const double>) {
        return std::vector<double>{std::numeric_limits<double>::quiet_NaN()};
    };
    MooConfig cfg;
    cfg.population = 4;
    cfg.generations = 1;
    CHECK_THROWS_WITH_AS(evolve(p, cfg), doctest::Contains("genome"), RunError);
}

TEST_CASE("config validation") {
    MooProblem p = schaffer();
    MooConfig cfg;
    cfg.population = 3;
    CHECK_THROWS_AS(evolve(p, cfg), InvalidArgument);
    cfg.population = 6;
    cfg.generations = 0;
    CHECK_THROWS_AS(evolve(p, cfg), InvalidArgument);
    cfg.generations = 1;
    cfg.crossover_prob = 1.5;
    CHECK_THROWS_AS(evolve(p, cfg), InvalidArgument);
    cfg.crossover_prob = 0.9;
    p.lower = {2.0};
    p.upper = {1.0};
    CHECK_THROWS_AS(evolve(p, cfg), InvalidArgument);
}

TEST_CASE("diverse subset selection") {
    std::vector<Individual> small;
    for (int i = 0; i < 5; ++i) small.push_back(make_ind({double(i), 5.0 - i}));
    CHECK(select_diverse_subset(small, 20).size() == 5);

    std::vector<Individual> archive;
    for (int i = 0; i < 40; ++i) {
        Individual ind = make_ind({double(i), 39.0 - i});
        ind.genome = {double(i)};
        archive.push_back(std::move(ind));
    }
    const auto subset = select_diverse_subset(archive, 20);
    REQUIRE(subset.size() == 20);
    bool has_first = false, has_last = false;
    std::set<std::vector<double>> genomes;
    for (const auto& ind : subset) {
        genomes.insert(ind.genome);
        if (ind.objectives[0] == 0.0) has_first = true;
        if (ind.objectives[0] == 39.0) has_last = true;
    }
    CHECK(has_first);
    CHECK(has_last);
    CHECK(genomes.size() == 20);  // no duplicated picks

    CHECK_THROWS_AS(select_diverse_subset({}, 3), InvalidArgument);
}

TEST_CASE("hypervolume hand cases") {
    CHECK(hypervolume({{0.0, 0.0}}, std::vector<double>{1.0, 1.0}) == doctest::Approx(1.0));
    CHECK(hypervolume({{1.0, 2.0}, {2.0, 1.0}}, std::vector<double>{3.0, 3.0}) ==
          doctest::Approx(3.0));
    CHECK(hypervolume({{0.0, 0.0, 0.0}}, std::vector<double>{1.0, 1.0, 1.0}) ==
          doctest::Approx(1.0));
    CHECK(hypervolume({{0.0, 0.0, 0.0}, {0.5, 0.5, 0.5}}, std::vector<double>{1.0, 1.0, 1.0}) ==
          doctest::Approx(1.0));
    // point outside the reference box contributes nothing
    CHECK(hypervolume({{2.0, 2.0}}, std::vector<double>{1.0, 1.0}) == doctest::Approx(0.0));
}

TEST_CASE("trace emission writes one row per generation") {
    test::TempDir tmp("trace");
    std::vector<GenerationStats> trace;
    MooConfig cfg;
    cfg.population = 20;
    cfg.generations = 10;
    cfg.seed = 12;
    const std::vector<double> ref = {30.0, 30.0};
    evolve(schaffer(), cfg, [&](const GenerationStats& s) { trace.push_back(s); }, ref);
    for (const auto& s : trace) CHECK(s.hypervolume > 0.0);
    write_trace_csv(trace, 2, tmp.file("trace.csv"));
    const std::string text = test::read_text(tmp.file("trace.csv"));
    CHECK(text.rfind("generation,best_objective_1,best_objective_2,feasible_count,hypervolume\n",
                     0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 11);
}
