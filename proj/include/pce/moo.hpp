#ifndef PCE_MOO_HPP
#define PCE_MOO_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pce/common.hpp"

namespace pce {

// Box-bounded real-vector problem, all objectives minimized. Constraint
// evaluators return violation magnitudes: 0 means satisfied.
struct MooProblem {
    std::size_t dimension = 0;
    std::vector<double> lower;
    std::vector<double> upper;
    std::size_t n_objectives = 0;
    std::function<std::vector<double>(std::span<const double>)> objectives;
    std::function<std::vector<double>(std::span<const double>)> constraints;  // may be null
};

struct Individual {
    std::vector<double> genome;
    std::vector<double> objectives;
    double total_violation = 0.0;
    int rank = 0;
    double crowding = 0.0;

    bool feasible() const { return total_violation <= 0.0; }
};

struct MooConfig {
    std::size_t population = 100;  // even, >= 4
    std::size_t generations = 100;
    double crossover_prob = 0.9;
    double sbx_eta = 15.0;
    double mutation_prob = -1.0;  // < 0 means 1/dimension
    double mutation_eta = 20.0;
    std::uint64_t seed = 0;
    // Optional point injected into the initial population (clipped to bounds).
    std::optional<std::vector<double>> initial_point;
};

struct GenerationStats {
    std::size_t generation = 0;
    std::vector<double> best_objective;  // per objective, over feasible rank-0 set
    std::size_t feasible_count = 0;
    double hypervolume = 0.0;  // against the trace reference point, 0 when unset
};

using GenerationObserver = std::function<void(const GenerationStats&)>;

struct MooResult {
    std::vector<Individual> archive;  // rank-0 feasible set, or whole population when infeasible
    bool feasible = true;
    double best_violation = 0.0;  // smallest total violation seen when infeasible
};

// Constraint-domination: feasible beats infeasible, infeasible compare by
// violation, feasible compare by Pareto dominance.
bool dominates(const Individual& a, const Individual& b);

std::vector<std::vector<std::size_t>> fast_nondominated_sort(std::vector<Individual>& pop);

std::vector<double> crowding_distance(std::span<const Individual> front);

MooResult evolve(const MooProblem& problem, const MooConfig& config,
                 const GenerationObserver& observer = nullptr,
                 std::span<const double> hypervolume_reference = {});

std::vector<Individual> select_diverse_subset(const std::vector<Individual>& archive,
                                              std::size_t k);

// Dominated-region volume between the point set and a reference corner
// (minimization; every point must dominate the reference).
double hypervolume(const std::vector<std::vector<double>>& points,
                   std::span<const double> reference);

void write_trace_csv(const std::vector<GenerationStats>& trace, std::size_t n_objectives,
                     const std::string& path);

}  // namespace pce

#endif
