#ifndef PCE_PATTERN_SEARCH_HPP
#define PCE_PATTERN_SEARCH_HPP

#include <functional>
#include <span>
#include <vector>

namespace pce {

struct PatternSearchOptions {
    std::size_t max_evals = 500;
    double tolerance = 1e-6;  // stop once a whole step level improves less than this
    double min_step_factor = 1e-4;
};

struct PatternSearchResult {
    std::vector<double> x;
    double fx = 0.0;
    std::size_t evals = 0;
    bool failed = false;  // non-finite objective encountered
};

// Hooke-Jeeves direct search: exploratory coordinate moves plus accelerating
// pattern moves, geometric step halving. The coarse-to-fine schedule follows
// macro trends across rugged (piecewise-constant) objectives before refining.
// Callers bake constraints into the objective.
PatternSearchResult pattern_search(const std::function<double(std::span<const double>)>& fn,
                                   std::span<const double> start,
                                   std::span<const double> steps,
                                   const PatternSearchOptions& options);

}  // namespace pce

#endif
