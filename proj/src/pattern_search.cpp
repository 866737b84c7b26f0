#include "pce/pattern_search.hpp"

#include <cmath>

namespace pce {

PatternSearchResult pattern_search(const std::function<double(std::span<const double>)>& fn,
                                   std::span<const double> start,
                                   std::span<const double> steps,
                                   const PatternSearchOptions& options) {
    const std::size_t n = start.size();
    PatternSearchResult result;

    auto eval = [&](const std::vector<double>& x) {
        ++result.evals;
        const double f = fn(x);
        if (!std::isfinite(f)) result.failed = true;
        return f;
    };

    std::vector<double> base(start.begin(), start.end());
    double f_base = eval(base);

    // Greedy per-coordinate probe around (point, value); mutates them in place.
    auto explore = [&](std::vector<double>& point, double& value, double h) {
        for (std::size_t j = 0; j < n && result.evals < options.max_evals && !result.failed;
             ++j) {
            const double delta = h * steps[j];
            if (delta == 0.0) continue;
            const double original = point[j];
            point[j] = original + delta;
            double f_trial = eval(point);
            if (f_trial < value) {
                value = f_trial;
                continue;
            }
            if (result.evals >= options.max_evals || result.failed) {
                point[j] = original;
                break;
            }
            point[j] = original - delta;
            f_trial = eval(point);
            if (f_trial < value) {
                value = f_trial;
            } else {
                point[j] = original;
            }
        }
    };

    double h = 1.0;
    double f_at_last_halving = f_base;
    std::size_t stale_levels = 0;
    while (!result.failed && result.evals < options.max_evals &&
           h >= options.min_step_factor) {
        std::vector<double> probe = base;
        double f_probe = f_base;
        explore(probe, f_probe, h);

        if (f_probe < f_base) {
            // Pattern moves: keep doubling along the successful direction.
            while (result.evals < options.max_evals && !result.failed) {
                std::vector<double> pattern(n);
                for (std::size_t j = 0; j < n; ++j) pattern[j] = 2.0 * probe[j] - base[j];
                base = probe;
                f_base = f_probe;
                double f_pattern = eval(pattern);
                explore(pattern, f_pattern, h);
                if (f_pattern < f_base) {
                    probe = std::move(pattern);
                    f_probe = f_pattern;
                } else {
                    break;
                }
            }
        } else {
            const double level_gain = f_at_last_halving - f_base;
            stale_levels = level_gain < options.tolerance ? stale_levels + 1 : 0;
            h *= 0.5;
            // The objective-spread stop only applies once steps are fine.
            if (stale_levels >= 3 && h < 1e-2) break;
            f_at_last_halving = f_base;
        }
    }

    result.x = std::move(base);
    result.fx = f_base;
    return result;
}

}  // namespace pce
