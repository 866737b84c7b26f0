#ifndef PCE_PLOTS_HPP
#define PCE_PLOTS_HPP

#include <string>
#include <vector>

#include "pce/experiment.hpp"

namespace pce {

// Deterministic SVG renderers; output is a pure function of the inputs.
std::string render_bar_svg(const std::string& title, const std::vector<BarRow>& rows);
std::string render_scatter_matrix_svg(const std::string& title, std::size_t n_objectives,
                                      const std::vector<std::vector<double>>& points,
                                      const std::vector<bool>& is_base);

// Renders bar_ce_with_base.svg, bar_ce_delta.svg and pareto_front.svg from the
// matching CSV files in an experiment-2 run directory.
void emit_plots(const std::string& run_dir);

}  // namespace pce

#endif
