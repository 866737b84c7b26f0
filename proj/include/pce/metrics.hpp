#ifndef PCE_METRICS_HPP
#define PCE_METRICS_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pce/recourse.hpp"

namespace pce {

using TruthFn = std::function<double(std::span<const double>)>;

// Which improvement test the true-improvement ratio applies.
// truth_vs_base: truth(x_cf) > truth(x_base) — the default reading.
// prediction_vs_truth: mean model prediction at x_cf exceeds truth(x_cf).
enum class TirMode { truth_vs_base, prediction_vs_truth };

struct MetricsReport {
    std::vector<std::string> val_labels;
    std::vector<double> val;  // one entry per objective model
    double ave_val = 0.0;
    double dissim = 0.0;
    double plaus = 0.0;
    std::optional<double> tir;
    std::optional<double> ratio_val_dissim;  // absent when the denominator is < 1e-12
    std::optional<double> ratio_val_plaus;
    std::size_t s_effective = 0;
};

double validity(const CESet& ces, std::size_t model_index);
double dissimilarity(const CESet& ces);
double plausibility(const CESet& ces, const Dataset& train);
double true_improvement_ratio(const CESet& ces, const TruthFn& truth,
                              TirMode mode = TirMode::truth_vs_base);

// Full per-case report; truth == nullptr skips the improvement ratio.
MetricsReport compute_metrics(const CESet& ces, const Dataset& train, const TruthFn* truth,
                              TirMode mode = TirMode::truth_vs_base);

struct TaggedReport {
    std::string method;  // method1 | method2 | method3
    std::string label;   // table row, e.g. method1_linear or method3_m3
    MetricsReport report;
};

struct AggregateRow {
    std::string method;
    std::string label;
    std::vector<std::string> val_labels;
    std::vector<double> val;  // per-model means over cases
    double ave_val = 0.0;
    double dissim = 0.0;
    double plaus = 0.0;
    std::optional<double> tir;
    std::optional<double> ratio_val_dissim;
    std::optional<double> ratio_val_plaus;
    std::size_t n_cases = 0;
    bool top3_dissim = false;
    bool top3_plaus = false;
    bool top3_tir = false;
    bool top3_ratio_dissim = false;
    bool top3_ratio_plaus = false;
};

struct AggregateReport {
    std::vector<AggregateRow> rows;
    std::vector<std::string> model_columns;  // union of val labels, first-appearance order
};

AggregateReport aggregate(std::span<const TaggedReport> reports);

std::string aggregate_csv_text(const AggregateReport& report);
void write_aggregate_csv(const AggregateReport& report, const std::string& path);
void write_aggregate_markdown(const AggregateReport& report, const std::string& path);

}  // namespace pce

#endif
