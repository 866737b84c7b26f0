#ifndef PCE_EXPERIMENT_HPP
#define PCE_EXPERIMENT_HPP

#include <string>
#include <vector>

#include "pce/metrics.hpp"
#include "pce/zoo.hpp"

namespace pce {

// Fully materialized run configuration; the JSON form is the on-disk contract
// and unknown keys are rejected.
struct ExperimentConfig {
    std::string experiment = "exp1_case1";  // exp1_case1 | exp1_case2 | exp2

    std::string data_source = "case1";  // case1 | case2 | survey | csv
    std::string csv_path;
    std::string target_column = "y";
    std::size_t n = 1000;

    std::size_t n_bases = 10;
    std::size_t s = 20;
    double c = 3.0;
    double lambda = 2.0;
    std::vector<std::size_t> m_values = {2, 3, 4};

    std::size_t split_repeats = 20;
    double train_fraction = 0.7;

    MooConfig moo;  // seed field is derived from the master seed at run time
    std::size_t m1_max_evals = 500;
    double m1_tolerance = 1e-6;

    bool compute_tir = true;
    bool enforce_improvement = false;
    bool snap_binary_csv = false;
    std::string binary_rule_policy = "none";  // none | monotone_from_base | monotone_opposite
    std::vector<std::string> fixed_features;

    std::uint64_t seed = 1;
    std::string out_dir = "run";
    std::size_t workers = 1;

    static ExperimentConfig preset(const std::string& experiment, const std::string& name);
    static ExperimentConfig from_json(const Json& doc);
    Json to_json() const;

    void validate() const;
};

struct StageTiming {
    std::string name;
    double seconds = 0.0;
};

struct RunManifest {
    Json config_echo;
    std::string library_version;
    std::vector<StageTiming> stages;
    std::vector<std::pair<std::string, std::string>> files;  // relative path, sha256
    std::string failed_stage;  // empty on success

    Json to_json() const;
    static RunManifest from_json(const Json& doc);
};

RunManifest run_experiment(const ExperimentConfig& config);

// Table builders shared with the audit path, all pure in their inputs.
struct BarRow {
    std::string feature;
    double mean = 0.0;
    double stddev = 0.0;
};

std::vector<BarRow> ce_average_bars(std::span<const CESet> sets, bool include_base);
std::string bar_csv_text(const std::vector<BarRow>& rows);
std::string pareto_scatter_csv_text(const CESet& ces, std::span<const double> base_predictions);
std::string representative_csv_text(const CESet& ces);

// Row labels and file stems used for per-base CESet artifacts.
std::string ceset_stem(std::size_t base_index, const std::string& row_label);
std::vector<std::string> method_row_labels(const ExperimentConfig& config,
                                           std::span<const std::string> base_model_names);

}  // namespace pce

#endif
