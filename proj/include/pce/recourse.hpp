#ifndef PCE_RECOURSE_HPP
#define PCE_RECOURSE_HPP

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pce/models.hpp"
#include "pce/moo.hpp"

namespace pce {

enum class TargetMode { maximize, match };
enum class DistanceKind { euclidean, squared_euclidean };
enum class DirectionRule { free, nonincreasing, nondecreasing, fixed };

// How binary01 features are constrained relative to the base value.
// monotone_from_base: value 1 may only decrease, value 0 may only increase.
// monotone_opposite: the flipped mapping, kept selectable.
enum class BinaryRulePolicy { none, monotone_from_base, monotone_opposite };

struct RuleSpec {
    BinaryRulePolicy binary_policy = BinaryRulePolicy::none;
    std::vector<std::string> fixed_features;
    std::map<std::string, DirectionRule> overrides;
};

struct EqualityConstraint {
    std::function<double(std::span<const double>)> fn;
    double tolerance = 1e-6;
};

struct CEProblem {
    std::vector<double> base;
    TargetMode target_mode = TargetMode::maximize;
    double target_value = 0.0;  // used in match mode only
    double distance_bound = 0.0;
    double lambda = 0.0;
    DistanceKind distance_kind = DistanceKind::euclidean;
    std::vector<std::string> feature_names;
    std::vector<FeatureKind> feature_kinds;
    std::vector<double> lower;
    std::vector<double> upper;
    std::vector<DirectionRule> rules;
    std::vector<EqualityConstraint> equalities;
    std::vector<std::string> warnings;

    std::size_t dimension() const { return base.size(); }

    // Box bounds with direction rules folded in; fixed features collapse to a
    // zero-width interval at the base value.
    void effective_intervals(std::vector<double>& lo, std::vector<double>& hi) const;
};

struct LabeledModel {
    std::string label;
    std::shared_ptr<const Predictor> model;
};

struct CESet {
    CEProblem problem;
    std::string method;
    std::vector<std::string> model_labels;        // prediction matrix columns
    std::vector<std::size_t> objective_models;    // columns the method optimized
    std::size_t requested = 0;                    // S as requested
    std::vector<std::vector<double>> explanations;  // S x r
    std::vector<std::vector<double>> predictions;   // S x m
    std::vector<std::string> warnings;

    std::size_t size() const { return explanations.size(); }
};

struct Method1Options {
    std::size_t max_evals = 500;
    double tolerance = 1e-6;
};

struct Method3Options {
    MooConfig moo;
    bool seed_base_individual = true;
    // Adds per-model constraints f_j(x) >= f_j(base) so that every emitted
    // explanation is a Pareto improvement over the base point.
    bool enforce_improvement = false;
};

CEProblem build_problem(std::span<const double> base, const Dataset& dataset, double C,
                        double lambda, const RuleSpec& rules,
                        DistanceKind kind = DistanceKind::euclidean,
                        TargetMode mode = TargetMode::maximize, double target_value = 0.0);

double distance(std::span<const double> a, std::span<const double> b, DistanceKind kind);

CESet method1_generate(const CEProblem& problem, const LabeledModel& model, std::size_t S,
                       std::uint64_t seed, std::span<const LabeledModel> report_models = {},
                       const Method1Options& options = {});

CESet method2_generate(const CEProblem& problem, const LabeledModel& stacked, std::size_t S,
                       std::uint64_t seed, std::span<const LabeledModel> report_models = {},
                       const Method1Options& options = {});

CESet method3_generate(const CEProblem& problem, std::span<const LabeledModel> models,
                       std::size_t S, const Method3Options& options);

std::vector<double> select_medoid(const CESet& ces);
std::vector<double> select_closest_to_centroid(const CESet& ces);

Json ceset_to_json(const CESet& ces);
CESet ceset_from_json(const Json& doc);
void save_ceset(const CESet& ces, const std::string& path);
CESet load_ceset(const std::string& path);
void write_ceset_csv(const CESet& ces, const std::string& path, bool snap_binary = false);

// Throws InvalidArgument when any feasibility invariant is broken.
void validate_ceset(const CESet& ces, double tolerance = 1e-9);

// Recomputes the prediction matrix and compares against the stored one.
void verify_predictions(const CESet& ces, std::span<const LabeledModel> models,
                        double tolerance = 1e-9);

}  // namespace pce

#endif
