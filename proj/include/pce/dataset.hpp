#ifndef PCE_DATASET_HPP
#define PCE_DATASET_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pce/common.hpp"

namespace pce {

enum class FeatureKind { continuous, binary01 };

// Immutable after construction; safe to share across threads.
struct Dataset {
    std::vector<std::string> feature_names;
    std::vector<FeatureKind> feature_kinds;
    std::string target_name = "y";
    std::size_t n = 0;  // rows
    std::size_t r = 0;  // feature columns
    std::vector<double> features;  // row-major n*r
    std::vector<double> target;    // length n

    std::span<const double> row(std::size_t i) const { return {features.data() + i * r, r}; }
    double at(std::size_t i, std::size_t j) const { return features[i * r + j]; }

    // Throws InvalidArgument when any structural invariant is broken.
    void validate() const;

    Dataset subset(std::span<const std::size_t> rows) const;
};

struct SplitPlan {
    std::size_t n_repeats = 20;
    double train_fraction = 0.7;
    std::uint64_t seed = 0;
};

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

struct ColumnStats {
    std::string name;
    double mean = 0.0;
    double stddev = 0.0;
    double min = 0.0;
    double max = 0.0;
};

struct DescriptiveStats {
    std::vector<ColumnStats> columns;  // one per feature, target last
};

// Synthetic generators. The noise-free variants expose the structural part of
// each generator, which is what the true-improvement metric evaluates.
Dataset generate_case1(std::size_t n, std::uint64_t seed, bool noise_free = false);
Dataset generate_case2(std::size_t n, std::uint64_t seed, bool noise_free = false);
Dataset generate_survey_surrogate(std::size_t n, std::uint64_t seed, bool noise_free = false);

double case1_truth(std::span<const double> x);
double case2_truth(std::span<const double> x);
double survey_truth(std::span<const double> x);

Dataset ingest_csv(const std::string& path, const std::string& target_column,
                   const std::map<std::string, FeatureKind>& kind_overrides = {});
void export_csv(const Dataset& d, const std::string& path);

std::vector<SplitIndices> split_indices(std::size_t n, const SplitPlan& plan);
std::vector<std::pair<Dataset, Dataset>> repeated_splits(const Dataset& d, const SplitPlan& plan);

DescriptiveStats describe(const Dataset& d);
void write_describe_csv(const DescriptiveStats& stats, const std::string& path);

}  // namespace pce

#endif
