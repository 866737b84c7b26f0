#ifndef PCE_ZOO_HPP
#define PCE_ZOO_HPP

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "pce/models.hpp"

namespace pce {

struct AccuracyReport {
    std::vector<std::string> model_names;
    std::vector<double> mean_mse;
    std::vector<double> std_mse;
    std::vector<std::size_t> ranking;  // ascending mean MSE, ties by model index
};

using FitFn = std::function<std::unique_ptr<Predictor>(const Dataset& train, std::uint64_t seed)>;

struct FitProcedure {
    std::string name;
    FitFn fit;
};

// Base procedures plus an optional stacking stage fit over the same bases.
struct ModelZoo {
    std::vector<FitProcedure> bases;
    bool include_stacking = true;
};

ModelZoo default_model_zoo();

struct FittedZoo {
    std::vector<std::shared_ptr<const Predictor>> bases;
    std::shared_ptr<const StackingModel> stacking;  // null when the zoo excludes it

    std::vector<std::shared_ptr<const Predictor>> all() const;
};

FittedZoo fit_zoo(const ModelZoo& zoo, const Dataset& train, std::uint64_t seed);

AccuracyReport evaluate_models(const ModelZoo& zoo, const Dataset& d, const SplitPlan& plan);

std::vector<std::size_t> select_top_m(const AccuracyReport& report, std::size_t m);

void write_accuracy_csv(const AccuracyReport& report, const std::string& path);

}  // namespace pce

#endif
