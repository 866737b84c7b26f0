#include "pce/zoo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "pce/csv.hpp"

namespace pce {

ModelZoo default_model_zoo() {
    ModelZoo zoo;
    zoo.bases.push_back({"linear", [](const Dataset& train, std::uint64_t) {
                             return std::unique_ptr<Predictor>(fit_linear(train));
                         }});
    zoo.bases.push_back({"random_forest", [](const Dataset& train, std::uint64_t seed) {
                             return std::unique_ptr<Predictor>(
                                 fit_random_forest(train, ForestOptions{}, seed));
                         }});
    zoo.bases.push_back({"gbt", [](const Dataset& train, std::uint64_t seed) {
                             return std::unique_ptr<Predictor>(fit_gbt(train, GbtOptions{}, seed));
                         }});
    zoo.bases.push_back({"mlp", [](const Dataset& train, std::uint64_t seed) {
                             return std::unique_ptr<Predictor>(fit_mlp(train, MlpOptions{}, seed));
                         }});
    zoo.include_stacking = true;
    return zoo;
}

std::vector<std::shared_ptr<const Predictor>> FittedZoo::all() const {
    auto out = bases;
    if (stacking) out.push_back(stacking);
    return out;
}

FittedZoo fit_zoo(const ModelZoo& zoo, const Dataset& train, std::uint64_t seed) {
    FittedZoo fitted;
    for (std::size_t b = 0; b < zoo.bases.size(); ++b) {
        try {
            fitted.bases.emplace_back(
                zoo.bases[b].fit(train, mix_seed(seed, {0x666974ULL, b})).release());
        } catch (const FitError& e) {
            throw FitError("model '" + zoo.bases[b].name + "': " + e.what());
        }
    }
    if (zoo.include_stacking) {
        try {
            fitted.stacking =
                std::shared_ptr<const StackingModel>(fit_stacking(fitted.bases, train).release());
        } catch (const FitError& e) {
            throw FitError(std::string("model 'stacking': ") + e.what());
        }
    }
    return fitted;
}

AccuracyReport evaluate_models(const ModelZoo& zoo, const Dataset& d, const SplitPlan& plan) {
    const auto splits = repeated_splits(d, plan);
    const std::size_t n_models = zoo.bases.size() + (zoo.include_stacking ? 1 : 0);

    AccuracyReport report;
    for (const auto& b : zoo.bases) report.model_names.push_back(b.name);
    if (zoo.include_stacking) report.model_names.push_back("stacking");

    std::vector<std::vector<double>> mses(n_models);
    for (std::size_t s = 0; s < splits.size(); ++s) {
        FittedZoo fitted;
        try {
            fitted = fit_zoo(zoo, splits[s].first, mix_seed(plan.seed, {0x6576616cULL, s}));
        } catch (const FitError& e) {
            std::ostringstream msg;
            msg << "split " << s << ": " << e.what();
            throw FitError(msg.str());
        }
        const auto models = fitted.all();
        for (std::size_t m = 0; m < models.size(); ++m)
            mses[m].push_back(models[m]->mse(splits[s].second));
    }

    report.mean_mse.resize(n_models);
    report.std_mse.resize(n_models);
    for (std::size_t m = 0; m < n_models; ++m) {
        double mean = 0.0;
        for (double v : mses[m]) mean += v;
        mean /= static_cast<double>(mses[m].size());
        double ss = 0.0;
        for (double v : mses[m]) ss += (v - mean) * (v - mean);
        report.mean_mse[m] = mean;
        report.std_mse[m] =
            mses[m].size() > 1 ? std::sqrt(ss / static_cast<double>(mses[m].size() - 1)) : 0.0;
    }

    report.ranking.resize(n_models);
    std::iota(report.ranking.begin(), report.ranking.end(), std::size_t{0});
    std::stable_sort(report.ranking.begin(), report.ranking.end(),
                     [&](std::size_t a, std::size_t b) {
                         return report.mean_mse[a] < report.mean_mse[b];
                     });
    return report;
}

std::vector<std::size_t> select_top_m(const AccuracyReport& report, std::size_t m) {
    if (m == 0 || m > report.ranking.size())
        throw InvalidArgument("select_top_m: m out of range");
    return {report.ranking.begin(), report.ranking.begin() + static_cast<std::ptrdiff_t>(m)};
}

void write_accuracy_csv(const AccuracyReport& report, const std::string& path) {
    std::vector<std::vector<std::string>> rows;
    for (std::size_t m = 0; m < report.model_names.size(); ++m) {
        rows.push_back({report.model_names[m], format_double(report.mean_mse[m]),
                        format_double(report.std_mse[m])});
    }
    write_csv(path, {"model", "mean_mse", "std_mse"}, rows);
}

}  // namespace pce
