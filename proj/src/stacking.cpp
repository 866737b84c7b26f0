#include <Eigen/Dense>

#include "least_squares.hpp"
#include "pce/models.hpp"

namespace pce {

double StackingModel::predict(std::span<const double> x) const {
    check_input(x);
    double acc = intercept;
    for (std::size_t j = 0; j < bases.size(); ++j) acc += weights[j] * bases[j]->predict(x);
    return acc;
}

std::size_t StackingModel::feature_count() const {
    return bases.empty() ? 0 : bases.front()->feature_count();
}

Json StackingModel::to_json() const {
    Json doc;
    doc["format"] = "pce-predictor";
    doc["version"] = 1;
    doc["kind"] = kind();
    doc["hyperparameters"] = Json::object();
    doc["parameters"] = Json::object();
    doc["parameters"]["intercept"] = intercept;
    doc["parameters"]["weights"] = weights;
    doc["parameters"]["ridge_fallback"] = ridge_fallback;
    Json arr = Json::array();
    for (const auto& b : bases) arr.push_back(b->to_json());
    doc["parameters"]["bases"] = std::move(arr);
    return doc;
}

std::unique_ptr<StackingModel> fit_stacking(std::vector<std::shared_ptr<const Predictor>> bases,
                                            const Dataset& train) {
    if (bases.size() < 2) throw FitError("stacking: needs at least 2 base predictors");
    const std::size_t r = bases.front()->feature_count();
    for (const auto& b : bases)
        if (b->feature_count() != r)
            throw FitError("stacking: base predictors disagree on feature count");
    if (train.r != r) throw FitError("stacking: training data feature count mismatch");

    Eigen::MatrixXd preds(train.n, bases.size());
    Eigen::VectorXd y(train.n);
    for (std::size_t i = 0; i < train.n; ++i) {
        for (std::size_t j = 0; j < bases.size(); ++j)
            preds(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                bases[j]->predict(train.row(i));
        y(static_cast<Eigen::Index>(i)) = train.target[i];
    }
    auto sol = detail::fit_least_squares(preds, y, "stacking");
    auto model = std::make_unique<StackingModel>();
    model->bases = std::move(bases);
    model->intercept = sol.intercept;
    model->weights = std::move(sol.coefficients);
    model->ridge_fallback = sol.ridge_fallback;
    return model;
}

namespace detail {

std::unique_ptr<Predictor> stacking_from_json(const Json& doc) {
    auto model = std::make_unique<StackingModel>();
    const Json& p = doc.at("parameters");
    model->intercept = p.at("intercept").get<double>();
    model->weights = p.at("weights").get<std::vector<double>>();
    model->ridge_fallback = p.at("ridge_fallback").get<bool>();
    for (const auto& b : p.at("bases"))
        model->bases.emplace_back(predictor_from_json(b).release());
    return model;
}

}  // namespace detail

}  // namespace pce
