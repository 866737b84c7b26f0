#include <Eigen/Dense>
#include <cmath>

#include "least_squares.hpp"
#include "pce/models.hpp"

namespace pce {

namespace {

struct OlsResult {
    Eigen::VectorXd beta;  // intercept first
    bool ridge_fallback = false;
};

// Least squares on [1 | X]; falls back to ridge (penalty 1e-8 * trace(X'X)/p,
// intercept unpenalized) when the design is rank deficient.
OlsResult solve_ols(const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
                    const std::string& what) {
    OlsResult res;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() == design.cols()) {
        res.beta = qr.solve(y);
        return res;
    }
    const Eigen::Index p = design.cols() - 1;
    const double trace = design.rightCols(p).squaredNorm();
    const double alpha = 1e-8 * trace / static_cast<double>(p);
    Eigen::MatrixXd gram = design.transpose() * design;
    for (Eigen::Index j = 1; j < design.cols(); ++j) gram(j, j) += alpha;
    res.beta = gram.ldlt().solve(design.transpose() * y);
    res.ridge_fallback = true;
    if (!res.beta.allFinite()) throw FitError(what + ": design degenerate even after ridge fallback");
    return res;
}

}  // namespace

namespace detail {
LeastSquaresFit fit_least_squares(const Eigen::MatrixXd& predictors, const Eigen::VectorXd& y,
                                  const std::string& what) {
    Eigen::MatrixXd design(predictors.rows(), predictors.cols() + 1);
    design.col(0).setOnes();
    design.rightCols(predictors.cols()) = predictors;
    OlsResult r = solve_ols(design, y, what);
    LeastSquaresFit out;
    out.intercept = r.beta(0);
    out.coefficients.assign(r.beta.data() + 1, r.beta.data() + r.beta.size());
    out.ridge_fallback = r.ridge_fallback;
    return out;
}
}  // namespace detail

double LinearModel::predict(std::span<const double> x) const {
    check_input(x);
    double acc = intercept;
    for (std::size_t j = 0; j < coefficients.size(); ++j) acc += coefficients[j] * x[j];
    return acc;
}

Json LinearModel::to_json() const {
    Json doc;
    doc["format"] = "pce-predictor";
    doc["version"] = 1;
    doc["kind"] = kind();
    doc["hyperparameters"] = Json::object();
    doc["parameters"] = {{"intercept", intercept},
                         {"coefficients", coefficients},
                         {"ridge_fallback", ridge_fallback}};
    return doc;
}

std::unique_ptr<LinearModel> fit_linear(const Dataset& train) {
    if (train.n <= train.r)
        throw FitError("linear fit needs more rows than features");
    Eigen::MatrixXd x(train.n, train.r);
    Eigen::VectorXd y(train.n);
    for (std::size_t i = 0; i < train.n; ++i) {
        for (std::size_t j = 0; j < train.r; ++j) x(i, j) = train.at(i, j);
        y(i) = train.target[i];
    }
    auto sol = detail::fit_least_squares(x, y, "linear");
    auto model = std::make_unique<LinearModel>();
    model->intercept = sol.intercept;
    model->coefficients = std::move(sol.coefficients);
    model->ridge_fallback = sol.ridge_fallback;
    return model;
}

namespace detail {

std::unique_ptr<Predictor> linear_from_json(const Json& doc) {
    auto model = std::make_unique<LinearModel>();
    const Json& p = doc.at("parameters");
    model->intercept = p.at("intercept").get<double>();
    model->coefficients = p.at("coefficients").get<std::vector<double>>();
    model->ridge_fallback = p.at("ridge_fallback").get<bool>();
    return model;
}

}  // namespace detail

}  // namespace pce
