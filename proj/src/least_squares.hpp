#ifndef PCE_LEAST_SQUARES_HPP
#define PCE_LEAST_SQUARES_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace pce::detail {

struct LeastSquaresFit {
    double intercept = 0.0;
    std::vector<double> coefficients;
    bool ridge_fallback = false;
};

LeastSquaresFit fit_least_squares(const Eigen::MatrixXd& predictors, const Eigen::VectorXd& y,
                                  const std::string& what);

}  // namespace pce::detail

#endif
