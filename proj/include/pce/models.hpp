#ifndef PCE_MODELS_HPP
#define PCE_MODELS_HPP

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "pce/predictor.hpp"
#include "pce/rng.hpp"

namespace pce {

// ---------------------------------------------------------------------------
// Linear regression (ordinary least squares with ridge fallback)

struct LinearModel final : Predictor {
    std::vector<double> coefficients;
    double intercept = 0.0;
    bool ridge_fallback = false;

    double predict(std::span<const double> x) const override;
    std::size_t feature_count() const override { return coefficients.size(); }
    std::string kind() const override { return "linear"; }
    Json to_json() const override;
};

std::unique_ptr<LinearModel> fit_linear(const Dataset& train);

// ---------------------------------------------------------------------------
// CART trees, random forest, gradient boosting

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
};

struct RegressionTree {
    std::vector<TreeNode> nodes;
    double predict(std::span<const double> x) const;
};

struct CartOptions {
    std::size_t min_samples_split = 2;
    std::size_t min_samples_leaf = 1;
};

RegressionTree fit_cart(const Dataset& train, std::span<const std::size_t> rows,
                        const CartOptions& opt);

struct ForestOptions {
    std::size_t n_trees = 100;
    std::size_t min_samples_split = 2;
    bool bootstrap = true;  // test hook: off reduces a 1-tree forest to plain CART
};

struct RandomForestModel final : Predictor {
    std::vector<RegressionTree> trees;
    std::size_t n_features = 0;
    ForestOptions options;
    std::uint64_t seed = 0;

    double predict(std::span<const double> x) const override;
    std::size_t feature_count() const override { return n_features; }
    std::string kind() const override { return "random_forest"; }
    Json to_json() const override;
};

std::unique_ptr<RandomForestModel> fit_random_forest(const Dataset& train,
                                                     const ForestOptions& opt, std::uint64_t seed);

struct GbtOptions {
    std::size_t n_rounds = 100;
    double learning_rate = 0.1;
    std::size_t max_leaves = 31;
    std::size_t min_samples_leaf = 5;
    std::size_t max_bins = 255;
};

struct GbtModel final : Predictor {
    double base_score = 0.0;
    std::vector<RegressionTree> trees;  // leaf values carry the learning rate
    std::size_t n_features = 0;
    GbtOptions options;
    std::uint64_t seed = 0;

    double predict(std::span<const double> x) const override;
    std::size_t feature_count() const override { return n_features; }
    std::string kind() const override { return "gbt"; }
    Json to_json() const override;
};

std::unique_ptr<GbtModel> fit_gbt(const Dataset& train, const GbtOptions& opt, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Multilayer perceptron (one ReLU hidden layer, adaptive-moment training)

struct MlpOptions {
    std::size_t hidden = 100;
    double learning_rate = 1e-3;
    std::size_t batch_size = 32;
    std::size_t max_epochs = 300;
    double validation_fraction = 0.1;
    std::size_t patience = 20;
    bool zero_init_output = false;  // test hook
};

// Bare network over standardized inputs/targets. Exposed so tests can compare
// analytic gradients against finite differences.
class MlpNetwork {
public:
    MlpNetwork() = default;
    MlpNetwork(std::size_t inputs, std::size_t hidden);

    void init_random(Rng& rng, bool zero_output);

    std::size_t inputs() const { return inputs_; }
    std::size_t hidden() const { return hidden_; }
    std::size_t parameter_count() const;
    std::vector<double> parameters() const;
    void set_parameters(std::span<const double> theta);

    double forward_one(std::span<const double> x) const;

    // Mean squared error over the batch (rows of x, one target per row).
    double loss(const std::vector<std::vector<double>>& x, std::span<const double> y) const;
    double loss_and_gradient(const std::vector<std::vector<double>>& x, std::span<const double> y,
                             std::vector<double>& grad) const;

private:
    std::size_t inputs_ = 0;
    std::size_t hidden_ = 0;

public:
    // row-major weights; kept public for serialization
    std::vector<double> w1;  // hidden x inputs
    std::vector<double> b1;  // hidden
    std::vector<double> w2;  // hidden
    double b2 = 0.0;
};

struct MlpModel final : Predictor {
    MlpNetwork net;
    std::vector<double> x_mean, x_scale;
    double y_mean = 0.0, y_scale = 1.0;
    MlpOptions options;
    std::uint64_t seed = 0;
    std::size_t epochs_run = 0;

    double predict(std::span<const double> x) const override;
    std::size_t feature_count() const override { return x_mean.size(); }
    std::string kind() const override { return "mlp"; }
    Json to_json() const override;
};

std::unique_ptr<MlpModel> fit_mlp(const Dataset& train, const MlpOptions& opt, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Stacking (multiple regression over base-model predictions)

struct StackingModel final : Predictor {
    std::vector<std::shared_ptr<const Predictor>> bases;
    std::vector<double> weights;
    double intercept = 0.0;
    bool ridge_fallback = false;

    double predict(std::span<const double> x) const override;
    std::size_t feature_count() const override;
    std::string kind() const override { return "stacking"; }
    Json to_json() const override;
};

std::unique_ptr<StackingModel> fit_stacking(std::vector<std::shared_ptr<const Predictor>> bases,
                                            const Dataset& train);

}  // namespace pce

#endif
