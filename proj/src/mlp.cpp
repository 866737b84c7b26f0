#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "pce/models.hpp"

namespace pce {

MlpNetwork::MlpNetwork(std::size_t inputs, std::size_t hidden)
    : inputs_(inputs), hidden_(hidden) {
    w1.assign(hidden * inputs, 0.0);
    b1.assign(hidden, 0.0);
    w2.assign(hidden, 0.0);
    b2 = 0.0;
}

void MlpNetwork::init_random(Rng& rng, bool zero_output) {
    const double s1 = std::sqrt(2.0 / static_cast<double>(inputs_));
    for (auto& w : w1) w = rng.normal() * s1;
    std::fill(b1.begin(), b1.end(), 0.0);
    if (zero_output) {
        std::fill(w2.begin(), w2.end(), 0.0);
    } else {
        const double s2 = std::sqrt(1.0 / static_cast<double>(hidden_));
        for (auto& w : w2) w = rng.normal() * s2;
    }
    b2 = 0.0;
}

std::size_t MlpNetwork::parameter_count() const { return w1.size() + b1.size() + w2.size() + 1; }

std::vector<double> MlpNetwork::parameters() const {
    std::vector<double> theta;
    theta.reserve(parameter_count());
    theta.insert(theta.end(), w1.begin(), w1.end());
    theta.insert(theta.end(), b1.begin(), b1.end());
    theta.insert(theta.end(), w2.begin(), w2.end());
    theta.push_back(b2);
    return theta;
}

void MlpNetwork::set_parameters(std::span<const double> theta) {
    if (theta.size() != parameter_count())
        throw InvalidArgument("mlp parameter vector has wrong length");
    auto it = theta.begin();
    std::copy(it, it + static_cast<std::ptrdiff_t>(w1.size()), w1.begin());
    it += static_cast<std::ptrdiff_t>(w1.size());
    std::copy(it, it + static_cast<std::ptrdiff_t>(b1.size()), b1.begin());
    it += static_cast<std::ptrdiff_t>(b1.size());
    std::copy(it, it + static_cast<std::ptrdiff_t>(w2.size()), w2.begin());
    it += static_cast<std::ptrdiff_t>(w2.size());
    b2 = *it;
}

double MlpNetwork::forward_one(std::span<const double> x) const {
    double out = b2;
    for (std::size_t h = 0; h < hidden_; ++h) {
        double z = b1[h];
        const double* row = w1.data() + h * inputs_;
        for (std::size_t j = 0; j < inputs_; ++j) z += row[j] * x[j];
        if (z > 0.0) out += w2[h] * z;
    }
    return out;
}

namespace {

using MatrixRM = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct BatchGrad {
    MatrixRM w1;
    Eigen::VectorXd b1;
    Eigen::VectorXd w2;
    double b2 = 0.0;
};

double batch_loss(const MlpNetwork& net, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                  BatchGrad* grad) {
    const auto bsz = x.rows();
    Eigen::Map<const MatrixRM> w1(net.w1.data(), static_cast<Eigen::Index>(net.hidden()),
                                  static_cast<Eigen::Index>(net.inputs()));
    Eigen::Map<const Eigen::VectorXd> b1(net.b1.data(), static_cast<Eigen::Index>(net.hidden()));
    Eigen::Map<const Eigen::VectorXd> w2(net.w2.data(), static_cast<Eigen::Index>(net.hidden()));

    Eigen::MatrixXd z = x * w1.transpose();
    z.rowwise() += b1.transpose();
    Eigen::MatrixXd a = z.cwiseMax(0.0);
    Eigen::VectorXd pred = a * w2;
    pred.array() += net.b2;
    Eigen::VectorXd err = pred - y;
    const double loss = err.squaredNorm() / static_cast<double>(bsz);
    if (grad == nullptr) return loss;

    Eigen::VectorXd dpred = (2.0 / static_cast<double>(bsz)) * err;
    grad->b2 = dpred.sum();
    grad->w2 = a.transpose() * dpred;
    Eigen::MatrixXd dz = dpred * w2.transpose();
    dz = dz.cwiseProduct((z.array() > 0.0).cast<double>().matrix());
    grad->w1 = dz.transpose() * x;
    grad->b1 = dz.colwise().sum();
    return loss;
}

Eigen::MatrixXd to_matrix(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) throw InvalidArgument("empty batch");
    Eigen::MatrixXd x(rows.size(), rows[0].size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows[0].size()) throw InvalidArgument("ragged batch");
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
    return x;
}

}  // namespace

double MlpNetwork::loss(const std::vector<std::vector<double>>& x, std::span<const double> y) const {
    Eigen::MatrixXd xm = to_matrix(x);
    Eigen::VectorXd ym = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
    return batch_loss(*this, xm, ym, nullptr);
}

double MlpNetwork::loss_and_gradient(const std::vector<std::vector<double>>& x,
                                     std::span<const double> y, std::vector<double>& grad) const {
    Eigen::MatrixXd xm = to_matrix(x);
    Eigen::VectorXd ym = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
    BatchGrad g;
    const double loss = batch_loss(*this, xm, ym, &g);
    grad.clear();
    grad.reserve(parameter_count());
    grad.insert(grad.end(), g.w1.data(), g.w1.data() + g.w1.size());
    grad.insert(grad.end(), g.b1.data(), g.b1.data() + g.b1.size());
    grad.insert(grad.end(), g.w2.data(), g.w2.data() + g.w2.size());
    grad.push_back(g.b2);
    return loss;
}

double MlpModel::predict(std::span<const double> x) const {
    check_input(x);
    std::vector<double> scaled(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) scaled[j] = (x[j] - x_mean[j]) / x_scale[j];
    return y_mean + y_scale * net.forward_one(scaled);
}

Json MlpModel::to_json() const {
    Json doc;
    doc["format"] = "pce-predictor";
    doc["version"] = 1;
    doc["kind"] = kind();
    doc["hyperparameters"] = {{"hidden", options.hidden},
                              {"learning_rate", options.learning_rate},
                              {"batch_size", options.batch_size},
                              {"max_epochs", options.max_epochs},
                              {"validation_fraction", options.validation_fraction},
                              {"patience", options.patience}};
    doc["seed"] = seed;
    doc["parameters"] = {{"inputs", net.inputs()}, {"hidden_units", net.hidden()},
                         {"w1", net.w1},           {"b1", net.b1},
                         {"w2", net.w2},           {"b2", net.b2},
                         {"x_mean", x_mean},       {"x_scale", x_scale},
                         {"y_mean", y_mean},       {"y_scale", y_scale},
                         {"epochs_run", epochs_run}};
    return doc;
}

std::unique_ptr<MlpModel> fit_mlp(const Dataset& train, const MlpOptions& opt, std::uint64_t seed) {
    if (train.n < 10) throw FitError("mlp: needs at least 10 rows");
    if (opt.hidden == 0 || opt.batch_size == 0 || opt.max_epochs == 0)
        throw FitError("mlp: hidden units, batch size and epochs must be positive");

    auto model = std::make_unique<MlpModel>();
    model->options = opt;
    model->seed = seed;
    model->x_mean.assign(train.r, 0.0);
    model->x_scale.assign(train.r, 1.0);
    for (std::size_t j = 0; j < train.r; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < train.n; ++i) mean += train.at(i, j);
        mean /= static_cast<double>(train.n);
        double var = 0.0;
        for (std::size_t i = 0; i < train.n; ++i) {
            const double d = train.at(i, j) - mean;
            var += d * d;
        }
        var /= static_cast<double>(train.n);
        model->x_mean[j] = mean;
        model->x_scale[j] = var > 0.0 ? std::sqrt(var) : 1.0;
    }
    {
        double mean = 0.0;
        for (double y : train.target) mean += y;
        mean /= static_cast<double>(train.n);
        double var = 0.0;
        for (double y : train.target) var += (y - mean) * (y - mean);
        var /= static_cast<double>(train.n);
        model->y_mean = mean;
        model->y_scale = var > 0.0 ? std::sqrt(var) : 1.0;
    }

    Eigen::MatrixXd x_all(train.n, train.r);
    Eigen::VectorXd y_all(train.n);
    for (std::size_t i = 0; i < train.n; ++i) {
        for (std::size_t j = 0; j < train.r; ++j)
            x_all(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                (train.at(i, j) - model->x_mean[j]) / model->x_scale[j];
        y_all(static_cast<Eigen::Index>(i)) = (train.target[i] - model->y_mean) / model->y_scale;
    }

    Rng rng(mix_seed(seed, {0x6d6c70ULL}));  // "mlp"
    model->net = MlpNetwork(train.r, opt.hidden);
    model->net.init_random(rng, opt.zero_init_output);

    std::vector<std::size_t> order(train.n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order);
    std::size_t n_val = 0;
    if (opt.validation_fraction > 0.0) {
        n_val = static_cast<std::size_t>(
            std::llround(opt.validation_fraction * static_cast<double>(train.n)));
        n_val = std::min(std::max<std::size_t>(n_val, 1), train.n - 1);
    }
    std::vector<std::size_t> val_idx(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
    std::vector<std::size_t> fit_idx(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());

    Eigen::MatrixXd x_val(n_val, train.r);
    Eigen::VectorXd y_val(n_val);
    for (std::size_t i = 0; i < n_val; ++i) {
        x_val.row(static_cast<Eigen::Index>(i)) = x_all.row(static_cast<Eigen::Index>(val_idx[i]));
        y_val(static_cast<Eigen::Index>(i)) = y_all(static_cast<Eigen::Index>(val_idx[i]));
    }

    const std::size_t n_params = model->net.parameter_count();
    std::vector<double> theta = model->net.parameters();
    std::vector<double> m(n_params, 0.0), v(n_params, 0.0), flat_grad(n_params, 0.0);
    double best_val = std::numeric_limits<double>::infinity();
    std::vector<double> best_theta = theta;
    std::size_t stale_epochs = 0;
    std::size_t adam_t = 0;
    const double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;

    Eigen::MatrixXd x_batch;
    Eigen::VectorXd y_batch;
    for (std::size_t epoch = 0; epoch < opt.max_epochs; ++epoch) {
        rng.shuffle(fit_idx);
        for (std::size_t start = 0; start < fit_idx.size(); start += opt.batch_size) {
            const std::size_t bsz = std::min(opt.batch_size, fit_idx.size() - start);
            x_batch.resize(static_cast<Eigen::Index>(bsz), static_cast<Eigen::Index>(train.r));
            y_batch.resize(static_cast<Eigen::Index>(bsz));
            for (std::size_t i = 0; i < bsz; ++i) {
                x_batch.row(static_cast<Eigen::Index>(i)) =
                    x_all.row(static_cast<Eigen::Index>(fit_idx[start + i]));
                y_batch(static_cast<Eigen::Index>(i)) =
                    y_all(static_cast<Eigen::Index>(fit_idx[start + i]));
            }
            BatchGrad g;
            const double loss = batch_loss(model->net, x_batch, y_batch, &g);
            if (!std::isfinite(loss)) {
                std::ostringstream msg;
                msg << "mlp: non-finite loss at epoch " << epoch;
                throw FitError(msg.str());
            }
            std::size_t off = 0;
            auto copy_block = [&](const double* p, std::size_t len) {
                std::copy(p, p + len, flat_grad.begin() + static_cast<std::ptrdiff_t>(off));
                off += len;
            };
            copy_block(g.w1.data(), static_cast<std::size_t>(g.w1.size()));
            copy_block(g.b1.data(), static_cast<std::size_t>(g.b1.size()));
            copy_block(g.w2.data(), static_cast<std::size_t>(g.w2.size()));
            flat_grad[off] = g.b2;

            ++adam_t;
            const double c1 = 1.0 - std::pow(beta1, static_cast<double>(adam_t));
            const double c2 = 1.0 - std::pow(beta2, static_cast<double>(adam_t));
            for (std::size_t k = 0; k < n_params; ++k) {
                m[k] = beta1 * m[k] + (1.0 - beta1) * flat_grad[k];
                v[k] = beta2 * v[k] + (1.0 - beta2) * flat_grad[k] * flat_grad[k];
                theta[k] -= opt.learning_rate * (m[k] / c1) / (std::sqrt(v[k] / c2) + adam_eps);
            }
            model->net.set_parameters(theta);
        }
        model->epochs_run = epoch + 1;

        if (n_val > 0) {
            const double val_loss = batch_loss(model->net, x_val, y_val, nullptr);
            if (!std::isfinite(val_loss)) {
                std::ostringstream msg;
                msg << "mlp: non-finite validation loss at epoch " << epoch;
                throw FitError(msg.str());
            }
            if (val_loss < best_val) {
                best_val = val_loss;
                best_theta = theta;
                stale_epochs = 0;
            } else if (++stale_epochs >= opt.patience) {
                break;
            }
        }
    }
    if (n_val > 0) model->net.set_parameters(best_theta);
    return model;
}

namespace detail {

std::unique_ptr<Predictor> mlp_from_json(const Json& doc) {
    auto model = std::make_unique<MlpModel>();
    const Json& h = doc.at("hyperparameters");
    model->options.hidden = h.at("hidden").get<std::size_t>();
    model->options.learning_rate = h.at("learning_rate").get<double>();
    model->options.batch_size = h.at("batch_size").get<std::size_t>();
    model->options.max_epochs = h.at("max_epochs").get<std::size_t>();
    model->options.validation_fraction = h.at("validation_fraction").get<double>();
    model->options.patience = h.at("patience").get<std::size_t>();
    model->seed = doc.at("seed").get<std::uint64_t>();
    const Json& p = doc.at("parameters");
    model->net = MlpNetwork(p.at("inputs").get<std::size_t>(), p.at("hidden_units").get<std::size_t>());
    model->net.w1 = p.at("w1").get<std::vector<double>>();
    model->net.b1 = p.at("b1").get<std::vector<double>>();
    model->net.w2 = p.at("w2").get<std::vector<double>>();
    model->net.b2 = p.at("b2").get<double>();
    model->x_mean = p.at("x_mean").get<std::vector<double>>();
    model->x_scale = p.at("x_scale").get<std::vector<double>>();
    model->y_mean = p.at("y_mean").get<double>();
    model->y_scale = p.at("y_scale").get<double>();
    model->epochs_run = p.at("epochs_run").get<std::size_t>();
    return model;
}

}  // namespace detail

}  // namespace pce
