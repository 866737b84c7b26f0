#include <algorithm>
#include <cmath>
#include <numeric>

#include "pce/models.hpp"

namespace pce {

double RegressionTree::predict(std::span<const double> x) const {
    int idx = 0;
    while (nodes[static_cast<std::size_t>(idx)].feature >= 0) {
        const TreeNode& n = nodes[static_cast<std::size_t>(idx)];
        idx = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(idx)].value;
}

namespace {

Json tree_to_json(const RegressionTree& tree) {
    Json nodes = Json::array();
    for (const TreeNode& n : tree.nodes)
        nodes.push_back(Json::array({n.feature, n.threshold, n.left, n.right, n.value}));
    return nodes;
}

RegressionTree tree_from_json(const Json& doc) {
    RegressionTree tree;
    for (const auto& item : doc) {
        TreeNode n;
        n.feature = item.at(0).get<int>();
        n.threshold = item.at(1).get<double>();
        n.left = item.at(2).get<int>();
        n.right = item.at(3).get<int>();
        n.value = item.at(4).get<double>();
        tree.nodes.push_back(n);
    }
    return tree;
}

struct ExactSplit {
    bool found = false;
    std::size_t feature = 0;
    double threshold = 0.0;
};

// Variance-reduction split search over all features; ties resolved toward the
// lowest feature index, then the leftmost threshold.
ExactSplit best_exact_split(const Dataset& d, const std::vector<std::size_t>& rows,
                            const CartOptions& opt, double parent_score) {
    ExactSplit best;
    double best_score = parent_score + 1e-12 * (1.0 + std::abs(parent_score));
    const std::size_t k = rows.size();
    std::vector<std::pair<double, double>> vy(k);  // (feature value, target)
    for (std::size_t j = 0; j < d.r; ++j) {
        for (std::size_t i = 0; i < k; ++i) vy[i] = {d.at(rows[i], j), d.target[rows[i]]};
        std::sort(vy.begin(), vy.end());
        double total = 0.0;
        for (const auto& p : vy) total += p.second;
        double sum_left = 0.0;
        for (std::size_t i = 1; i < k; ++i) {
            sum_left += vy[i - 1].second;
            if (!(vy[i - 1].first < vy[i].first)) continue;
            if (i < opt.min_samples_leaf || k - i < opt.min_samples_leaf) continue;
            const double nl = static_cast<double>(i);
            const double nr = static_cast<double>(k - i);
            const double sum_right = total - sum_left;
            const double score = sum_left * sum_left / nl + sum_right * sum_right / nr;
            if (score > best_score) {
                best_score = score;
                best.found = true;
                best.feature = j;
                best.threshold = 0.5 * (vy[i - 1].first + vy[i].first);
            }
        }
    }
    return best;
}

}  // namespace

RegressionTree fit_cart(const Dataset& train, std::span<const std::size_t> rows,
                        const CartOptions& opt) {
    if (rows.empty()) throw FitError("cart: empty training data");
    RegressionTree tree;

    struct Task {
        std::vector<std::size_t> rows;
        int node_index;
    };
    std::vector<Task> stack;
    tree.nodes.emplace_back();
    stack.push_back({std::vector<std::size_t>(rows.begin(), rows.end()), 0});

    while (!stack.empty()) {
        Task task = std::move(stack.back());
        stack.pop_back();
        const std::size_t k = task.rows.size();
        double sum = 0.0;
        for (std::size_t i : task.rows) sum += train.target[i];
        const double mean = sum / static_cast<double>(k);
        TreeNode& node = tree.nodes[static_cast<std::size_t>(task.node_index)];
        node.value = mean;

        if (k < opt.min_samples_split) continue;
        const double parent_score = sum * sum / static_cast<double>(k);
        ExactSplit split = best_exact_split(train, task.rows, opt, parent_score);
        if (!split.found) continue;

        Task left, right;
        for (std::size_t i : task.rows) {
            (train.at(i, split.feature) <= split.threshold ? left.rows : right.rows).push_back(i);
        }
        const int left_index = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes.emplace_back();
        TreeNode& parent = tree.nodes[static_cast<std::size_t>(task.node_index)];
        parent.feature = static_cast<int>(split.feature);
        parent.threshold = split.threshold;
        parent.left = left_index;
        parent.right = left_index + 1;
        left.node_index = left_index;
        right.node_index = left_index + 1;
        stack.push_back(std::move(right));
        stack.push_back(std::move(left));
    }
    return tree;
}

// ---------------------------------------------------------------------------
// Random forest

double RandomForestModel::predict(std::span<const double> x) const {
    check_input(x);
    double acc = 0.0;
    for (const auto& t : trees) acc += t.predict(x);
    return acc / static_cast<double>(trees.size());
}

Json RandomForestModel::to_json() const {
    Json doc;
    doc["format"] = "pce-predictor";
    doc["version"] = 1;
    doc["kind"] = kind();
    doc["hyperparameters"] = {{"n_trees", options.n_trees},
                              {"min_samples_split", options.min_samples_split},
                              {"bootstrap", options.bootstrap}};
    doc["seed"] = seed;
    doc["parameters"] = Json::object();
    doc["parameters"]["n_features"] = n_features;
    Json arr = Json::array();
    for (const auto& t : trees) arr.push_back(tree_to_json(t));
    doc["parameters"]["trees"] = std::move(arr);
    return doc;
}

std::unique_ptr<RandomForestModel> fit_random_forest(const Dataset& train,
                                                     const ForestOptions& opt,
                                                     std::uint64_t seed) {
    if (train.n == 0) throw FitError("random forest: empty training data");
    if (train.n < 5) throw FitError("random forest: needs at least 5 rows");
    if (opt.n_trees == 0) throw FitError("random forest: n_trees must be positive");
    auto model = std::make_unique<RandomForestModel>();
    model->n_features = train.r;
    model->options = opt;
    model->seed = seed;
    CartOptions cart{opt.min_samples_split, 1};
    std::vector<std::size_t> rows(train.n);
    for (std::size_t t = 0; t < opt.n_trees; ++t) {
        if (opt.bootstrap) {
            Rng rng(mix_seed(seed, {0x666f72657374ULL, t}));  // "forest"
            for (auto& idx : rows) idx = static_cast<std::size_t>(rng.below(train.n));
        } else {
            std::iota(rows.begin(), rows.end(), std::size_t{0});
        }
        model->trees.push_back(fit_cart(train, rows, cart));
    }
    return model;
}

// ---------------------------------------------------------------------------
// Gradient boosting with histogram split search and leaf-wise growth

namespace {

struct BinnedData {
    std::size_t n = 0, r = 0;
    std::vector<std::uint16_t> bins;                 // row-major n*r
    std::vector<std::vector<double>> edges;          // per feature, ascending
    std::size_t bin_count(std::size_t j) const { return edges[j].size() + 1; }
    std::uint16_t at(std::size_t i, std::size_t j) const { return bins[i * r + j]; }
};

BinnedData bin_features(const Dataset& d, std::size_t max_bins) {
    BinnedData b;
    b.n = d.n;
    b.r = d.r;
    b.bins.resize(d.n * d.r);
    b.edges.resize(d.r);
    std::vector<double> vals(d.n);
    for (std::size_t j = 0; j < d.r; ++j) {
        for (std::size_t i = 0; i < d.n; ++i) vals[i] = d.at(i, j);
        std::sort(vals.begin(), vals.end());
        std::vector<double> distinct;
        for (double v : vals)
            if (distinct.empty() || distinct.back() < v) distinct.push_back(v);
        auto& edges = b.edges[j];
        if (distinct.size() <= max_bins) {
            for (std::size_t i = 0; i + 1 < distinct.size(); ++i)
                edges.push_back(0.5 * (distinct[i] + distinct[i + 1]));
        } else {
            for (std::size_t q = 1; q < max_bins; ++q) {
                const std::size_t pos = q * d.n / max_bins;
                const double e = 0.5 * (vals[pos - 1] + vals[pos]);
                if (edges.empty() || edges.back() < e) edges.push_back(e);
            }
        }
        for (std::size_t i = 0; i < d.n; ++i) {
            const double x = d.at(i, j);
            const auto it = std::lower_bound(edges.begin(), edges.end(), x);
            b.bins[i * d.r + j] = static_cast<std::uint16_t>(it - edges.begin());
        }
    }
    return b;
}

struct HistSplit {
    bool found = false;
    double score = 0.0;
    std::size_t feature = 0;
    std::size_t bin = 0;  // left child takes bins <= bin
};

HistSplit best_hist_split(const BinnedData& binned, const std::vector<std::size_t>& rows,
                          const std::vector<double>& resid, double sum, std::size_t msl,
                          std::vector<double>& hist_sum, std::vector<std::size_t>& hist_cnt) {
    HistSplit best;
    const std::size_t k = rows.size();
    const double parent_score = sum * sum / static_cast<double>(k);
    double best_score = parent_score + 1e-12 * (1.0 + std::abs(parent_score));
    for (std::size_t j = 0; j < binned.r; ++j) {
        const std::size_t nb = binned.bin_count(j);
        if (nb < 2) continue;
        std::fill(hist_sum.begin(), hist_sum.begin() + static_cast<std::ptrdiff_t>(nb), 0.0);
        std::fill(hist_cnt.begin(), hist_cnt.begin() + static_cast<std::ptrdiff_t>(nb),
                  std::size_t{0});
        for (std::size_t i : rows) {
            const std::uint16_t bin = binned.at(i, j);
            hist_sum[bin] += resid[i];
            hist_cnt[bin] += 1;
        }
        double sum_left = 0.0;
        std::size_t cnt_left = 0;
        for (std::size_t bin = 0; bin + 1 < nb; ++bin) {
            sum_left += hist_sum[bin];
            cnt_left += hist_cnt[bin];
            if (cnt_left < msl) continue;
            const std::size_t cnt_right = k - cnt_left;
            if (cnt_right < msl) break;
            const double sum_right = sum - sum_left;
            const double score = sum_left * sum_left / static_cast<double>(cnt_left) +
                                 sum_right * sum_right / static_cast<double>(cnt_right);
            if (score > best_score) {
                best_score = score;
                best.found = true;
                best.score = score;
                best.feature = j;
                best.bin = bin;
            }
        }
    }
    return best;
}

struct GbtLeaf {
    std::vector<std::size_t> rows;
    double sum = 0.0;
    int node_index = 0;
    int seq = 0;
    HistSplit split;
    double gain = 0.0;
};

}  // namespace

double GbtModel::predict(std::span<const double> x) const {
    check_input(x);
    double acc = base_score;
    for (const auto& t : trees) acc += t.predict(x);
    return acc;
}

Json GbtModel::to_json() const {
    Json doc;
    doc["format"] = "pce-predictor";
    doc["version"] = 1;
    doc["kind"] = kind();
    doc["hyperparameters"] = {{"n_rounds", options.n_rounds},
                              {"learning_rate", options.learning_rate},
                              {"max_leaves", options.max_leaves},
                              {"min_samples_leaf", options.min_samples_leaf},
                              {"max_bins", options.max_bins}};
    doc["seed"] = seed;
    doc["parameters"] = Json::object();
    doc["parameters"]["n_features"] = n_features;
    doc["parameters"]["base_score"] = base_score;
    Json arr = Json::array();
    for (const auto& t : trees) arr.push_back(tree_to_json(t));
    doc["parameters"]["trees"] = std::move(arr);
    return doc;
}

std::unique_ptr<GbtModel> fit_gbt(const Dataset& train, const GbtOptions& opt,
                                  std::uint64_t seed) {
    if (train.n == 0) throw FitError("gbt: empty training data");
    if (train.n < 5) throw FitError("gbt: needs at least 5 rows");
    auto model = std::make_unique<GbtModel>();
    model->n_features = train.r;
    model->options = opt;
    model->seed = seed;

    double mean = 0.0;
    for (double y : train.target) mean += y;
    mean /= static_cast<double>(train.n);
    model->base_score = mean;
    if (opt.n_rounds == 0) return model;

    const BinnedData binned = bin_features(train, opt.max_bins);
    std::vector<double> resid(train.n);
    for (std::size_t i = 0; i < train.n; ++i) resid[i] = train.target[i] - mean;

    std::size_t max_nb = 2;
    for (std::size_t j = 0; j < train.r; ++j) max_nb = std::max(max_nb, binned.bin_count(j));
    std::vector<double> hist_sum(max_nb);
    std::vector<std::size_t> hist_cnt(max_nb);

    for (std::size_t round = 0; round < opt.n_rounds; ++round) {
        RegressionTree tree;
        tree.nodes.emplace_back();
        std::vector<GbtLeaf> leaves(1);
        auto& root = leaves[0];
        root.rows.resize(train.n);
        std::iota(root.rows.begin(), root.rows.end(), std::size_t{0});
        for (double vv : resid) root.sum += vv;
        root.split = best_hist_split(binned, root.rows, resid, root.sum, opt.min_samples_leaf,
                                     hist_sum, hist_cnt);
        root.gain = root.split.found
                        ? root.split.score - root.sum * root.sum / static_cast<double>(train.n)
                        : 0.0;
        int next_seq = 1;

        while (leaves.size() < opt.max_leaves) {
            std::size_t pick = leaves.size();
            for (std::size_t i = 0; i < leaves.size(); ++i) {
                if (!leaves[i].split.found) continue;
                if (pick == leaves.size() || leaves[i].gain > leaves[pick].gain ||
                    (leaves[i].gain == leaves[pick].gain && leaves[i].seq < leaves[pick].seq)) {
                    pick = i;
                }
            }
            if (pick == leaves.size()) break;

            GbtLeaf parent = std::move(leaves[pick]);
            GbtLeaf left, right;
            left.seq = next_seq++;
            right.seq = next_seq++;
            for (std::size_t i : parent.rows) {
                if (binned.at(i, parent.split.feature) <= parent.split.bin) {
                    left.rows.push_back(i);
                    left.sum += resid[i];
                } else {
                    right.rows.push_back(i);
                    right.sum += resid[i];
                }
            }
            const int left_index = static_cast<int>(tree.nodes.size());
            tree.nodes.emplace_back();
            tree.nodes.emplace_back();
            TreeNode& pnode = tree.nodes[static_cast<std::size_t>(parent.node_index)];
            pnode.feature = static_cast<int>(parent.split.feature);
            pnode.threshold = binned.edges[parent.split.feature][parent.split.bin];
            pnode.left = left_index;
            pnode.right = left_index + 1;
            left.node_index = left_index;
            right.node_index = left_index + 1;
            left.split = best_hist_split(binned, left.rows, resid, left.sum,
                                         opt.min_samples_leaf, hist_sum, hist_cnt);
            left.gain = left.split.found ? left.split.score - left.sum * left.sum /
                                                                 static_cast<double>(left.rows.size())
                                         : 0.0;
            right.split = best_hist_split(binned, right.rows, resid, right.sum,
                                          opt.min_samples_leaf, hist_sum, hist_cnt);
            right.gain = right.split.found
                             ? right.split.score -
                                   right.sum * right.sum / static_cast<double>(right.rows.size())
                             : 0.0;
            leaves[pick] = std::move(left);
            leaves.push_back(std::move(right));
        }

        for (const GbtLeaf& leaf : leaves) {
            const double value =
                opt.learning_rate * leaf.sum / static_cast<double>(leaf.rows.size());
            tree.nodes[static_cast<std::size_t>(leaf.node_index)].value = value;
            for (std::size_t i : leaf.rows) resid[i] -= value;
        }
        model->trees.push_back(std::move(tree));
    }
    return model;
}

namespace detail {

std::unique_ptr<Predictor> forest_from_json(const Json& doc) {
    auto model = std::make_unique<RandomForestModel>();
    const Json& h = doc.at("hyperparameters");
    model->options.n_trees = h.at("n_trees").get<std::size_t>();
    model->options.min_samples_split = h.at("min_samples_split").get<std::size_t>();
    model->options.bootstrap = h.at("bootstrap").get<bool>();
    model->seed = doc.at("seed").get<std::uint64_t>();
    const Json& p = doc.at("parameters");
    model->n_features = p.at("n_features").get<std::size_t>();
    for (const auto& t : p.at("trees")) model->trees.push_back(tree_from_json(t));
    return model;
}

std::unique_ptr<Predictor> gbt_from_json(const Json& doc) {
    auto model = std::make_unique<GbtModel>();
    const Json& h = doc.at("hyperparameters");
    model->options.n_rounds = h.at("n_rounds").get<std::size_t>();
    model->options.learning_rate = h.at("learning_rate").get<double>();
    model->options.max_leaves = h.at("max_leaves").get<std::size_t>();
    model->options.min_samples_leaf = h.at("min_samples_leaf").get<std::size_t>();
    model->options.max_bins = h.at("max_bins").get<std::size_t>();
    model->seed = doc.at("seed").get<std::uint64_t>();
    const Json& p = doc.at("parameters");
    model->n_features = p.at("n_features").get<std::size_t>();
    model->base_score = p.at("base_score").get<double>();
    for (const auto& t : p.at("trees")) model->trees.push_back(tree_from_json(t));
    return model;
}

}  // namespace detail

}  // namespace pce
