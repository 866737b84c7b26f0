#include "pce/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "pce/csv.hpp"
#include "pce/rng.hpp"

namespace pce {

void Dataset::validate() const {
    if (n == 0) throw InvalidArgument("dataset has no rows");
    if (r == 0) throw InvalidArgument("dataset has no feature columns");
    if (features.size() != n * r) throw InvalidArgument("feature buffer size mismatch");
    if (target.size() != n) throw InvalidArgument("target length mismatch");
    if (feature_names.size() != r || feature_kinds.size() != r)
        throw InvalidArgument("feature metadata length mismatch");
    std::set<std::string> names(feature_names.begin(), feature_names.end());
    names.insert(target_name);
    if (names.size() != r + 1) throw InvalidArgument("column names are not unique");
    for (std::size_t j = 0; j < r; ++j) {
        if (feature_kinds[j] != FeatureKind::binary01) continue;
        for (std::size_t i = 0; i < n; ++i) {
            const double v = at(i, j);
            if (v < 0.0 || v > 1.0) {
                std::ostringstream msg;
                msg << "binary01 column '" << feature_names[j] << "' holds out-of-range value "
                    << v << " at row " << i;
                throw InvalidArgument(msg.str());
            }
        }
    }
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
    Dataset out;
    out.feature_names = feature_names;
    out.feature_kinds = feature_kinds;
    out.target_name = target_name;
    out.n = rows.size();
    out.r = r;
    out.features.reserve(rows.size() * r);
    out.target.reserve(rows.size());
    for (std::size_t i : rows) {
        auto src = row(i);
        out.features.insert(out.features.end(), src.begin(), src.end());
        out.target.push_back(target[i]);
    }
    return out;
}

double case1_truth(std::span<const double> x) {
    const double step = x[0] > 0.0 ? 5.0 : -5.0;
    return 2.0 * x[0] - 3.0 * x[1] + 0.5 * x[2] + 1.5 * x[0] * x[1] - 2.0 * x[2] * x[3] +
           std::sin(x[3]) * x[4] + step;
}

double case2_truth(std::span<const double> x) {
    const double pi = 3.14159265358979323846;
    return std::sin(pi * x[0] * x[1]) + std::sin(pi * x[2] * x[3]) + x[4] * x[4] -
           0.5 * x[0] * x[2] * x[2] + 0.7 * x[1] * x[3] * x[4];
}

namespace {

Dataset generate_uniform5(std::size_t n, std::uint64_t seed, bool noise_free,
                          double (*truth)(std::span<const double>)) {
    if (n == 0) throw InvalidArgument("sample count must be positive");
    Dataset d;
    d.feature_names = {"x1", "x2", "x3", "x4", "x5"};
    d.feature_kinds.assign(5, FeatureKind::continuous);
    d.n = n;
    d.r = 5;
    d.features.resize(n * 5);
    d.target.resize(n);
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        double* x = d.features.data() + i * 5;
        for (int j = 0; j < 5; ++j) x[j] = rng.uniform(-10.0, 10.0);
        const double eps = rng.normal();
        d.target[i] = truth({x, 5}) + (noise_free ? 0.0 : eps);
    }
    return d;
}

// Planted survey-surrogate coefficients. These are documented constants, not
// estimates of any real survey: each term is centered so the expected score is
// exactly 50, and the magnitudes put the score's standard deviation near 10.
constexpr double kSurveyBeta[19] = {2.8, 1.7, 3.1, 1.4, 2.1, 1.1, 1.4, 4.2, 0.8, 0.7,
                                    2.5, 1.7, 2.8, 4.5, 1.0, 1.3, 3.9, 4.2, 1.5};
constexpr double kSurveySexCoef = 1.5;
constexpr double kSurveyAgeCoef = 0.8;
constexpr double kSurveyInterT8T14 = 2.0;
constexpr double kSurveyInterT17T18 = 1.6;
constexpr double kSurveyNoiseSd = 8.0;

double survey_prob(std::size_t k) {  // k is 0-based T index
    return 0.35 + 0.15 * static_cast<double>(k % 3);
}

}  // namespace

double survey_truth(std::span<const double> x) {
    // layout: sex, age, T1..T19
    double score = 50.0;
    score += kSurveySexCoef * (x[0] - 0.5);
    score += kSurveyAgeCoef * (x[1] - 16.5);
    for (std::size_t k = 0; k < 19; ++k) score += kSurveyBeta[k] * (x[2 + k] - survey_prob(k));
    score += kSurveyInterT8T14 * (x[2 + 7] * x[2 + 13] - survey_prob(7) * survey_prob(13));
    score += kSurveyInterT17T18 * (x[2 + 16] * x[2 + 17] - survey_prob(16) * survey_prob(17));
    return score;
}

Dataset generate_case1(std::size_t n, std::uint64_t seed, bool noise_free) {
    return generate_uniform5(n, seed, noise_free, &case1_truth);
}

Dataset generate_case2(std::size_t n, std::uint64_t seed, bool noise_free) {
    return generate_uniform5(n, seed, noise_free, &case2_truth);
}

Dataset generate_survey_surrogate(std::size_t n, std::uint64_t seed, bool noise_free) {
    if (n == 0) throw InvalidArgument("sample count must be positive");
    Dataset d;
    d.feature_names = {"sex", "age"};
    for (int k = 1; k <= 19; ++k) d.feature_names.push_back("T" + std::to_string(k));
    d.feature_kinds.assign(21, FeatureKind::binary01);
    d.feature_kinds[1] = FeatureKind::continuous;  // age
    d.target_name = "score";
    d.n = n;
    d.r = 21;
    d.features.resize(n * 21);
    d.target.resize(n);
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        double* x = d.features.data() + i * 21;
        x[0] = rng.uniform01() < 0.5 ? 0.0 : 1.0;
        x[1] = 15.0 + static_cast<double>(rng.below(4));
        for (std::size_t k = 0; k < 19; ++k)
            x[2 + k] = rng.uniform01() < survey_prob(k) ? 1.0 : 0.0;
        const double eps = rng.normal() * kSurveyNoiseSd;
        d.target[i] = survey_truth({x, 21}) + (noise_free ? 0.0 : eps);
    }
    return d;
}

Dataset ingest_csv(const std::string& path, const std::string& target_column,
                   const std::map<std::string, FeatureKind>& kind_overrides) {
    CsvTable table = read_numeric_csv(path);
    auto it = std::find(table.header.begin(), table.header.end(), target_column);
    if (it == table.header.end())
        throw ParseError("target column '" + target_column + "' not found in header of " + path);
    const std::size_t target_idx = static_cast<std::size_t>(it - table.header.begin());

    Dataset d;
    d.target_name = target_column;
    d.n = table.rows.size();
    d.r = table.header.size() - 1;
    if (d.r == 0) throw ParseError("no feature columns besides target in " + path);
    for (std::size_t j = 0; j < table.header.size(); ++j)
        if (j != target_idx) d.feature_names.push_back(table.header[j]);

    d.features.resize(d.n * d.r);
    d.target.resize(d.n);
    for (std::size_t i = 0; i < d.n; ++i) {
        std::size_t out_j = 0;
        for (std::size_t j = 0; j < table.header.size(); ++j) {
            if (j == target_idx) {
                d.target[i] = table.rows[i][j];
            } else {
                d.features[i * d.r + out_j++] = table.rows[i][j];
            }
        }
    }

    d.feature_kinds.resize(d.r);
    for (std::size_t j = 0; j < d.r; ++j) {
        bool binary = true;
        for (std::size_t i = 0; i < d.n && binary; ++i) {
            const double v = d.at(i, j);
            binary = (v == 0.0 || v == 1.0);
        }
        d.feature_kinds[j] = binary ? FeatureKind::binary01 : FeatureKind::continuous;
    }
    for (const auto& [name, kind] : kind_overrides) {
        auto fit = std::find(d.feature_names.begin(), d.feature_names.end(), name);
        if (fit == d.feature_names.end())
            throw InvalidArgument("kind override names unknown column '" + name + "'");
        d.feature_kinds[static_cast<std::size_t>(fit - d.feature_names.begin())] = kind;
    }
    d.validate();
    return d;
}

void export_csv(const Dataset& d, const std::string& path) {
    std::vector<std::string> header = d.feature_names;
    header.push_back(d.target_name);
    std::vector<std::vector<std::string>> rows(d.n);
    for (std::size_t i = 0; i < d.n; ++i) {
        rows[i].reserve(d.r + 1);
        for (std::size_t j = 0; j < d.r; ++j) rows[i].push_back(format_double(d.at(i, j)));
        rows[i].push_back(format_double(d.target[i]));
    }
    write_csv(path, header, rows);
}

std::vector<SplitIndices> split_indices(std::size_t n, const SplitPlan& plan) {
    if (plan.n_repeats == 0) throw InvalidArgument("n_repeats must be >= 1");
    if (!(plan.train_fraction > 0.0 && plan.train_fraction < 1.0))
        throw InvalidArgument("train_fraction must lie in (0, 1)");
    const auto train_size =
        static_cast<std::size_t>(std::llround(plan.train_fraction * static_cast<double>(n)));
    if (train_size == 0 || train_size >= n)
        throw InvalidArgument("dataset too small: split would leave an empty train or test set");

    std::vector<SplitIndices> out;
    out.reserve(plan.n_repeats);
    Rng rng(mix_seed(plan.seed, {0x73706c6974ULL}));  // "split"
    std::vector<std::size_t> indices(n);
    for (std::size_t rep = 0; rep < plan.n_repeats; ++rep) {
        std::iota(indices.begin(), indices.end(), std::size_t{0});
        rng.shuffle(indices);
        SplitIndices s;
        s.train.assign(indices.begin(), indices.begin() + static_cast<std::ptrdiff_t>(train_size));
        s.test.assign(indices.begin() + static_cast<std::ptrdiff_t>(train_size), indices.end());
        std::sort(s.train.begin(), s.train.end());
        std::sort(s.test.begin(), s.test.end());
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<std::pair<Dataset, Dataset>> repeated_splits(const Dataset& d, const SplitPlan& plan) {
    auto idx = split_indices(d.n, plan);
    std::vector<std::pair<Dataset, Dataset>> out;
    out.reserve(idx.size());
    for (const auto& s : idx) out.emplace_back(d.subset(s.train), d.subset(s.test));
    return out;
}

namespace {

ColumnStats column_stats(const std::string& name, std::span<const double> values) {
    ColumnStats c;
    c.name = name;
    c.min = values[0];
    c.max = values[0];
    double sum = 0.0;
    for (double v : values) {
        sum += v;
        c.min = std::min(c.min, v);
        c.max = std::max(c.max, v);
    }
    c.mean = sum / static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - c.mean) * (v - c.mean);
    c.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
    return c;
}

}  // namespace

DescriptiveStats describe(const Dataset& d) {
    if (d.n < 2) throw InvalidArgument("describe needs at least 2 rows");
    DescriptiveStats stats;
    std::vector<double> col(d.n);
    for (std::size_t j = 0; j < d.r; ++j) {
        for (std::size_t i = 0; i < d.n; ++i) col[i] = d.at(i, j);
        stats.columns.push_back(column_stats(d.feature_names[j], col));
    }
    stats.columns.push_back(column_stats(d.target_name, d.target));
    return stats;
}

void write_describe_csv(const DescriptiveStats& stats, const std::string& path) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(stats.columns.size());
    for (const auto& c : stats.columns) {
        rows.push_back({c.name, format_double(c.mean), format_double(c.stddev),
                        format_double(c.min), format_double(c.max)});
    }
    write_csv(path, {"name", "mean", "std", "min", "max"}, rows);
}

}  // namespace pce
