#include "pce/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "pce/csv.hpp"

namespace pce {

namespace {
constexpr double kRatioFloor = 1e-12;

double squared_euclid(std::span<const double> a, std::span<const double> b) {
    double sq = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double d = a[j] - b[j];
        sq += d * d;
    }
    return sq;
}
}  // namespace

double validity(const CESet& ces, std::size_t model_index) {
    if (ces.size() == 0) throw InvalidArgument("validity: empty explanation set");
    if (model_index >= ces.model_labels.size())
        throw InvalidArgument("validity: model index out of range");
    double acc = 0.0;
    for (std::size_t s = 0; s < ces.size(); ++s) {
        const double pred = ces.predictions[s][model_index];
        acc += ces.problem.target_mode == TargetMode::maximize
                   ? pred
                   : std::abs(ces.problem.target_value - pred);
    }
    return acc / static_cast<double>(ces.size());
}

double dissimilarity(const CESet& ces) {
    if (ces.size() == 0) throw InvalidArgument("dissimilarity: empty explanation set");
    double acc = 0.0;
    for (const auto& x : ces.explanations) acc += squared_euclid(x, ces.problem.base);
    return acc / static_cast<double>(ces.size());
}

double plausibility(const CESet& ces, const Dataset& train) {
    if (ces.size() == 0) throw InvalidArgument("plausibility: empty explanation set");
    if (train.n == 0) throw InvalidArgument("plausibility: empty training set");
    if (train.r != ces.problem.dimension())
        throw InvalidArgument("plausibility: training data dimension mismatch");
    double acc = 0.0;
    for (const auto& x : ces.explanations) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < train.n; ++i)
            best = std::min(best, squared_euclid(x, train.row(i)));
        acc += best;
    }
    return acc / static_cast<double>(ces.size());
}

double true_improvement_ratio(const CESet& ces, const TruthFn& truth, TirMode mode) {
    if (!truth)
        throw UnsupportedError(
            "true improvement ratio needs the noise-free true function; it is unavailable for "
            "real data");
    if (ces.size() == 0) throw InvalidArgument("true_improvement_ratio: empty explanation set");
    const double base_truth = truth(ces.problem.base);
    std::size_t improving = 0;
    for (std::size_t s = 0; s < ces.size(); ++s) {
        if (mode == TirMode::truth_vs_base) {
            if (truth(ces.explanations[s]) - base_truth > 0.0) ++improving;
        } else {
            double mean_pred = 0.0;
            for (std::size_t m : ces.objective_models) mean_pred += ces.predictions[s][m];
            mean_pred /= static_cast<double>(ces.objective_models.size());
            if (mean_pred - truth(ces.explanations[s]) > 0.0) ++improving;
        }
    }
    return static_cast<double>(improving) / static_cast<double>(ces.size());
}

MetricsReport compute_metrics(const CESet& ces, const Dataset& train, const TruthFn* truth,
                              TirMode mode) {
    MetricsReport rep;
    rep.s_effective = ces.size();
    for (std::size_t m : ces.objective_models) {
        rep.val_labels.push_back(ces.model_labels[m]);
        rep.val.push_back(validity(ces, m));
    }
    rep.ave_val = 0.0;
    for (double v : rep.val) rep.ave_val += v;
    rep.ave_val /= static_cast<double>(rep.val.size());
    rep.dissim = dissimilarity(ces);
    rep.plaus = plausibility(ces, train);
    if (truth != nullptr) rep.tir = true_improvement_ratio(ces, *truth, mode);
    if (rep.dissim >= kRatioFloor) rep.ratio_val_dissim = rep.ave_val / rep.dissim;
    if (rep.plaus >= kRatioFloor) rep.ratio_val_plaus = rep.ave_val / rep.plaus;
    return rep;
}

AggregateReport aggregate(std::span<const TaggedReport> reports) {
    if (reports.empty()) throw InvalidArgument("aggregate: no reports");

    AggregateReport out;
    std::vector<std::string> order;
    std::map<std::string, std::vector<const TaggedReport*>> cells;
    for (const auto& r : reports) {
        if (!cells.count(r.label)) order.push_back(r.label);
        cells[r.label].push_back(&r);
    }

    for (const auto& label : order) {
        const auto& cell = cells[label];
        if (cell.empty()) throw InvalidArgument("aggregate: empty cell '" + label + "'");
        AggregateRow row;
        row.method = cell.front()->method;
        row.label = label;
        row.n_cases = cell.size();
        row.val_labels = cell.front()->report.val_labels;
        row.val.assign(row.val_labels.size(), 0.0);
        double tir_sum = 0.0;
        std::size_t tir_count = 0;
        for (const TaggedReport* r : cell) {
            if (r->report.val_labels != row.val_labels)
                throw InvalidArgument("aggregate: cell '" + label +
                                      "' mixes different model sets");
            for (std::size_t k = 0; k < row.val.size(); ++k) row.val[k] += r->report.val[k];
            row.ave_val += r->report.ave_val;
            row.dissim += r->report.dissim;
            row.plaus += r->report.plaus;
            if (r->report.tir) {
                tir_sum += *r->report.tir;
                ++tir_count;
            }
        }
        const double b = static_cast<double>(cell.size());
        for (double& v : row.val) v /= b;
        row.ave_val /= b;
        row.dissim /= b;
        row.plaus /= b;
        if (tir_count == cell.size()) row.tir = tir_sum / b;
        // Ratios compare the averages, not the average of per-case ratios.
        if (row.dissim >= kRatioFloor) row.ratio_val_dissim = row.ave_val / row.dissim;
        if (row.plaus >= kRatioFloor) row.ratio_val_plaus = row.ave_val / row.plaus;

        for (const auto& l : row.val_labels) {
            if (std::find(out.model_columns.begin(), out.model_columns.end(), l) ==
                out.model_columns.end())
                out.model_columns.push_back(l);
        }
        out.rows.push_back(std::move(row));
    }

    // Top-3 annotations: lowest dissim/plaus, highest tir and both ratios.
    auto mark_top3 = [&](auto key, auto flag, bool lowest) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < out.rows.size(); ++i)
            if (key(out.rows[i]).has_value()) idx.push_back(i);
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            const double va = *key(out.rows[a]);
            const double vb = *key(out.rows[b]);
            if (va != vb) return lowest ? va < vb : va > vb;
            return a < b;
        });
        for (std::size_t i = 0; i < std::min<std::size_t>(3, idx.size()); ++i)
            flag(out.rows[idx[i]]) = true;
    };
    mark_top3([](const AggregateRow& r) { return std::optional<double>(r.dissim); },
              [](AggregateRow& r) -> bool& { return r.top3_dissim; }, true);
    mark_top3([](const AggregateRow& r) { return std::optional<double>(r.plaus); },
              [](AggregateRow& r) -> bool& { return r.top3_plaus; }, true);
    mark_top3([](const AggregateRow& r) { return r.tir; },
              [](AggregateRow& r) -> bool& { return r.top3_tir; }, false);
    mark_top3([](const AggregateRow& r) { return r.ratio_val_dissim; },
              [](AggregateRow& r) -> bool& { return r.top3_ratio_dissim; }, false);
    mark_top3([](const AggregateRow& r) { return r.ratio_val_plaus; },
              [](AggregateRow& r) -> bool& { return r.top3_ratio_plaus; }, false);
    return out;
}

namespace {

std::string opt_str(const std::optional<double>& v) {
    return v ? format_double(*v) : std::string{};
}

}  // namespace

std::string aggregate_csv_text(const AggregateReport& report) {
    std::vector<std::string> header = {"method", "label"};
    for (const auto& m : report.model_columns) header.push_back("val_" + m);
    for (const char* c : {"ave_val", "dissim", "plaus", "tir", "val_dissim_ratio",
                          "val_plaus_ratio", "n_cases", "top3_dissim", "top3_plaus", "top3_tir",
                          "top3_val_dissim", "top3_val_plaus"})
        header.push_back(c);

    std::vector<std::vector<std::string>> rows;
    for (const auto& r : report.rows) {
        std::vector<std::string> row = {r.method, r.label};
        for (const auto& col : report.model_columns) {
            auto it = std::find(r.val_labels.begin(), r.val_labels.end(), col);
            row.push_back(it == r.val_labels.end()
                              ? std::string{}
                              : format_double(r.val[static_cast<std::size_t>(
                                    it - r.val_labels.begin())]));
        }
        row.push_back(format_double(r.ave_val));
        row.push_back(format_double(r.dissim));
        row.push_back(format_double(r.plaus));
        row.push_back(opt_str(r.tir));
        row.push_back(opt_str(r.ratio_val_dissim));
        row.push_back(opt_str(r.ratio_val_plaus));
        row.push_back(std::to_string(r.n_cases));
        row.push_back(r.top3_dissim ? "1" : "0");
        row.push_back(r.top3_plaus ? "1" : "0");
        row.push_back(r.top3_tir ? "1" : "0");
        row.push_back(r.top3_ratio_dissim ? "1" : "0");
        row.push_back(r.top3_ratio_plaus ? "1" : "0");
        rows.push_back(std::move(row));
    }
    std::string text = join_csv_row(header) + "\n";
    for (const auto& row : rows) text += join_csv_row(row) + "\n";
    return text;
}

void write_aggregate_csv(const AggregateReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write file: " + path);
    out << aggregate_csv_text(report);
}

void write_aggregate_markdown(const AggregateReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write file: " + path);
    auto fmt = [](double v) {
        std::ostringstream ss;
        ss.precision(3);
        ss << std::fixed << v;
        return ss.str();
    };
    auto cell = [&](const std::optional<double>& v, bool bold) {
        if (!v) return std::string{"-"};
        std::string s = fmt(*v);
        return bold ? "**" + s + "**" : s;
    };

    out << "| method |";
    for (const auto& m : report.model_columns) out << " val " << m << " |";
    out << " ave val | dissim | plaus | TIR | val/dissim | val/plaus |\n";
    out << "|---|";
    for (std::size_t i = 0; i < report.model_columns.size() + 6; ++i) out << "---|";
    out << '\n';
    for (const auto& r : report.rows) {
        out << "| " << r.label << " |";
        for (const auto& col : report.model_columns) {
            auto it = std::find(r.val_labels.begin(), r.val_labels.end(), col);
            if (it == r.val_labels.end()) {
                out << " - |";
            } else {
                out << ' '
                    << fmt(r.val[static_cast<std::size_t>(it - r.val_labels.begin())]) << " |";
            }
        }
        out << ' ' << fmt(r.ave_val) << " |";
        out << ' ' << cell(r.dissim, r.top3_dissim) << " |";
        out << ' ' << cell(r.plaus, r.top3_plaus) << " |";
        out << ' ' << cell(r.tir, r.top3_tir) << " |";
        out << ' ' << cell(r.ratio_val_dissim, r.top3_ratio_dissim) << " |";
        out << ' ' << cell(r.ratio_val_plaus, r.top3_ratio_plaus) << " |\n";
    }
}

}  // namespace pce
