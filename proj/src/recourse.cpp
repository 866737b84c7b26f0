#include "pce/recourse.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "pce/csv.hpp"
#include "pce/pattern_search.hpp"
#include "pce/rng.hpp"

namespace pce {

double distance(std::span<const double> a, std::span<const double> b, DistanceKind kind) {
    if (a.size() != b.size()) throw InvalidArgument("distance: vectors differ in length");
    double sq = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double d = a[j] - b[j];
        sq += d * d;
    }
    return kind == DistanceKind::euclidean ? std::sqrt(sq) : sq;
}

void CEProblem::effective_intervals(std::vector<double>& lo, std::vector<double>& hi) const {
    lo = lower;
    hi = upper;
    for (std::size_t j = 0; j < dimension(); ++j) {
        switch (rules[j]) {
            case DirectionRule::free:
                break;
            case DirectionRule::nonincreasing:
                hi[j] = std::min(hi[j], base[j]);
                break;
            case DirectionRule::nondecreasing:
                lo[j] = std::max(lo[j], base[j]);
                break;
            case DirectionRule::fixed:
                lo[j] = base[j];
                hi[j] = base[j];
                break;
        }
        if (lo[j] > hi[j])
            throw InvalidArgument("inconsistent bounds/rules for feature '" + feature_names[j] +
                                  "'");
    }
}

CEProblem build_problem(std::span<const double> base, const Dataset& dataset, double C,
                        double lambda, const RuleSpec& rules, DistanceKind kind, TargetMode mode,
                        double target_value) {
    if (base.size() != dataset.r)
        throw InvalidArgument("build_problem: base dimension does not match dataset");
    if (!(C > 0.0)) throw InvalidArgument("build_problem: distance bound must be positive");
    if (lambda < 0.0) throw InvalidArgument("build_problem: lambda must be non-negative");

    CEProblem p;
    p.base.assign(base.begin(), base.end());
    p.target_mode = mode;
    p.target_value = target_value;
    p.distance_bound = C;
    p.lambda = lambda;
    p.distance_kind = kind;
    p.feature_names = dataset.feature_names;
    p.feature_kinds = dataset.feature_kinds;
    p.lower.assign(dataset.r, 0.0);
    p.upper.assign(dataset.r, 0.0);
    for (std::size_t j = 0; j < dataset.r; ++j) {
        double lo = dataset.at(0, j), hi = dataset.at(0, j);
        for (std::size_t i = 1; i < dataset.n; ++i) {
            lo = std::min(lo, dataset.at(i, j));
            hi = std::max(hi, dataset.at(i, j));
        }
        p.lower[j] = lo;
        p.upper[j] = hi;
        if (base[j] < lo || base[j] > hi) {
            p.lower[j] = std::min(lo, base[j]);
            p.upper[j] = std::max(hi, base[j]);
            p.warnings.push_back("base value outside data range for feature '" +
                                 dataset.feature_names[j] + "'; bounds extended");
        }
    }

    p.rules.assign(dataset.r, DirectionRule::free);
    if (rules.binary_policy != BinaryRulePolicy::none) {
        for (std::size_t j = 0; j < dataset.r; ++j) {
            if (dataset.feature_kinds[j] != FeatureKind::binary01) continue;
            const bool is_one = base[j] > 0.5;
            const bool literal = rules.binary_policy == BinaryRulePolicy::monotone_from_base;
            p.rules[j] = (is_one == literal) ? DirectionRule::nonincreasing
                                             : DirectionRule::nondecreasing;
        }
    }
    auto find_feature = [&](const std::string& name) {
        auto it = std::find(p.feature_names.begin(), p.feature_names.end(), name);
        if (it == p.feature_names.end())
            throw InvalidArgument("rule references unknown feature '" + name + "'");
        return static_cast<std::size_t>(it - p.feature_names.begin());
    };
    for (const auto& [name, rule] : rules.overrides) p.rules[find_feature(name)] = rule;
    for (const auto& name : rules.fixed_features)
        p.rules[find_feature(name)] = DirectionRule::fixed;
    return p;
}

namespace {

// Optimization happens over the coordinates the rules leave open; pinned
// coordinates stay at the base value.
struct FreeSpace {
    std::vector<std::size_t> free_idx;
    std::vector<double> lo, hi;        // per free coordinate
    std::vector<double> full_template;  // pinned values everywhere else

    std::size_t dim() const { return free_idx.size(); }

    std::vector<double> expand(std::span<const double> z) const {
        std::vector<double> x = full_template;
        for (std::size_t k = 0; k < free_idx.size(); ++k) x[free_idx[k]] = z[k];
        return x;
    }

    std::vector<double> restrict(std::span<const double> x) const {
        std::vector<double> z(free_idx.size());
        for (std::size_t k = 0; k < free_idx.size(); ++k) z[k] = x[free_idx[k]];
        return z;
    }
};

FreeSpace make_free_space(const CEProblem& p) {
    std::vector<double> lo, hi;
    p.effective_intervals(lo, hi);
    FreeSpace fs;
    fs.full_template = p.base;
    for (std::size_t j = 0; j < p.dimension(); ++j) {
        if (hi[j] - lo[j] > 0.0) {
            fs.free_idx.push_back(j);
            fs.lo.push_back(lo[j]);
            fs.hi.push_back(hi[j]);
        } else {
            fs.full_template[j] = lo[j];
        }
    }
    return fs;
}

double ball_radius_euclid(const CEProblem& p) {
    return p.distance_kind == DistanceKind::euclidean ? p.distance_bound
                                                      : std::sqrt(p.distance_bound);
}

void clip_to_box(std::vector<double>& z, const FreeSpace& fs) {
    for (std::size_t k = 0; k < z.size(); ++k)
        z[k] = std::min(std::max(z[k], fs.lo[k]), fs.hi[k]);
}

// Radial projection toward the base keeps the box because every effective
// interval contains the base coordinate.
void project_into_ball(std::vector<double>& z, std::span<const double> base_free, double radius) {
    double sq = 0.0;
    for (std::size_t k = 0; k < z.size(); ++k) {
        const double d = z[k] - base_free[k];
        sq += d * d;
    }
    const double norm = std::sqrt(sq);
    if (norm <= radius || norm == 0.0) return;
    const double scale = radius / norm;
    for (std::size_t k = 0; k < z.size(); ++k)
        z[k] = base_free[k] + (z[k] - base_free[k]) * scale;
}

std::vector<double> sample_in_ball(Rng& rng, const FreeSpace& fs,
                                   std::span<const double> base_free, double radius) {
    const std::size_t d = fs.dim();
    std::vector<double> dir(d);
    double norm = 0.0;
    for (auto& v : dir) {
        v = rng.normal();
        norm += v * v;
    }
    norm = std::sqrt(norm);
    const double rad = radius * std::pow(rng.uniform01(), 1.0 / static_cast<double>(d));
    std::vector<double> z(d);
    for (std::size_t k = 0; k < d; ++k)
        z[k] = base_free[k] + (norm > 0.0 ? dir[k] / norm * rad : 0.0);
    clip_to_box(z, fs);
    return z;
}

double equality_penalty(const CEProblem& p, std::span<const double> x) {
    double acc = 0.0;
    for (const auto& eq : p.equalities) {
        const double v = std::abs(eq.fn(x)) - eq.tolerance;
        if (v > 0.0) acc += 1e6 * v * v;
    }
    return acc;
}

double loss_term(const CEProblem& p, double prediction) {
    if (p.target_mode == TargetMode::maximize) return -prediction;
    const double e = p.target_value - prediction;
    return e * e;
}

std::vector<std::vector<double>> prediction_matrix(
    const std::vector<std::vector<double>>& explanations,
    std::span<const LabeledModel> models) {
    std::vector<std::vector<double>> preds(explanations.size());
    for (std::size_t s = 0; s < explanations.size(); ++s) {
        preds[s].reserve(models.size());
        for (const auto& m : models) preds[s].push_back(m.model->predict(explanations[s]));
    }
    return preds;
}

CESet generate_local(const CEProblem& problem, const LabeledModel& target_model, std::size_t S,
                     std::uint64_t seed, std::span<const LabeledModel> report_models,
                     const Method1Options& options, const std::string& method_tag) {
    if (S == 0) throw InvalidArgument(method_tag + ": S must be >= 1");
    if (problem.base.size() != target_model.model->feature_count())
        throw InvalidArgument(method_tag + ": model feature count does not match the problem");

    std::vector<LabeledModel> report(report_models.begin(), report_models.end());
    if (report.empty()) report.push_back(target_model);

    CESet ces;
    ces.problem = problem;
    ces.method = method_tag;
    ces.requested = S;
    for (const auto& m : report) ces.model_labels.push_back(m.label);
    {
        auto it = std::find(ces.model_labels.begin(), ces.model_labels.end(), target_model.label);
        if (it == ces.model_labels.end()) {
            report.push_back(target_model);
            ces.model_labels.push_back(target_model.label);
            it = std::prev(ces.model_labels.end());
        }
        ces.objective_models = {static_cast<std::size_t>(it - ces.model_labels.begin())};
    }

    const FreeSpace fs = make_free_space(problem);
    if (fs.dim() == 0) {
        ces.explanations.assign(1, fs.full_template);
        ces.predictions = prediction_matrix(ces.explanations, report);
        ces.warnings.push_back("no free coordinates; base point returned");
        return ces;
    }
    const std::vector<double> base_free = fs.restrict(problem.base);
    const double radius = ball_radius_euclid(problem);

    auto feasible_point = [&](std::span<const double> raw) {
        std::vector<double> z(raw.begin(), raw.end());
        clip_to_box(z, fs);
        project_into_ball(z, base_free, radius);
        return z;
    };
    // Probes are evaluated at their projection onto the feasible set, so the
    // search slides along the ball boundary instead of fighting a penalty wall.
    auto objective = [&](std::span<const double> raw) {
        const std::vector<double> z = feasible_point(raw);
        const std::vector<double> x = fs.expand(z);
        const double pred = target_model.model->predict(x);
        return loss_term(problem, pred) +
               problem.lambda * distance(x, problem.base, problem.distance_kind) +
               equality_penalty(problem, x);
    };

    PatternSearchOptions search;
    search.max_evals = options.max_evals;
    search.tolerance = options.tolerance;
    std::vector<double> steps(fs.dim());
    for (std::size_t k = 0; k < fs.dim(); ++k)
        steps[k] = 0.25 * std::min(fs.hi[k] - fs.lo[k], radius);

    Rng rng(mix_seed(seed, {0x6d31ULL}));  // "m1"
    for (std::size_t s = 0; s < S; ++s) {
        bool placed = false;
        for (int attempt = 0; attempt < 2 && !placed; ++attempt) {
            const std::vector<double> start = sample_in_ball(rng, fs, base_free, radius);
            const PatternSearchResult res = pattern_search(objective, start, steps, search);
            if (res.failed) continue;
            const std::vector<double> z = feasible_point(res.x);
            ces.explanations.push_back(fs.expand(z));
            placed = true;
        }
        if (!placed) {
            std::ostringstream msg;
            msg << "slot " << s << " dropped: optimizer failed twice";
            ces.warnings.push_back(msg.str());
        }
    }
    ces.predictions = prediction_matrix(ces.explanations, report);
    return ces;
}

}  // namespace

CESet method1_generate(const CEProblem& problem, const LabeledModel& model, std::size_t S,
                       std::uint64_t seed, std::span<const LabeledModel> report_models,
                       const Method1Options& options) {
    return generate_local(problem, model, S, seed, report_models, options, "method1");
}

CESet method2_generate(const CEProblem& problem, const LabeledModel& stacked, std::size_t S,
                       std::uint64_t seed, std::span<const LabeledModel> report_models,
                       const Method1Options& options) {
    if (stacked.model->kind() != "stacking")
        throw InvalidArgument("method2 requires a stacking predictor");
    std::vector<LabeledModel> report(report_models.begin(), report_models.end());
    if (report.empty()) {
        // default report set: the stack itself plus its base models
        report.push_back(stacked);
        const auto* stack = dynamic_cast<const StackingModel*>(stacked.model.get());
        for (std::size_t b = 0; b < stack->bases.size(); ++b) {
            report.push_back({stack->bases[b]->kind() + "_base" + std::to_string(b + 1),
                              stack->bases[b]});
        }
    }
    CESet ces = generate_local(problem, stacked, S, seed, report, options, "method2");
    return ces;
}

CESet method3_generate(const CEProblem& problem, std::span<const LabeledModel> models,
                       std::size_t S, const Method3Options& options) {
    if (models.empty()) throw InvalidArgument("method3: needs at least one model");
    if (S == 0) throw InvalidArgument("method3: S must be >= 1");
    if (options.enforce_improvement && problem.target_mode != TargetMode::maximize)
        throw InvalidArgument("method3: improvement floors require maximize mode");

    CESet ces;
    ces.problem = problem;
    ces.method = "method3";
    ces.requested = S;
    for (const auto& m : models) ces.model_labels.push_back(m.label);
    ces.objective_models.resize(models.size());
    std::iota(ces.objective_models.begin(), ces.objective_models.end(), std::size_t{0});

    const FreeSpace fs = make_free_space(problem);
    if (fs.dim() == 0) {
        ces.explanations.assign(1, fs.full_template);
        ces.predictions = prediction_matrix(ces.explanations, models);
        ces.warnings.push_back("no free coordinates; base point returned");
        return ces;
    }

    std::vector<double> floors;
    if (options.enforce_improvement) {
        floors.reserve(models.size());
        for (const auto& m : models) floors.push_back(m.model->predict(problem.base));
    }

    MooProblem moo;
    moo.dimension = fs.dim();
    moo.lower = fs.lo;
    moo.upper = fs.hi;
    moo.n_objectives = models.size();
    moo.objectives = [&](std::span<const double> z) {
        const std::vector<double> x = fs.expand(z);
        std::vector<double> out;
        out.reserve(models.size());
        for (const auto& m : models) out.push_back(loss_term(problem, m.model->predict(x)));
        return out;
    };
    moo.constraints = [&](std::span<const double> z) {
        const std::vector<double> x = fs.expand(z);
        std::vector<double> out;
        out.push_back(std::max(0.0, distance(x, problem.base, problem.distance_kind) -
                                        problem.distance_bound));
        for (std::size_t j = 0; j < floors.size(); ++j)
            out.push_back(std::max(0.0, floors[j] - models[j].model->predict(x)));
        for (const auto& eq : problem.equalities)
            out.push_back(std::max(0.0, std::abs(eq.fn(x)) - eq.tolerance));
        return out;
    };

    MooConfig cfg = options.moo;
    if (options.seed_base_individual) cfg.initial_point = fs.restrict(problem.base);

    const MooResult result = evolve(moo, cfg);
    if (!result.feasible) {
        std::ostringstream msg;
        msg << "method3: no feasible explanation found (best total violation "
            << result.best_violation << ")";
        throw InfeasibleError(msg.str(), result.best_violation);
    }

    // Drop exact duplicates, keeping the first occurrence.
    std::vector<Individual> archive;
    {
        std::set<std::vector<double>> seen;
        for (const auto& ind : result.archive)
            if (seen.insert(ind.genome).second) archive.push_back(ind);
    }

    if (options.enforce_improvement) {
        std::vector<Individual> improving;
        for (const auto& ind : archive) {
            bool strict = false;
            for (std::size_t j = 0; j < models.size() && !strict; ++j)
                strict = -ind.objectives[j] > floors[j];
            if (strict) improving.push_back(ind);
        }
        if (improving.empty())
            throw InfeasibleError("method3: no strictly improving explanation found", 0.0);
        archive = std::move(improving);
    }

    const std::vector<Individual> chosen = select_diverse_subset(archive, S);
    for (const auto& ind : chosen) ces.explanations.push_back(fs.expand(ind.genome));
    if (ces.explanations.size() < S) {
        std::ostringstream msg;
        msg << "front smaller than requested: " << ces.explanations.size() << " of " << S;
        ces.warnings.push_back(msg.str());
    }
    ces.predictions = prediction_matrix(ces.explanations, models);
    return ces;
}

std::vector<double> select_medoid(const CESet& ces) {
    if (ces.size() == 0) throw InvalidArgument("select_medoid: empty explanation set");
    std::size_t best = 0;
    double best_sum = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < ces.size(); ++s) {
        double sum = 0.0;
        for (std::size_t t = 0; t < ces.size(); ++t) {
            if (t == s) continue;
            sum += distance(ces.explanations[s], ces.explanations[t], DistanceKind::euclidean);
        }
        if (sum < best_sum) {
            best_sum = sum;
            best = s;
        }
    }
    return ces.explanations[best];
}

std::vector<double> select_closest_to_centroid(const CESet& ces) {
    if (ces.size() == 0) throw InvalidArgument("select_closest_to_centroid: empty explanation set");
    const std::size_t r = ces.explanations[0].size();
    std::vector<double> centroid(r, 0.0);
    for (const auto& x : ces.explanations)
        for (std::size_t j = 0; j < r; ++j) centroid[j] += x[j];
    for (double& c : centroid) c /= static_cast<double>(ces.size());
    std::size_t best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < ces.size(); ++s) {
        const double d = distance(ces.explanations[s], centroid, DistanceKind::euclidean);
        if (d < best_dist) {
            best_dist = d;
            best = s;
        }
    }
    return ces.explanations[best];
}

namespace {

const char* rule_name(DirectionRule r) {
    switch (r) {
        case DirectionRule::free: return "free";
        case DirectionRule::nonincreasing: return "nonincreasing";
        case DirectionRule::nondecreasing: return "nondecreasing";
        case DirectionRule::fixed: return "fixed";
    }
    return "free";
}

DirectionRule rule_from_name(const std::string& s) {
    if (s == "free") return DirectionRule::free;
    if (s == "nonincreasing") return DirectionRule::nonincreasing;
    if (s == "nondecreasing") return DirectionRule::nondecreasing;
    if (s == "fixed") return DirectionRule::fixed;
    throw ParseError("unknown direction rule: " + s);
}

}  // namespace

Json ceset_to_json(const CESet& ces) {
    Json doc;
    doc["format"] = "pce-ceset";
    doc["version"] = 1;
    doc["method"] = ces.method;
    Json prob;
    prob["base"] = ces.problem.base;
    prob["target_mode"] = ces.problem.target_mode == TargetMode::maximize ? "maximize" : "match";
    prob["target_value"] = ces.problem.target_value;
    prob["distance_bound"] = ces.problem.distance_bound;
    prob["lambda"] = ces.problem.lambda;
    prob["distance_kind"] = ces.problem.distance_kind == DistanceKind::euclidean
                                ? "euclidean"
                                : "squared_euclidean";
    prob["feature_names"] = ces.problem.feature_names;
    Json kinds = Json::array();
    for (auto k : ces.problem.feature_kinds)
        kinds.push_back(k == FeatureKind::binary01 ? "binary01" : "continuous");
    prob["feature_kinds"] = std::move(kinds);
    prob["lower"] = ces.problem.lower;
    prob["upper"] = ces.problem.upper;
    Json rules = Json::array();
    for (auto r : ces.problem.rules) rules.push_back(rule_name(r));
    prob["rules"] = std::move(rules);
    prob["equality_count"] = ces.problem.equalities.size();
    prob["warnings"] = ces.problem.warnings;
    doc["problem"] = std::move(prob);
    doc["model_labels"] = ces.model_labels;
    doc["objective_models"] = ces.objective_models;
    doc["requested"] = ces.requested;
    doc["explanations"] = ces.explanations;
    doc["predictions"] = ces.predictions;
    doc["warnings"] = ces.warnings;
    return doc;
}

CESet ceset_from_json(const Json& doc) {
    if (!doc.is_object() || !doc.contains("format") || doc["format"] != "pce-ceset")
        throw ParseError("not a ceset document");
    if (doc.at("version").get<int>() != 1) throw ParseError("unsupported ceset version");
    CESet ces;
    ces.method = doc.at("method").get<std::string>();
    const Json& prob = doc.at("problem");
    ces.problem.base = prob.at("base").get<std::vector<double>>();
    ces.problem.target_mode = prob.at("target_mode").get<std::string>() == "maximize"
                                  ? TargetMode::maximize
                                  : TargetMode::match;
    ces.problem.target_value = prob.at("target_value").get<double>();
    ces.problem.distance_bound = prob.at("distance_bound").get<double>();
    ces.problem.lambda = prob.at("lambda").get<double>();
    ces.problem.distance_kind = prob.at("distance_kind").get<std::string>() == "euclidean"
                                    ? DistanceKind::euclidean
                                    : DistanceKind::squared_euclidean;
    ces.problem.feature_names = prob.at("feature_names").get<std::vector<std::string>>();
    for (const auto& k : prob.at("feature_kinds"))
        ces.problem.feature_kinds.push_back(k.get<std::string>() == "binary01"
                                                ? FeatureKind::binary01
                                                : FeatureKind::continuous);
    ces.problem.lower = prob.at("lower").get<std::vector<double>>();
    ces.problem.upper = prob.at("upper").get<std::vector<double>>();
    for (const auto& rj : prob.at("rules"))
        ces.problem.rules.push_back(rule_from_name(rj.get<std::string>()));
    ces.problem.warnings = prob.at("warnings").get<std::vector<std::string>>();
    ces.model_labels = doc.at("model_labels").get<std::vector<std::string>>();
    ces.objective_models = doc.at("objective_models").get<std::vector<std::size_t>>();
    ces.requested = doc.at("requested").get<std::size_t>();
    ces.explanations = doc.at("explanations").get<std::vector<std::vector<double>>>();
    ces.predictions = doc.at("predictions").get<std::vector<std::vector<double>>>();
    ces.warnings = doc.at("warnings").get<std::vector<std::string>>();
    return ces;
}

void save_ceset(const CESet& ces, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write file: " + path);
    out << ceset_to_json(ces).dump(1) << '\n';
}

CESet load_ceset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path);
    Json doc;
    try {
        in >> doc;
    } catch (const std::exception& e) {
        throw ParseError("invalid JSON in " + path + ": " + e.what());
    }
    return ceset_from_json(doc);
}

void write_ceset_csv(const CESet& ces, const std::string& path, bool snap_binary) {
    std::vector<std::string> header;
    for (const auto& name : ces.problem.feature_names) header.push_back("delta_" + name);
    for (const auto& label : ces.model_labels) header.push_back("pred_" + label);
    std::vector<std::vector<std::string>> rows;
    for (std::size_t s = 0; s < ces.size(); ++s) {
        std::vector<std::string> row;
        for (std::size_t j = 0; j < ces.problem.dimension(); ++j) {
            double v = ces.explanations[s][j];
            if (snap_binary && ces.problem.feature_kinds[j] == FeatureKind::binary01)
                v = std::round(v);
            row.push_back(format_double(v - ces.problem.base[j]));
        }
        for (double p : ces.predictions[s]) row.push_back(format_double(p));
        rows.push_back(std::move(row));
    }
    write_csv(path, header, rows);
}

void validate_ceset(const CESet& ces, double tolerance) {
    std::vector<double> lo, hi;
    ces.problem.effective_intervals(lo, hi);
    for (std::size_t s = 0; s < ces.size(); ++s) {
        const auto& x = ces.explanations[s];
        if (x.size() != ces.problem.dimension())
            throw InvalidArgument("explanation has wrong dimension");
        const double d = distance(x, ces.problem.base, ces.problem.distance_kind);
        if (d > ces.problem.distance_bound + tolerance) {
            std::ostringstream msg;
            msg << "explanation " << s << " violates the distance ball: " << d << " > "
                << ces.problem.distance_bound;
            throw InvalidArgument(msg.str());
        }
        for (std::size_t j = 0; j < x.size(); ++j) {
            if (x[j] < lo[j] - tolerance || x[j] > hi[j] + tolerance) {
                std::ostringstream msg;
                msg << "explanation " << s << " violates bounds/rules on feature '"
                    << ces.problem.feature_names[j] << "'";
                throw InvalidArgument(msg.str());
            }
        }
    }
}

void verify_predictions(const CESet& ces, std::span<const LabeledModel> models, double tolerance) {
    if (models.size() != ces.model_labels.size())
        throw InvalidArgument("verify_predictions: model count mismatch");
    for (std::size_t m = 0; m < models.size(); ++m)
        if (models[m].label != ces.model_labels[m])
            throw InvalidArgument("verify_predictions: label mismatch at column " +
                                  std::to_string(m));
    for (std::size_t s = 0; s < ces.size(); ++s) {
        for (std::size_t m = 0; m < models.size(); ++m) {
            const double fresh = models[m].model->predict(ces.explanations[s]);
            if (std::abs(fresh - ces.predictions[s][m]) > tolerance) {
                std::ostringstream msg;
                msg << "stored prediction diverges at explanation " << s << ", model '"
                    << ces.model_labels[m] << "'";
                throw InvalidArgument(msg.str());
            }
        }
    }
}

}  // namespace pce
