#include "pce/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "pce/csv.hpp"
#include "pce/parallel.hpp"
#include "pce/rng.hpp"
#include "pce/sha256.hpp"

namespace pce {

namespace fs = std::filesystem;

namespace {

void expect_keys(const Json& obj, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& item : obj.items()) {
        if (!allowed.count(item.key()))
            throw InvalidArgument("unknown config key '" + item.key() + "' in " + where);
    }
}

}  // namespace

ExperimentConfig ExperimentConfig::preset(const std::string& experiment, const std::string& name) {
    ExperimentConfig cfg;
    cfg.experiment = experiment;
    if (experiment == "exp1_case1" || experiment == "exp1_case2") {
        cfg.data_source = experiment == "exp1_case1" ? "case1" : "case2";
        cfg.n = 1000;
        cfg.c = 3.0;
        cfg.lambda = 2.0;
        cfg.m_values = {2, 3, 4};
        cfg.compute_tir = true;
        cfg.enforce_improvement = false;
        cfg.binary_rule_policy = "none";
        cfg.target_column = "y";
    } else if (experiment == "exp2") {
        cfg.data_source = "survey";
        cfg.n = 500;
        cfg.c = 5.0;
        cfg.lambda = 2.0;
        cfg.m_values = {3};
        cfg.compute_tir = false;
        cfg.enforce_improvement = true;
        cfg.binary_rule_policy = "monotone_from_base";
        cfg.fixed_features = {"sex", "age"};
        cfg.target_column = "score";
    } else {
        throw InvalidArgument("unknown experiment '" + experiment + "'");
    }
    if (name == "desk") {
        cfg.n_bases = 10;
        cfg.s = 20;
        cfg.moo.population = 60;
        cfg.moo.generations = 60;
    } else if (name == "paper") {
        cfg.n_bases = 50;
        cfg.s = 20;
        cfg.moo.population = 100;
        cfg.moo.generations = 100;
    } else {
        throw InvalidArgument("unknown preset '" + name + "' (expected desk or paper)");
    }
    cfg.out_dir = "runs/" + experiment;
    return cfg;
}

ExperimentConfig ExperimentConfig::from_json(const Json& doc) {
    if (!doc.is_object()) throw InvalidArgument("config must be a JSON object");
    const std::string experiment =
        doc.contains("experiment") ? doc.at("experiment").get<std::string>() : "exp1_case1";
    ExperimentConfig cfg = preset(experiment, "desk");

    expect_keys(doc,
                {"experiment", "data", "n_bases", "s", "c", "lambda", "m_values", "split", "moo",
                 "method1", "compute_tir", "enforce_improvement", "snap_binary_csv",
                 "binary_rule_policy", "fixed_features", "seed", "out_dir", "workers"},
                "config");
    if (doc.contains("data")) {
        const Json& data = doc.at("data");
        expect_keys(data, {"source", "csv_path", "target_column", "n"}, "config.data");
        if (data.contains("source")) cfg.data_source = data.at("source").get<std::string>();
        if (data.contains("csv_path")) cfg.csv_path = data.at("csv_path").get<std::string>();
        if (data.contains("target_column"))
            cfg.target_column = data.at("target_column").get<std::string>();
        if (data.contains("n")) cfg.n = data.at("n").get<std::size_t>();
    }
    if (doc.contains("n_bases")) cfg.n_bases = doc.at("n_bases").get<std::size_t>();
    if (doc.contains("s")) cfg.s = doc.at("s").get<std::size_t>();
    if (doc.contains("c")) cfg.c = doc.at("c").get<double>();
    if (doc.contains("lambda")) cfg.lambda = doc.at("lambda").get<double>();
    if (doc.contains("m_values")) cfg.m_values = doc.at("m_values").get<std::vector<std::size_t>>();
    if (doc.contains("split")) {
        const Json& split = doc.at("split");
        expect_keys(split, {"n_repeats", "train_fraction"}, "config.split");
        if (split.contains("n_repeats")) cfg.split_repeats = split.at("n_repeats").get<std::size_t>();
        if (split.contains("train_fraction"))
            cfg.train_fraction = split.at("train_fraction").get<double>();
    }
    if (doc.contains("moo")) {
        const Json& moo = doc.at("moo");
        expect_keys(moo,
                    {"population", "generations", "crossover_prob", "sbx_eta", "mutation_prob",
                     "mutation_eta"},
                    "config.moo");
        if (moo.contains("population")) cfg.moo.population = moo.at("population").get<std::size_t>();
        if (moo.contains("generations"))
            cfg.moo.generations = moo.at("generations").get<std::size_t>();
        if (moo.contains("crossover_prob"))
            cfg.moo.crossover_prob = moo.at("crossover_prob").get<double>();
        if (moo.contains("sbx_eta")) cfg.moo.sbx_eta = moo.at("sbx_eta").get<double>();
        if (moo.contains("mutation_prob"))
            cfg.moo.mutation_prob = moo.at("mutation_prob").get<double>();
        if (moo.contains("mutation_eta")) cfg.moo.mutation_eta = moo.at("mutation_eta").get<double>();
    }
    if (doc.contains("method1")) {
        const Json& m1 = doc.at("method1");
        expect_keys(m1, {"max_evals", "tolerance"}, "config.method1");
        if (m1.contains("max_evals")) cfg.m1_max_evals = m1.at("max_evals").get<std::size_t>();
        if (m1.contains("tolerance")) cfg.m1_tolerance = m1.at("tolerance").get<double>();
    }
    if (doc.contains("compute_tir")) cfg.compute_tir = doc.at("compute_tir").get<bool>();
    if (doc.contains("enforce_improvement"))
        cfg.enforce_improvement = doc.at("enforce_improvement").get<bool>();
    if (doc.contains("snap_binary_csv")) cfg.snap_binary_csv = doc.at("snap_binary_csv").get<bool>();
    if (doc.contains("binary_rule_policy"))
        cfg.binary_rule_policy = doc.at("binary_rule_policy").get<std::string>();
    if (doc.contains("fixed_features"))
        cfg.fixed_features = doc.at("fixed_features").get<std::vector<std::string>>();
    if (doc.contains("seed")) cfg.seed = doc.at("seed").get<std::uint64_t>();
    if (doc.contains("out_dir")) cfg.out_dir = doc.at("out_dir").get<std::string>();
    if (doc.contains("workers")) cfg.workers = doc.at("workers").get<std::size_t>();
    cfg.validate();
    return cfg;
}

Json ExperimentConfig::to_json() const {
    Json doc;
    doc["experiment"] = experiment;
    doc["data"] = {{"source", data_source},
                   {"csv_path", csv_path},
                   {"target_column", target_column},
                   {"n", n}};
    doc["n_bases"] = n_bases;
    doc["s"] = s;
    doc["c"] = c;
    doc["lambda"] = lambda;
    doc["m_values"] = m_values;
    doc["split"] = {{"n_repeats", split_repeats}, {"train_fraction", train_fraction}};
    doc["moo"] = {{"population", moo.population},     {"generations", moo.generations},
                  {"crossover_prob", moo.crossover_prob}, {"sbx_eta", moo.sbx_eta},
                  {"mutation_prob", moo.mutation_prob},   {"mutation_eta", moo.mutation_eta}};
    doc["method1"] = {{"max_evals", m1_max_evals}, {"tolerance", m1_tolerance}};
    doc["compute_tir"] = compute_tir;
    doc["enforce_improvement"] = enforce_improvement;
    doc["snap_binary_csv"] = snap_binary_csv;
    doc["binary_rule_policy"] = binary_rule_policy;
    doc["fixed_features"] = fixed_features;
    doc["seed"] = seed;
    doc["out_dir"] = out_dir;
    doc["workers"] = workers;
    return doc;
}

void ExperimentConfig::validate() const {
    if (experiment != "exp1_case1" && experiment != "exp1_case2" && experiment != "exp2")
        throw InvalidArgument("experiment must be exp1_case1, exp1_case2 or exp2");
    if (experiment == "exp1_case1" && data_source != "case1")
        throw InvalidArgument("exp1_case1 requires data source case1");
    if (experiment == "exp1_case2" && data_source != "case2")
        throw InvalidArgument("exp1_case2 requires data source case2");
    if (experiment == "exp2" && data_source != "survey" && data_source != "csv")
        throw InvalidArgument("exp2 requires the survey surrogate or a csv source");
    if (data_source == "csv" && csv_path.empty())
        throw InvalidArgument("csv source needs data.csv_path");
    if (n_bases == 0 || s == 0) throw InvalidArgument("n_bases and s must be >= 1");
    if (!(c > 0.0)) throw InvalidArgument("c must be positive");
    if (lambda < 0.0) throw InvalidArgument("lambda must be non-negative");
    if (m_values.empty()) throw InvalidArgument("m_values must not be empty");
    for (std::size_t m : m_values)
        if (m < 2 || m > 4)
            throw InvalidArgument("each m value must lie in [2, 4] for the four-model zoo");
    if (experiment == "exp2" &&
        std::find(m_values.begin(), m_values.end(), std::size_t{3}) == m_values.end())
        throw InvalidArgument("exp2 needs m=3 in m_values for its figure outputs");
    if (compute_tir && (data_source == "survey" || data_source == "csv"))
        throw UnsupportedError(
            "the true-improvement ratio needs a known true function; disable compute_tir for "
            "real or surrogate data");
    if (binary_rule_policy != "none" && binary_rule_policy != "monotone_from_base" &&
        binary_rule_policy != "monotone_opposite")
        throw InvalidArgument("binary_rule_policy must be none, monotone_from_base or "
                              "monotone_opposite");
    if (out_dir.empty()) throw InvalidArgument("out_dir must not be empty");
    if (workers == 0) throw InvalidArgument("workers must be >= 1");
}

Json RunManifest::to_json() const {
    Json doc;
    doc["format"] = "pce-run-manifest";
    doc["version"] = 1;
    doc["library_version"] = library_version;
    doc["config"] = config_echo;
    doc["failed_stage"] = failed_stage;
    Json stage_arr = Json::array();
    for (const auto& s : stages) stage_arr.push_back({{"name", s.name}, {"seconds", s.seconds}});
    doc["stages"] = std::move(stage_arr);
    Json file_arr = Json::array();
    for (const auto& [path, digest] : files)
        file_arr.push_back({{"path", path}, {"sha256", digest}});
    doc["files"] = std::move(file_arr);
    return doc;
}

RunManifest RunManifest::from_json(const Json& doc) {
    if (!doc.is_object() || !doc.contains("format") || doc["format"] != "pce-run-manifest")
        throw ParseError("not a run manifest document");
    RunManifest m;
    m.library_version = doc.at("library_version").get<std::string>();
    m.config_echo = doc.at("config");
    m.failed_stage = doc.at("failed_stage").get<std::string>();
    for (const auto& s : doc.at("stages"))
        m.stages.push_back({s.at("name").get<std::string>(), s.at("seconds").get<double>()});
    for (const auto& f : doc.at("files"))
        m.files.emplace_back(f.at("path").get<std::string>(), f.at("sha256").get<std::string>());
    return m;
}

// ---------------------------------------------------------------------------
// Table builders

std::vector<BarRow> ce_average_bars(std::span<const CESet> sets, bool include_base) {
    if (sets.empty()) throw InvalidArgument("ce_average_bars: no explanation sets");
    const auto& names = sets.front().problem.feature_names;
    std::vector<BarRow> rows(names.size());
    std::vector<std::vector<double>> per_base(names.size());
    for (const CESet& ces : sets) {
        if (ces.size() == 0) throw InvalidArgument("ce_average_bars: empty explanation set");
        for (std::size_t j = 0; j < names.size(); ++j) {
            double mean = 0.0;
            for (const auto& x : ces.explanations) mean += x[j];
            mean /= static_cast<double>(ces.size());
            if (!include_base) mean -= ces.problem.base[j];
            per_base[j].push_back(mean);
        }
    }
    for (std::size_t j = 0; j < names.size(); ++j) {
        BarRow& row = rows[j];
        row.feature = names[j];
        const auto& v = per_base[j];
        for (double x : v) row.mean += x;
        row.mean /= static_cast<double>(v.size());
        double ss = 0.0;
        for (double x : v) ss += (x - row.mean) * (x - row.mean);
        row.stddev = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
    }
    return rows;
}

std::string bar_csv_text(const std::vector<BarRow>& rows) {
    std::ostringstream out;
    out << "feature,mean,std\n";
    for (const auto& r : rows)
        out << r.feature << ',' << format_double(r.mean) << ',' << format_double(r.stddev)
            << '\n';
    return out.str();
}

std::string pareto_scatter_csv_text(const CESet& ces, std::span<const double> base_predictions) {
    if (base_predictions.size() != ces.model_labels.size())
        throw InvalidArgument("pareto scatter: base prediction arity mismatch");
    std::ostringstream out;
    for (std::size_t m = 0; m < ces.model_labels.size(); ++m)
        out << "objective_" << (m + 1) << ',';
    out << "is_base\n";
    for (const auto& preds : ces.predictions) {
        for (double p : preds) out << format_double(p) << ',';
        out << "0\n";
    }
    for (double p : base_predictions) out << format_double(p) << ',';
    out << "1\n";
    return out.str();
}

std::string representative_csv_text(const CESet& ces) {
    const auto medoid = select_medoid(ces);
    const auto central = select_closest_to_centroid(ces);
    std::vector<double> mean_ce(ces.problem.dimension(), 0.0);
    for (const auto& x : ces.explanations)
        for (std::size_t j = 0; j < mean_ce.size(); ++j) mean_ce[j] += x[j];
    for (double& v : mean_ce) v /= static_cast<double>(ces.size());

    std::ostringstream out;
    out << "label";
    for (const auto& name : ces.problem.feature_names) out << ',' << name;
    out << '\n';
    auto row = [&](const std::string& label, std::span<const double> x) {
        out << label;
        for (double v : x) out << ',' << format_double(v);
        out << '\n';
    };
    row("base", ces.problem.base);
    row("medoid", medoid);
    row("closest_to_centroid", central);
    row("mean_ce", mean_ce);
    return out.str();
}

std::string ceset_stem(std::size_t base_index, const std::string& row_label) {
    std::ostringstream out;
    out << "base";
    if (base_index < 100) out << (base_index < 10 ? "00" : "0");
    out << base_index << '_' << row_label;
    return out.str();
}

std::vector<std::string> method_row_labels(const ExperimentConfig& config,
                                           std::span<const std::string> base_model_names) {
    std::vector<std::string> labels;
    for (const auto& name : base_model_names) labels.push_back("method1_" + name);
    labels.push_back("method2");
    for (std::size_t m : config.m_values) labels.push_back("method3_m" + std::to_string(m));
    return labels;
}

// ---------------------------------------------------------------------------
// Runner

namespace {

struct RunContext {
    const ExperimentConfig& config;
    fs::path out_dir;
    RunManifest manifest;
    std::chrono::steady_clock::time_point stage_start;
    std::string current_stage;

    explicit RunContext(const ExperimentConfig& cfg) : config(cfg), out_dir(cfg.out_dir) {}

    void begin_stage(const std::string& name) {
        current_stage = name;
        stage_start = std::chrono::steady_clock::now();
    }
    void end_stage() {
        const auto elapsed = std::chrono::steady_clock::now() - stage_start;
        manifest.stages.push_back(
            {current_stage, std::chrono::duration<double>(elapsed).count()});
        current_stage.clear();
    }
    void record_file(const fs::path& rel) {
        manifest.files.emplace_back(rel.generic_string(),
                                    sha256_file_hex((out_dir / rel).string()));
    }
    void write_text_file(const fs::path& rel, const std::string& content) {
        const fs::path full = out_dir / rel;
        std::ofstream out(full, std::ios::binary);
        if (!out) throw IoError("cannot write file: " + full.string());
        out << content;
        out.close();
        record_file(rel);
    }
};

Dataset load_experiment_data(const ExperimentConfig& cfg) {
    const std::uint64_t seed = mix_seed(cfg.seed, {0x64617461ULL});  // "data"
    if (cfg.data_source == "case1") return generate_case1(cfg.n, seed);
    if (cfg.data_source == "case2") return generate_case2(cfg.n, seed);
    if (cfg.data_source == "survey") return generate_survey_surrogate(cfg.n, seed);
    return ingest_csv(cfg.csv_path, cfg.target_column);
}

TruthFn experiment_truth(const ExperimentConfig& cfg) {
    if (cfg.data_source == "case1")
        return [](std::span<const double> x) { return case1_truth(x); };
    if (cfg.data_source == "case2")
        return [](std::span<const double> x) { return case2_truth(x); };
    return {};
}

RuleSpec experiment_rules(const ExperimentConfig& cfg) {
    RuleSpec rules;
    if (cfg.binary_rule_policy == "monotone_from_base")
        rules.binary_policy = BinaryRulePolicy::monotone_from_base;
    else if (cfg.binary_rule_policy == "monotone_opposite")
        rules.binary_policy = BinaryRulePolicy::monotone_opposite;
    rules.fixed_features = cfg.fixed_features;
    return rules;
}

std::vector<std::size_t> top_base_models(const AccuracyReport& report, std::size_t n_base_models,
                                         std::size_t m) {
    std::vector<std::size_t> base_ranking;
    for (std::size_t idx : report.ranking)
        if (idx < n_base_models) base_ranking.push_back(idx);
    if (m > base_ranking.size())
        throw InvalidArgument("not enough base models for the requested m");
    base_ranking.resize(m);
    return base_ranking;
}

}  // namespace

RunManifest run_experiment(const ExperimentConfig& config) {
    config.validate();
    RunContext ctx(config);
    ctx.manifest.library_version = kVersion;
    ctx.manifest.config_echo = config.to_json();

    fs::create_directories(ctx.out_dir / "models");
    fs::create_directories(ctx.out_dir / "cesets");

    try {
        ctx.begin_stage("config");
        ctx.write_text_file("config.json", config.to_json().dump(2) + "\n");
        ctx.end_stage();

        ctx.begin_stage("data");
        const Dataset dataset = load_experiment_data(config);
        dataset.validate();
        export_csv(dataset, (ctx.out_dir / "dataset.csv").string());
        ctx.record_file("dataset.csv");
        if (config.experiment == "exp2") {
            write_describe_csv(describe(dataset),
                               (ctx.out_dir / "descriptive_stats.csv").string());
            ctx.record_file("descriptive_stats.csv");
        }
        ctx.end_stage();

        ctx.begin_stage("bench");
        const SplitPlan plan{config.split_repeats, config.train_fraction,
                             mix_seed(config.seed, {0x73706c6974ULL})};
        const ModelZoo zoo = default_model_zoo();
        const AccuracyReport accuracy = evaluate_models(zoo, dataset, plan);
        write_accuracy_csv(accuracy, (ctx.out_dir / "accuracy.csv").string());
        ctx.record_file("accuracy.csv");
        ctx.end_stage();

        ctx.begin_stage("fit");
        const auto split_idx = split_indices(dataset.n, plan);
        const Dataset train0 = dataset.subset(split_idx[0].train);
        const FittedZoo fitted =
            fit_zoo(zoo, train0, mix_seed(config.seed, {0x63656d6f64ULL}));  // "cemod"
        std::vector<LabeledModel> base_models;
        std::vector<std::string> base_names;
        for (std::size_t b = 0; b < fitted.bases.size(); ++b) {
            base_models.push_back({zoo.bases[b].name, fitted.bases[b]});
            base_names.push_back(zoo.bases[b].name);
        }
        LabeledModel stacking{"stacking", fitted.stacking};
        for (const auto& m : base_models) {
            save_predictor(*m.model, (ctx.out_dir / "models" / (m.label + ".json")).string());
            ctx.record_file(fs::path("models") / (m.label + ".json"));
        }
        save_predictor(*stacking.model, (ctx.out_dir / "models" / "stacking.json").string());
        ctx.record_file(fs::path("models") / "stacking.json");
        ctx.end_stage();

        ctx.begin_stage("bases");
        if (config.n_bases > split_idx[0].test.size())
            throw InvalidArgument("n_bases exceeds the size of the first test split");
        std::vector<std::size_t> test_rows = split_idx[0].test;
        Rng base_rng(mix_seed(config.seed, {0x6261736573ULL}));  // "bases"
        base_rng.shuffle(test_rows);
        test_rows.resize(config.n_bases);
        {
            std::vector<std::string> header = {"base_index", "row_index"};
            header.insert(header.end(), dataset.feature_names.begin(),
                          dataset.feature_names.end());
            header.push_back(dataset.target_name);
            std::vector<std::vector<std::string>> rows;
            for (std::size_t b = 0; b < test_rows.size(); ++b) {
                std::vector<std::string> row = {std::to_string(b), std::to_string(test_rows[b])};
                for (double v : dataset.row(test_rows[b])) row.push_back(format_double(v));
                row.push_back(format_double(dataset.target[test_rows[b]]));
                rows.push_back(std::move(row));
            }
            write_csv((ctx.out_dir / "bases.csv").string(), header, rows);
            ctx.record_file("bases.csv");
        }
        ctx.end_stage();

        ctx.begin_stage("generate");
        const RuleSpec rules = experiment_rules(config);
        const std::vector<std::string> row_labels = method_row_labels(config, base_names);
        const std::size_t rows_per_base = row_labels.size();
        std::vector<LabeledModel> report_with_stack = {stacking};
        report_with_stack.insert(report_with_stack.end(), base_models.begin(), base_models.end());

        std::vector<std::vector<CESet>> per_base_sets(config.n_bases);
        parallel_for(config.n_bases, config.workers, [&](std::size_t b) {
            const auto base_row = dataset.row(test_rows[b]);
            const CEProblem problem =
                build_problem(base_row, dataset, config.c, config.lambda, rules);
            Method1Options m1opt{config.m1_max_evals, config.m1_tolerance};
            std::vector<CESet>& sets = per_base_sets[b];
            sets.reserve(rows_per_base);
            for (std::size_t i = 0; i < base_models.size(); ++i) {
                sets.push_back(method1_generate(problem, base_models[i], config.s,
                                                mix_seed(config.seed, {0x6365ULL, b, i}),
                                                base_models, m1opt));
            }
            sets.push_back(method2_generate(problem, stacking, config.s,
                                            mix_seed(config.seed, {0x6365ULL, b, 99}),
                                            report_with_stack, m1opt));
            for (std::size_t mi = 0; mi < config.m_values.size(); ++mi) {
                const std::size_t m = config.m_values[mi];
                std::vector<LabeledModel> selected;
                for (std::size_t idx : top_base_models(accuracy, base_models.size(), m))
                    selected.push_back(base_models[idx]);
                Method3Options m3opt;
                m3opt.moo = config.moo;
                m3opt.moo.seed = mix_seed(config.seed, {0x6d6f6fULL, b, m});
                m3opt.enforce_improvement = config.enforce_improvement;
                sets.push_back(method3_generate(problem, selected, config.s, m3opt));
            }
            for (const CESet& ces : sets) validate_ceset(ces, 1e-9);
        });
        for (std::size_t b = 0; b < config.n_bases; ++b) {
            for (std::size_t k = 0; k < rows_per_base; ++k) {
                const std::string stem = ceset_stem(b, row_labels[k]);
                save_ceset(per_base_sets[b][k],
                           (ctx.out_dir / "cesets" / (stem + ".json")).string());
                ctx.record_file(fs::path("cesets") / (stem + ".json"));
                write_ceset_csv(per_base_sets[b][k],
                                (ctx.out_dir / "cesets" / (stem + ".csv")).string(),
                                config.snap_binary_csv);
                ctx.record_file(fs::path("cesets") / (stem + ".csv"));
            }
        }
        ctx.end_stage();

        ctx.begin_stage("metrics");
        const TruthFn truth = config.compute_tir ? experiment_truth(config) : TruthFn{};
        std::vector<TaggedReport> reports;
        for (std::size_t b = 0; b < config.n_bases; ++b) {
            for (std::size_t k = 0; k < rows_per_base; ++k) {
                const CESet& ces = per_base_sets[b][k];
                TaggedReport tagged;
                tagged.method = ces.method;
                tagged.label = row_labels[k];
                tagged.report =
                    compute_metrics(ces, train0, truth ? &truth : nullptr);
                reports.push_back(std::move(tagged));
            }
        }
        const AggregateReport agg = aggregate(reports);
        write_aggregate_csv(agg, (ctx.out_dir / "metrics_aggregate.csv").string());
        ctx.record_file("metrics_aggregate.csv");
        write_aggregate_markdown(agg, (ctx.out_dir / "metrics_aggregate.md").string());
        ctx.record_file("metrics_aggregate.md");
        ctx.end_stage();

        if (config.experiment == "exp2") {
            ctx.begin_stage("figures");
            const std::string m3_label = "method3_m3";
            const std::size_t m3_index =
                static_cast<std::size_t>(std::find(row_labels.begin(), row_labels.end(),
                                                   m3_label) -
                                         row_labels.begin());
            std::vector<CESet> m3_sets;
            for (std::size_t b = 0; b < config.n_bases; ++b)
                m3_sets.push_back(per_base_sets[b][m3_index]);

            ctx.write_text_file("bar_ce_with_base.csv",
                                bar_csv_text(ce_average_bars(m3_sets, true)));
            ctx.write_text_file("bar_ce_delta.csv",
                                bar_csv_text(ce_average_bars(m3_sets, false)));

            const CESet& chosen = m3_sets.front();
            std::vector<double> base_preds;
            for (std::size_t m : chosen.objective_models) {
                const auto& label = chosen.model_labels[m];
                for (const auto& lm : base_models)
                    if (lm.label == label)
                        base_preds.push_back(lm.model->predict(chosen.problem.base));
            }
            ctx.write_text_file("pareto_front.csv",
                                pareto_scatter_csv_text(chosen, base_preds));
            ctx.write_text_file("representative_ces.csv", representative_csv_text(chosen));
            ctx.end_stage();
        }
    } catch (const std::exception& e) {
        ctx.manifest.failed_stage = ctx.current_stage.empty() ? "unknown" : ctx.current_stage;
        std::ofstream out(ctx.out_dir / "manifest.json", std::ios::binary);
        if (out) out << ctx.manifest.to_json().dump(2) << '\n';
        throw;
    }

    std::ofstream out(ctx.out_dir / "manifest.json", std::ios::binary);
    if (!out) throw IoError("cannot write manifest.json");
    out << ctx.manifest.to_json().dump(2) << '\n';
    return ctx.manifest;
}

}  // namespace pce
