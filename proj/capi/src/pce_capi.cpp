#include "pce.h"

#include <cstdlib>
#include <cstring>
#include <set>
#include <string>

#include "pce/audit.hpp"
#include "pce/experiment.hpp"
#include "pce/plots.hpp"

extern "C" struct pce_dataset {
    pce::Dataset data;
};

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out != nullptr) std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

template <typename F>
pce_status guarded(F&& fn) {
    try {
        fn();
        return PCE_OK;
    } catch (const pce::InvalidArgument& e) {
        g_last_error = e.what();
        return PCE_ERROR_INVALID_ARGUMENT;
    } catch (const pce::ParseError& e) {
        g_last_error = e.what();
        return PCE_ERROR_PARSE;
    } catch (const pce::IoError& e) {
        g_last_error = e.what();
        return PCE_ERROR_IO;
    } catch (const pce::FitError& e) {
        g_last_error = e.what();
        return PCE_ERROR_FIT;
    } catch (const pce::InfeasibleError& e) {
        g_last_error = e.what();
        return PCE_ERROR_INFEASIBLE;
    } catch (const pce::UnsupportedError& e) {
        g_last_error = e.what();
        return PCE_ERROR_UNSUPPORTED;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return PCE_ERROR_RUNTIME;
    }
}

pce::Json parse_json(const char* text, const char* what) {
    if (text == nullptr) throw pce::InvalidArgument(std::string(what) + " must not be null");
    try {
        return pce::Json::parse(text);
    } catch (const std::exception& e) {
        throw pce::ParseError(std::string("invalid JSON for ") + what + ": " + e.what());
    }
}

void require(bool ok, const char* msg) {
    if (!ok) throw pce::InvalidArgument(msg);
}

}  // namespace

const char* pce_version(void) { return pce::kVersion; }

const char* pce_last_error(void) { return g_last_error.c_str(); }

void pce_string_free(char* s) { std::free(s); }

pce_status pce_dataset_generate(const char* kind, long n, unsigned long long seed,
                                int noise_free, pce_dataset** out) {
    return guarded([&] {
        require(out != nullptr, "output pointer must not be null");
        require(kind != nullptr, "kind must not be null");
        require(n > 0, "sample count must be positive");
        const std::string k(kind);
        pce::Dataset d;
        if (k == "case1") {
            d = pce::generate_case1(static_cast<std::size_t>(n), seed, noise_free != 0);
        } else if (k == "case2") {
            d = pce::generate_case2(static_cast<std::size_t>(n), seed, noise_free != 0);
        } else if (k == "survey") {
            d = pce::generate_survey_surrogate(static_cast<std::size_t>(n), seed,
                                               noise_free != 0);
        } else {
            throw pce::InvalidArgument("unknown generator kind '" + k + "'");
        }
        *out = new pce_dataset{std::move(d)};
    });
}

pce_status pce_dataset_from_csv(const char* path, const char* target_column, pce_dataset** out) {
    return guarded([&] {
        require(out != nullptr, "output pointer must not be null");
        require(path != nullptr && target_column != nullptr,
                "path and target column must not be null");
        *out = new pce_dataset{pce::ingest_csv(path, target_column)};
    });
}

pce_status pce_dataset_to_csv(const pce_dataset* d, const char* path) {
    return guarded([&] {
        require(d != nullptr && path != nullptr, "dataset and path must not be null");
        pce::export_csv(d->data, path);
    });
}

pce_status pce_dataset_describe_csv(const pce_dataset* d, const char* path) {
    return guarded([&] {
        require(d != nullptr && path != nullptr, "dataset and path must not be null");
        pce::write_describe_csv(pce::describe(d->data), path);
    });
}

long pce_dataset_rows(const pce_dataset* d) {
    return d == nullptr ? -1 : static_cast<long>(d->data.n);
}

long pce_dataset_cols(const pce_dataset* d) {
    return d == nullptr ? -1 : static_cast<long>(d->data.r);
}

pce_status pce_dataset_get_row(const pce_dataset* d, long row, double* features, double* target) {
    return guarded([&] {
        require(d != nullptr, "dataset must not be null");
        require(row >= 0 && static_cast<std::size_t>(row) < d->data.n, "row index out of range");
        require(features != nullptr, "feature buffer must not be null");
        const auto src = d->data.row(static_cast<std::size_t>(row));
        std::memcpy(features, src.data(), src.size() * sizeof(double));
        if (target != nullptr) *target = d->data.target[static_cast<std::size_t>(row)];
    });
}

void pce_dataset_free(pce_dataset* d) { delete d; }

pce_status pce_bench_models(const pce_dataset* d, long n_repeats, double train_fraction,
                            unsigned long long seed, const char* out_csv, char** report_json) {
    return guarded([&] {
        require(d != nullptr, "dataset must not be null");
        require(n_repeats > 0, "n_repeats must be positive");
        const pce::SplitPlan plan{static_cast<std::size_t>(n_repeats), train_fraction, seed};
        const pce::AccuracyReport report =
            pce::evaluate_models(pce::default_model_zoo(), d->data, plan);
        if (out_csv != nullptr) pce::write_accuracy_csv(report, out_csv);
        if (report_json != nullptr) {
            pce::Json doc;
            doc["model_names"] = report.model_names;
            doc["mean_mse"] = report.mean_mse;
            doc["std_mse"] = report.std_mse;
            doc["ranking"] = report.ranking;
            *report_json = dup_string(doc.dump(2));
        }
    });
}

namespace {

pce::CESet generate_from_options(const pce::Dataset& data, const pce::Json& opt) {
    static const std::set<std::string> allowed = {
        "method", "base_row", "base", "model", "m", "models", "C", "lambda", "S",
        "seed", "binary_rule_policy", "fixed_features", "enforce_improvement", "moo",
        "bench_repeats", "train_fraction"};
    for (const auto& item : opt.items()) {
        if (!allowed.count(item.key()))
            throw pce::InvalidArgument("unknown option key '" + item.key() + "'");
    }
    if (!opt.contains("method")) throw pce::InvalidArgument("options need a 'method'");
    const std::string method = opt.at("method").get<std::string>();

    std::vector<double> base;
    if (opt.contains("base")) {
        base = opt.at("base").get<std::vector<double>>();
    } else if (opt.contains("base_row")) {
        const auto row = opt.at("base_row").get<std::size_t>();
        if (row >= data.n) throw pce::InvalidArgument("base_row out of range");
        base.assign(data.row(row).begin(), data.row(row).end());
    } else {
        throw pce::InvalidArgument("options need either base or base_row");
    }

    pce::RuleSpec rules;
    if (opt.contains("binary_rule_policy")) {
        const std::string policy = opt.at("binary_rule_policy").get<std::string>();
        if (policy == "monotone_from_base")
            rules.binary_policy = pce::BinaryRulePolicy::monotone_from_base;
        else if (policy == "monotone_opposite")
            rules.binary_policy = pce::BinaryRulePolicy::monotone_opposite;
        else if (policy != "none")
            throw pce::InvalidArgument("unknown binary_rule_policy '" + policy + "'");
    }
    if (opt.contains("fixed_features"))
        rules.fixed_features = opt.at("fixed_features").get<std::vector<std::string>>();

    const double C = opt.value("C", 3.0);
    const double lambda = opt.value("lambda", 2.0);
    const std::size_t S = opt.value("S", std::size_t{20});
    const std::uint64_t seed = opt.value("seed", std::uint64_t{1});
    const pce::CEProblem problem = pce::build_problem(base, data, C, lambda, rules);

    const pce::ModelZoo zoo = pce::default_model_zoo();
    auto fit_base = [&](const std::string& name) -> pce::LabeledModel {
        for (std::size_t b = 0; b < zoo.bases.size(); ++b) {
            if (zoo.bases[b].name == name)
                return {name, std::shared_ptr<const pce::Predictor>(
                                  zoo.bases[b].fit(data, pce::mix_seed(seed, {0x666974ULL, b}))
                                      .release())};
        }
        throw pce::InvalidArgument("unknown model name '" + name + "'");
    };

    pce::MooConfig moo;
    if (opt.contains("moo")) {
        const pce::Json& m = opt.at("moo");
        moo.population = m.value("population", moo.population);
        moo.generations = m.value("generations", moo.generations);
        moo.crossover_prob = m.value("crossover_prob", moo.crossover_prob);
        moo.sbx_eta = m.value("sbx_eta", moo.sbx_eta);
        moo.mutation_prob = m.value("mutation_prob", moo.mutation_prob);
        moo.mutation_eta = m.value("mutation_eta", moo.mutation_eta);
    }
    moo.seed = pce::mix_seed(seed, {0x6d6f6fULL});

    if (method == "method1") {
        if (!opt.contains("model")) throw pce::InvalidArgument("method1 needs a 'model' name");
        const pce::LabeledModel model = fit_base(opt.at("model").get<std::string>());
        return pce::method1_generate(problem, model, S, seed);
    }
    if (method == "method2") {
        std::vector<pce::LabeledModel> bases;
        std::vector<std::shared_ptr<const pce::Predictor>> base_ptrs;
        for (const auto& proc : zoo.bases) {
            bases.push_back(fit_base(proc.name));
            base_ptrs.push_back(bases.back().model);
        }
        pce::LabeledModel stacked{
            "stacking",
            std::shared_ptr<const pce::Predictor>(pce::fit_stacking(base_ptrs, data).release())};
        std::vector<pce::LabeledModel> report = {stacked};
        report.insert(report.end(), bases.begin(), bases.end());
        return pce::method2_generate(problem, stacked, S, seed, report);
    }
    if (method == "method3") {
        std::vector<std::string> names;
        if (opt.contains("models")) {
            names = opt.at("models").get<std::vector<std::string>>();
        } else {
            const auto m = opt.value("m", std::size_t{3});
            if (m < 2 || m > zoo.bases.size())
                throw pce::InvalidArgument("m must lie in [2, base model count]");
            pce::ModelZoo bases_only = zoo;
            bases_only.include_stacking = false;
            const pce::SplitPlan plan{opt.value("bench_repeats", std::size_t{5}),
                                      opt.value("train_fraction", 0.7),
                                      pce::mix_seed(seed, {0x62656e6368ULL})};
            const auto report = pce::evaluate_models(bases_only, data, plan);
            for (std::size_t idx : pce::select_top_m(report, m))
                names.push_back(report.model_names[idx]);
        }
        if (names.size() < 2) throw pce::InvalidArgument("method3 needs at least 2 models");
        std::vector<pce::LabeledModel> models;
        for (const auto& name : names) models.push_back(fit_base(name));
        pce::Method3Options m3;
        m3.moo = moo;
        m3.enforce_improvement = opt.value("enforce_improvement", false);
        return pce::method3_generate(problem, models, S, m3);
    }
    throw pce::InvalidArgument("unknown method '" + method + "'");
}

}  // namespace

pce_status pce_generate_ces(const pce_dataset* d, const char* options_json, char** ceset_json) {
    return guarded([&] {
        require(d != nullptr, "dataset must not be null");
        require(ceset_json != nullptr, "output pointer must not be null");
        const pce::Json opt = parse_json(options_json, "generation options");
        const pce::CESet ces = generate_from_options(d->data, opt);
        *ceset_json = dup_string(pce::ceset_to_json(ces).dump(1));
    });
}

pce_status pce_ceset_json_to_csv(const char* ceset_json, const char* out_csv, int snap_binary) {
    return guarded([&] {
        require(out_csv != nullptr, "output path must not be null");
        const pce::CESet ces = pce::ceset_from_json(parse_json(ceset_json, "ceset"));
        pce::write_ceset_csv(ces, out_csv, snap_binary != 0);
    });
}

pce_status pce_default_config(const char* experiment, const char* preset, char** config_json) {
    return guarded([&] {
        require(config_json != nullptr, "output pointer must not be null");
        require(experiment != nullptr, "experiment must not be null");
        const std::string preset_name = preset == nullptr ? "desk" : preset;
        *config_json =
            dup_string(pce::ExperimentConfig::preset(experiment, preset_name).to_json().dump(2));
    });
}

pce_status pce_run_experiment(const char* config_json, char** manifest_json) {
    return guarded([&] {
        const pce::ExperimentConfig config =
            pce::ExperimentConfig::from_json(parse_json(config_json, "experiment config"));
        const pce::RunManifest manifest = pce::run_experiment(config);
        if (manifest_json != nullptr) *manifest_json = dup_string(manifest.to_json().dump(2));
    });
}

pce_status pce_emit_plots(const char* run_dir) {
    return guarded([&] {
        require(run_dir != nullptr, "run_dir must not be null");
        pce::emit_plots(run_dir);
    });
}

pce_status pce_audit_run(const char* run_dir, char** report_json) {
    return guarded([&] {
        require(run_dir != nullptr, "run_dir must not be null");
        const pce::AuditReport report = pce::audit_run(run_dir);
        if (report_json != nullptr) *report_json = dup_string(report.to_json().dump(2));
        if (!report.ok) {
            throw pce::RunError("audit found " + std::to_string(report.issues.size()) +
                                " issue(s); first: " + report.issues.front());
        }
    });
}
