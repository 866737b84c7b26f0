#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "pce.h"

namespace {

using Json = nlohmann::ordered_json;

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

int fail(pce_status status) {
    std::cerr << "error: " << pce_last_error() << '\n';
    return (status == PCE_ERROR_INVALID_ARGUMENT || status == PCE_ERROR_UNSUPPORTED ||
            status == PCE_ERROR_PARSE)
               ? kExitConfig
               : kExitRuntime;
}

int fail_runtime(pce_status status) {
    std::cerr << "error: " << pce_last_error() << '\n';
    return (status == PCE_ERROR_INVALID_ARGUMENT || status == PCE_ERROR_UNSUPPORTED)
               ? kExitConfig
               : kExitRuntime;
}

struct OwnedString {
    char* ptr = nullptr;
    ~OwnedString() { pce_string_free(ptr); }
    std::string str() const { return ptr == nullptr ? std::string{} : std::string(ptr); }
};

struct DatasetHandle {
    pce_dataset* ptr = nullptr;
    ~DatasetHandle() { pce_dataset_free(ptr); }
};

struct DataFlags {
    std::string gen_kind;
    long n = 1000;
    unsigned long long seed = 1;
    std::string csv_path;
    std::string target = "y";
};

void add_data_flags(CLI::App* cmd, DataFlags& flags) {
    cmd->add_option("--gen", flags.gen_kind, "generate a dataset: case1, case2 or survey");
    cmd->add_option("--n", flags.n, "rows to generate (with --gen)");
    cmd->add_option("--data", flags.csv_path, "CSV file to ingest");
    cmd->add_option("--target", flags.target, "target column name (with --data)");
}

int open_dataset(const DataFlags& flags, DatasetHandle& handle) {
    if (!flags.gen_kind.empty() && !flags.csv_path.empty()) {
        std::cerr << "error: pass either --gen or --data, not both\n";
        return kExitConfig;
    }
    pce_status st;
    if (!flags.gen_kind.empty()) {
        st = pce_dataset_generate(flags.gen_kind.c_str(), flags.n, flags.seed, 0, &handle.ptr);
    } else if (!flags.csv_path.empty()) {
        st = pce_dataset_from_csv(flags.csv_path.c_str(), flags.target.c_str(), &handle.ptr);
    } else {
        std::cerr << "error: a data source is required (--gen or --data)\n";
        return kExitConfig;
    }
    if (st != PCE_OK) return fail(st);
    return 0;
}

bool read_file(const std::string& path, std::string& out) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return false;
    std::ostringstream ss;
    ss << in.rdbuf();
    out = ss.str();
    return true;
}

void merge_json(Json& base, const Json& overlay) {
    for (const auto& item : overlay.items()) {
        if (item.value().is_object() && base.contains(item.key()) &&
            base[item.key()].is_object()) {
            merge_json(base[item.key()], item.value());
        } else {
            base[item.key()] = item.value();
        }
    }
}

struct ExperimentFlags {
    std::string config_path;
    std::string preset = "desk";
    std::string out_dir;
    unsigned long long seed = 0;
    bool seed_set = false;
    long workers = 0;
    std::string csv_path;
    std::string target;
};

void add_experiment_flags(CLI::App* cmd, ExperimentFlags& flags) {
    cmd->add_option("--config", flags.config_path, "JSON config file; flags override its keys");
    cmd->add_option("--preset", flags.preset, "desk or paper")
        ->check(CLI::IsMember({"desk", "paper"}));
    cmd->add_option("--out-dir", flags.out_dir, "output directory");
    cmd->add_option("--seed", flags.seed, "master seed")
        ->each([&flags](const std::string&) { flags.seed_set = true; });
    cmd->add_option("--workers", flags.workers, "worker threads for base cases");
}

int run_experiment_command(const std::string& experiment, const ExperimentFlags& flags) {
    OwnedString preset_json;
    pce_status st =
        pce_default_config(experiment.c_str(), flags.preset.c_str(), &preset_json.ptr);
    if (st != PCE_OK) return fail(st);

    Json config;
    try {
        config = Json::parse(preset_json.str());
        if (!flags.config_path.empty()) {
            std::string text;
            if (!read_file(flags.config_path, text)) {
                std::cerr << "error: cannot read config file " << flags.config_path << '\n';
                return kExitConfig;
            }
            merge_json(config, Json::parse(text));
        }
    } catch (const std::exception& e) {
        std::cerr << "error: bad config JSON: " << e.what() << '\n';
        return kExitConfig;
    }
    config["experiment"] = experiment;
    if (flags.seed_set) config["seed"] = flags.seed;
    if (!flags.out_dir.empty()) config["out_dir"] = flags.out_dir;
    if (flags.workers > 0) config["workers"] = flags.workers;
    if (!flags.csv_path.empty()) {
        config["data"]["source"] = "csv";
        config["data"]["csv_path"] = flags.csv_path;
        if (!flags.target.empty()) config["data"]["target_column"] = flags.target;
    }

    OwnedString manifest;
    st = pce_run_experiment(config.dump().c_str(), &manifest.ptr);
    if (st != PCE_OK) return fail_runtime(st);

    const Json doc = Json::parse(manifest.str());
    std::cout << "run complete: " << config["out_dir"].get<std::string>() << '\n';
    for (const auto& stage : doc["stages"]) {
        std::printf("  %-10s %8.2fs\n", stage["name"].get<std::string>().c_str(),
                    stage["seconds"].get<double>());
    }
    std::cout << "  files: " << doc["files"].size() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pareto-improving counterfactual explanations for regression model zoos"};
    app.set_version_flag("--version", pce_version());
    app.require_subcommand(1);

    auto* gen_data = app.add_subcommand("gen-data", "generate a synthetic dataset as CSV");
    std::string gd_kind = "case1", gd_out, gd_describe;
    long gd_n = 1000;
    unsigned long long gd_seed = 1;
    bool gd_no_noise = false;
    gen_data->add_option("--kind", gd_kind, "case1, case2 or survey")
        ->check(CLI::IsMember({"case1", "case2", "survey"}));
    gen_data->add_option("--n", gd_n, "number of rows")->required();
    gen_data->add_option("--seed", gd_seed, "generator seed");
    gen_data->add_option("--out", gd_out, "output CSV path")->required();
    gen_data->add_flag("--no-noise", gd_no_noise, "zero the noise term");
    gen_data->add_option("--describe", gd_describe, "also write descriptive statistics CSV");

    auto* bench = app.add_subcommand("bench-models",
                                     "rank the model zoo by mean test MSE over repeated splits");
    DataFlags bench_data;
    add_data_flags(bench, bench_data);
    long bench_repeats = 20;
    double bench_fraction = 0.7;
    std::string bench_out = "accuracy.csv";
    bench->add_option("--seed", bench_data.seed, "split/fit seed");
    bench->add_option("--repeats", bench_repeats, "number of repeated splits");
    bench->add_option("--train-fraction", bench_fraction, "training fraction");
    bench->add_option("--out", bench_out, "accuracy table CSV path");

    auto* gen_ce = app.add_subcommand("gen-ce", "generate counterfactual explanations");
    DataFlags ce_data;
    add_data_flags(gen_ce, ce_data);
    std::string ce_method, ce_model, ce_models, ce_base, ce_prefix = "ceset",
                ce_rules = "none";
    std::vector<std::string> ce_fixed;
    long ce_base_row = 0, ce_m = 3, ce_s = 20, ce_pop = 100, ce_gens = 100;
    double ce_c = 3.0, ce_lambda = 2.0;
    unsigned long long ce_seed = 1;
    bool ce_snap = false, ce_improve = false;
    gen_ce->add_option("--method", ce_method, "method1, method2 or method3")->required();
    gen_ce->add_option("--model", ce_model, "base model for method1");
    gen_ce->add_option("--models", ce_models, "comma-separated model names for method3");
    gen_ce->add_option("--m", ce_m, "model count for method3 (accuracy-ranked)");
    gen_ce->add_option("--base-row", ce_base_row, "dataset row to explain");
    gen_ce->add_option("--base", ce_base, "explicit base vector, comma-separated");
    gen_ce->add_option("--C", ce_c, "distance bound");
    gen_ce->add_option("--lambda", ce_lambda, "distance weight for methods 1 and 2");
    gen_ce->add_option("--S", ce_s, "number of explanations");
    gen_ce->add_option("--seed", ce_seed, "generation seed");
    gen_ce->add_option("--pop", ce_pop, "NSGA-II population");
    gen_ce->add_option("--gens", ce_gens, "NSGA-II generations");
    gen_ce->add_option("--binary-rules", ce_rules,
                       "none, monotone_from_base or monotone_opposite");
    gen_ce->add_option("--fixed", ce_fixed, "feature names pinned to the base value");
    gen_ce->add_flag("--enforce-improvement", ce_improve,
                     "require Pareto improvement over the base predictions (method3)");
    gen_ce->add_flag("--snap", ce_snap, "round binary features in the CSV output");
    gen_ce->add_option("--out-prefix", ce_prefix, "output prefix for .json/.csv");

    auto* exp1 = app.add_subcommand("exp1", "simulation study on synthetic data");
    ExperimentFlags exp1_flags;
    std::string exp1_case = "case1";
    exp1->add_option("--case", exp1_case, "case1 or case2")
        ->check(CLI::IsMember({"case1", "case2"}));
    add_experiment_flags(exp1, exp1_flags);

    auto* exp2 = app.add_subcommand("exp2", "survey-style study with direction constraints");
    ExperimentFlags exp2_flags;
    add_experiment_flags(exp2, exp2_flags);
    exp2->add_option("--data", exp2_flags.csv_path, "CSV source instead of the surrogate");
    exp2->add_option("--target-column", exp2_flags.target, "target column for --data");

    auto* plot = app.add_subcommand("plot", "render SVG charts from a run directory");
    std::string plot_dir;
    plot->add_option("--run-dir", plot_dir, "experiment run directory")->required();

    auto* audit = app.add_subcommand("audit", "verify a run directory against its manifest");
    std::string audit_dir;
    audit->add_option("--run-dir", audit_dir, "experiment run directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return kExitConfig;
    }

    if (gen_data->parsed()) {
        DatasetHandle d;
        pce_status st =
            pce_dataset_generate(gd_kind.c_str(), gd_n, gd_seed, gd_no_noise ? 1 : 0, &d.ptr);
        if (st != PCE_OK) return fail(st);
        st = pce_dataset_to_csv(d.ptr, gd_out.c_str());
        if (st != PCE_OK) return fail_runtime(st);
        std::cout << "wrote " << gd_out << " (" << pce_dataset_rows(d.ptr) << " rows, "
                  << pce_dataset_cols(d.ptr) << " features)\n";
        if (!gd_describe.empty()) {
            st = pce_dataset_describe_csv(d.ptr, gd_describe.c_str());
            if (st != PCE_OK) return fail_runtime(st);
            std::cout << "wrote " << gd_describe << '\n';
        }
        return 0;
    }

    if (bench->parsed()) {
        DatasetHandle d;
        if (int rc = open_dataset(bench_data, d); rc != 0) return rc;
        OwnedString report;
        pce_status st = pce_bench_models(d.ptr, bench_repeats, bench_fraction, bench_data.seed,
                                         bench_out.c_str(), &report.ptr);
        if (st != PCE_OK) return fail_runtime(st);
        const Json doc = Json::parse(report.str());
        std::printf("%-16s %14s %14s\n", "model", "mean_mse", "std_mse");
        for (std::size_t i = 0; i < doc["model_names"].size(); ++i) {
            std::printf("%-16s %14.4f %14.4f\n",
                        doc["model_names"][i].get<std::string>().c_str(),
                        doc["mean_mse"][i].get<double>(), doc["std_mse"][i].get<double>());
        }
        std::cout << "wrote " << bench_out << '\n';
        return 0;
    }

    if (gen_ce->parsed()) {
        DatasetHandle d;
        ce_data.seed = ce_seed;
        if (int rc = open_dataset(ce_data, d); rc != 0) return rc;
        Json options;
        options["method"] = ce_method;
        if (!ce_base.empty()) {
            std::vector<double> base;
            std::stringstream ss(ce_base);
            std::string cell;
            while (std::getline(ss, cell, ',')) {
                try {
                    base.push_back(std::stod(cell));
                } catch (const std::exception&) {
                    std::cerr << "error: bad --base entry '" << cell << "'\n";
                    return kExitConfig;
                }
            }
            options["base"] = base;
        } else {
            options["base_row"] = ce_base_row;
        }
        if (!ce_model.empty()) options["model"] = ce_model;
        if (!ce_models.empty()) {
            std::vector<std::string> names;
            std::stringstream ss(ce_models);
            std::string cell;
            while (std::getline(ss, cell, ',')) names.push_back(cell);
            options["models"] = names;
        } else if (ce_method == "method3") {
            options["m"] = ce_m;
        }
        options["C"] = ce_c;
        options["lambda"] = ce_lambda;
        options["S"] = ce_s;
        options["seed"] = ce_seed;
        options["binary_rule_policy"] = ce_rules;
        if (!ce_fixed.empty()) options["fixed_features"] = ce_fixed;
        if (ce_improve) options["enforce_improvement"] = true;
        options["moo"] = {{"population", ce_pop}, {"generations", ce_gens}};

        OwnedString ceset;
        pce_status st = pce_generate_ces(d.ptr, options.dump().c_str(), &ceset.ptr);
        if (st != PCE_OK) return fail_runtime(st);
        {
            std::ofstream out(ce_prefix + ".json", std::ios::binary);
            if (!out) {
                std::cerr << "error: cannot write " << ce_prefix << ".json\n";
                return kExitRuntime;
            }
            out << ceset.str() << '\n';
        }
        st = pce_ceset_json_to_csv(ceset.ptr, (ce_prefix + ".csv").c_str(), ce_snap ? 1 : 0);
        if (st != PCE_OK) return fail_runtime(st);
        std::cout << "wrote " << ce_prefix << ".json and " << ce_prefix << ".csv\n";
        return 0;
    }

    if (exp1->parsed()) {
        return run_experiment_command(exp1_case == "case1" ? "exp1_case1" : "exp1_case2",
                                      exp1_flags);
    }
    if (exp2->parsed()) {
        return run_experiment_command("exp2", exp2_flags);
    }

    if (plot->parsed()) {
        const pce_status st = pce_emit_plots(plot_dir.c_str());
        if (st != PCE_OK) return fail_runtime(st);
        std::cout << "plots written under " << plot_dir << '\n';
        return 0;
    }

    if (audit->parsed()) {
        OwnedString report;
        const pce_status st = pce_audit_run(audit_dir.c_str(), &report.ptr);
        if (report.ptr != nullptr) std::cout << report.str() << '\n';
        if (st != PCE_OK) {
            std::cerr << "error: " << pce_last_error() << '\n';
            return kExitRuntime;
        }
        return 0;
    }
    return kExitConfig;
}
