#include "pce/audit.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "pce/sha256.hpp"

namespace pce {

namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Json read_json(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path.string());
    Json doc;
    try {
        in >> doc;
    } catch (const std::exception& e) {
        throw ParseError("invalid JSON in " + path.string() + ": " + e.what());
    }
    return doc;
}

}  // namespace

Json AuditReport::to_json() const {
    Json doc;
    doc["ok"] = ok;
    doc["files_checked"] = files_checked;
    doc["cesets_checked"] = cesets_checked;
    doc["issues"] = issues;
    return doc;
}

AuditReport audit_run(const std::string& run_dir) {
    AuditReport report;
    const fs::path dir(run_dir);
    auto issue = [&](const std::string& msg) { report.issues.push_back(msg); };

    const RunManifest manifest = RunManifest::from_json(read_json(dir / "manifest.json"));
    if (!manifest.failed_stage.empty())
        issue("manifest records a failed stage: " + manifest.failed_stage);
    const ExperimentConfig config = ExperimentConfig::from_json(manifest.config_echo);

    for (const auto& [rel, digest] : manifest.files) {
        const fs::path full = dir / rel;
        if (!fs::exists(full)) {
            issue("missing file listed in manifest: " + rel);
            continue;
        }
        if (sha256_file_hex(full.string()) != digest)
            issue("checksum mismatch: " + rel);
        ++report.files_checked;
    }

    try {
        const Dataset dataset =
            ingest_csv((dir / "dataset.csv").string(), config.target_column);
        const SplitPlan plan{config.split_repeats, config.train_fraction,
                             mix_seed(config.seed, {0x73706c6974ULL})};
        const auto split_idx = split_indices(dataset.n, plan);
        const Dataset train0 = dataset.subset(split_idx[0].train);

        const ModelZoo zoo = default_model_zoo();
        std::vector<std::string> base_names;
        std::vector<LabeledModel> models_by_label;
        for (const auto& proc : zoo.bases) base_names.push_back(proc.name);
        std::vector<std::string> all_names = base_names;
        all_names.push_back("stacking");
        for (const auto& name : all_names) {
            const fs::path path = dir / "models" / (name + ".json");
            models_by_label.push_back(
                {name, std::shared_ptr<const Predictor>(load_predictor(path.string()).release())});
        }
        auto model_for = [&](const std::string& label) -> const LabeledModel& {
            for (const auto& m : models_by_label)
                if (m.label == label) return m;
            throw InvalidArgument("ceset references unknown model label '" + label + "'");
        };

        const TruthFn truth = config.compute_tir
                                  ? (config.data_source == "case1"
                                         ? TruthFn([](std::span<const double> x) {
                                               return case1_truth(x);
                                           })
                                         : TruthFn([](std::span<const double> x) {
                                               return case2_truth(x);
                                           }))
                                  : TruthFn{};

        const std::vector<std::string> row_labels = method_row_labels(config, base_names);
        std::vector<TaggedReport> reports;
        std::vector<CESet> m3_sets;  // method3_m3 per base, for the figure rebuild
        for (std::size_t b = 0; b < config.n_bases; ++b) {
            for (const auto& label : row_labels) {
                const std::string stem = ceset_stem(b, label);
                const fs::path path = dir / "cesets" / (stem + ".json");
                CESet ces;
                try {
                    ces = load_ceset(path.string());
                } catch (const std::exception& e) {
                    issue(std::string("cannot load ceset: ") + e.what());
                    continue;
                }
                try {
                    validate_ceset(ces, 1e-9);
                } catch (const std::exception& e) {
                    issue(stem + ": feasibility violated: " + e.what());
                }
                try {
                    std::vector<LabeledModel> column_models;
                    for (const auto& ml : ces.model_labels)
                        column_models.push_back(model_for(ml));
                    verify_predictions(ces, column_models, 1e-9);
                } catch (const std::exception& e) {
                    issue(stem + ": prediction matrix not reproducible: " + e.what());
                }
                TaggedReport tagged;
                tagged.method = ces.method;
                tagged.label = label;
                tagged.report = compute_metrics(ces, train0, truth ? &truth : nullptr);
                reports.push_back(std::move(tagged));
                if (label == "method3_m3") m3_sets.push_back(ces);
                ++report.cesets_checked;
            }
        }

        if (reports.size() == config.n_bases * row_labels.size()) {
            const std::string recomputed = aggregate_csv_text(aggregate(reports));
            const std::string emitted = read_file(dir / "metrics_aggregate.csv");
            if (recomputed != emitted)
                issue("metrics_aggregate.csv does not match the recomputation from cesets");
        } else {
            issue("not all cesets loaded; aggregate comparison skipped");
        }

        if (config.experiment == "exp2" && m3_sets.size() == config.n_bases) {
            if (read_file(dir / "bar_ce_with_base.csv") !=
                bar_csv_text(ce_average_bars(m3_sets, true)))
                issue("bar_ce_with_base.csv does not match the recomputation");
            if (read_file(dir / "bar_ce_delta.csv") !=
                bar_csv_text(ce_average_bars(m3_sets, false)))
                issue("bar_ce_delta.csv does not match the recomputation");
            const CESet& chosen = m3_sets.front();
            std::vector<double> base_preds;
            for (std::size_t m : chosen.objective_models)
                base_preds.push_back(
                    model_for(chosen.model_labels[m]).model->predict(chosen.problem.base));
            if (read_file(dir / "pareto_front.csv") !=
                pareto_scatter_csv_text(chosen, base_preds))
                issue("pareto_front.csv does not match the recomputation");
            if (read_file(dir / "representative_ces.csv") != representative_csv_text(chosen))
                issue("representative_ces.csv does not match the recomputation");
        }
    } catch (const std::exception& e) {
        issue(std::string("audit aborted: ") + e.what());
    }

    report.ok = report.issues.empty();
    return report;
}

}  // namespace pce
