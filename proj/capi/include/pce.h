#ifndef PCE_H
#define PCE_H

/*
 * C interface to the Pareto-improving counterfactual explanation library.
 *
 * Every function that can fail returns a pce_status; PCE_OK is 0. The message
 * for the most recent failure on the current thread is available through
 * pce_last_error(). Strings returned through char** out-parameters are heap
 * allocated and must be released with pce_string_free().
 */

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pce_status {
    PCE_OK = 0,
    PCE_ERROR_INVALID_ARGUMENT = 1,
    PCE_ERROR_PARSE = 2,
    PCE_ERROR_IO = 3,
    PCE_ERROR_FIT = 4,
    PCE_ERROR_INFEASIBLE = 5,
    PCE_ERROR_UNSUPPORTED = 6,
    PCE_ERROR_RUNTIME = 7
} pce_status;

const char* pce_version(void);
const char* pce_last_error(void);
void pce_string_free(char* s);

/* ------------------------------------------------------------------ */
/* Datasets                                                            */

typedef struct pce_dataset pce_dataset;

/* kind: "case1", "case2" or "survey". noise_free != 0 zeroes the noise term. */
pce_status pce_dataset_generate(const char* kind, long n, unsigned long long seed,
                                int noise_free, pce_dataset** out);
pce_status pce_dataset_from_csv(const char* path, const char* target_column, pce_dataset** out);
pce_status pce_dataset_to_csv(const pce_dataset* d, const char* path);
pce_status pce_dataset_describe_csv(const pce_dataset* d, const char* path);
long pce_dataset_rows(const pce_dataset* d);
long pce_dataset_cols(const pce_dataset* d);
/* features must hold pce_dataset_cols() doubles; target may be NULL. */
pce_status pce_dataset_get_row(const pce_dataset* d, long row, double* features, double* target);
void pce_dataset_free(pce_dataset* d);

/* ------------------------------------------------------------------ */
/* Model zoo benchmarking                                              */

/* Fits the model zoo over seeded repeated splits, writes the accuracy table
 * to out_csv (may be NULL) and returns the report as JSON via report_json
 * (may be NULL). */
pce_status pce_bench_models(const pce_dataset* d, long n_repeats, double train_fraction,
                            unsigned long long seed, const char* out_csv, char** report_json);

/* ------------------------------------------------------------------ */
/* Counterfactual generation                                           */

/* options_json keys:
 *   method: "method1" | "method2" | "method3"   (required)
 *   base_row: integer   or   base: [..r doubles..]
 *   model: base model name for method1 ("linear", "random_forest", "gbt", "mlp")
 *   m: model count for method3 (2..4)
 *   C, lambda, S, seed
 *   binary_rule_policy: "none" | "monotone_from_base" | "monotone_opposite"
 *   fixed_features: [names...]
 *   enforce_improvement: bool (method3)
 *   moo: { population, generations, crossover_prob, sbx_eta, mutation_prob, mutation_eta }
 * Models are fitted on the full dataset. The resulting explanation set is
 * returned as JSON. */
pce_status pce_generate_ces(const pce_dataset* d, const char* options_json, char** ceset_json);
pce_status pce_ceset_json_to_csv(const char* ceset_json, const char* out_csv, int snap_binary);

/* ------------------------------------------------------------------ */
/* Experiment pipeline                                                 */

/* experiment: "exp1_case1" | "exp1_case2" | "exp2"; preset: "desk" | "paper". */
pce_status pce_default_config(const char* experiment, const char* preset, char** config_json);
pce_status pce_run_experiment(const char* config_json, char** manifest_json);
pce_status pce_emit_plots(const char* run_dir);
/* report_json (may be NULL) carries {ok, files_checked, cesets_checked, issues}. */
pce_status pce_audit_run(const char* run_dir, char** report_json);

#ifdef __cplusplus
}
#endif

#endif
