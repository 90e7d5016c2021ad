// rankmerge: two-step rank-ensemble and retrieval-metric CLI.
//
// Subcommands: evaluate, ensemble, blend, sweep, ablate, report, synth.
// Option precedence: command-line flag > config file (--config) > built-in
// defaults. Exit codes: 0 success, 1 usage error, 2 data validation error,
// 3 internal error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rankmerge/ensemble.hpp"
#include "rankmerge/errors.hpp"
#include "rankmerge/experiments.hpp"
#include "rankmerge/io.hpp"
#include "rankmerge/metrics.hpp"
#include "rankmerge/parallel.hpp"

namespace {

using namespace rankmerge;

struct CommonOptions {
    std::string annotations;
    std::vector<std::string> mrr_run_paths;
    std::string ndcg_run_path;
    std::string output; // empty = stdout
    int threads = 0;    // 0 = resolve from env / hardware
    bool verbose = false;
};

struct ConfigFlags {
    int rho_h = 3;
    int rho_t = 1;
    int rho_nn = 5;
    int rho_nm = 10;
    double p = 3.0;
    double alpha = 0.8;
    bool disable_h = false;
    bool disable_t = false;
    bool disable_n = false;
    std::string primary_mrr; // empty = first --mrr-run
};

int resolve_threads(int flag_value) {
    if (flag_value > 0) return flag_value;
    if (const char* env = std::getenv("RANKMERGE_THREADS")) {
        int parsed = std::atoi(env);
        if (parsed > 0) return parsed;
    }
    return default_thread_count();
}

void emit(const std::string& contents, const std::string& output_path) {
    if (output_path.empty()) {
        std::cout << contents;
        std::cout.flush();
    } else {
        write_file_atomic(output_path, contents);
    }
}

struct LoadedInputs {
    Dataset dataset;
    RunSet runs;
    EnsembleConfig config;
};

LoadedInputs load_inputs(const CommonOptions& common, const ConfigFlags& flags,
                         bool need_ndcg_run) {
    LoadedInputs in;
    in.dataset = load_dataset_file(common.annotations);
    if (in.dataset.empty()) throw ValidationError(common.annotations + ": empty dataset");

    for (const auto& path : common.mrr_run_paths) {
        ModelRun run = load_run_file(path);
        validate_run_against_dataset(run, in.dataset);
        in.config.mrr_model_ids.push_back(run.model_id());
        in.runs.add(std::move(run));
    }
    if (need_ndcg_run) {
        ModelRun run = load_run_file(common.ndcg_run_path);
        validate_run_against_dataset(run, in.dataset);
        in.config.ndcg_model_id = run.model_id();
        in.runs.add(std::move(run));
    }

    in.config.rho_h = flags.rho_h;
    in.config.rho_t = flags.rho_t;
    in.config.rho_nn = flags.rho_nn;
    in.config.rho_nm = flags.rho_nm;
    in.config.p = flags.p;
    in.config.enable_h = !flags.disable_h;
    in.config.enable_t = !flags.disable_t;
    in.config.enable_n = !flags.disable_n;
    in.config.primary_mrr_model =
        flags.primary_mrr.empty() ? in.config.mrr_model_ids.front() : flags.primary_mrr;

    if (common.verbose) {
        for (const auto& run : in.runs.runs()) {
            TieStats ties = run_tie_stats(run);
            if (ties.questions_with_ties > 0) {
                std::cerr << "note: run \"" << run.model_id() << "\" has score ties on "
                          << ties.questions_with_ties << " questions (" << ties.tied_pairs
                          << " tied pairs); ranks break ties by candidate index\n";
            }
        }
    }
    return in;
}

std::vector<std::string> question_id_list(const Dataset& ds) {
    std::vector<std::string> ids;
    ids.reserve(ds.size());
    for (const auto& q : ds.questions()) ids.push_back(q.question_id);
    return ids;
}

void add_common_flags(CLI::App* cmd, CommonOptions& common, bool needs_mrr_runs,
                      bool needs_ndcg_run) {
    cmd->add_option("--annotations", common.annotations, "Annotations JSONL file")
        ->required();
    auto* mrr = cmd->add_option("--mrr-run", common.mrr_run_paths,
                                "Prediction JSONL for a reciprocal-rank model (repeatable)");
    if (needs_mrr_runs) mrr->required();
    auto* ndcg =
        cmd->add_option("--ndcg-run", common.ndcg_run_path, "Prediction JSONL for the gain model");
    if (needs_ndcg_run) ndcg->required();
    cmd->add_option("--output", common.output, "Output path (default: stdout)");
    cmd->add_option("--threads", common.threads,
                    "Worker threads (default: RANKMERGE_THREADS or hardware)")
        ->check(CLI::PositiveNumber);
    cmd->add_flag("--verbose", common.verbose, "Diagnostics on stderr");
}

void add_config_flags(CLI::App* cmd, ConfigFlags& flags, bool with_alpha) {
    const auto nonneg = CLI::Validator(
        [](std::string& s) -> std::string {
            try {
                std::size_t pos = 0;
                int v = std::stoi(s, &pos);
                if (pos != s.size() || v < 0) return "nonnegative integer required";
            } catch (...) {
                return "nonnegative integer required";
            }
            return {};
        },
        "NONNEG");
    cmd->add_option("--rho-h", flags.rho_h, "Agreement prefix depth")
        ->check(nonneg)
        ->capture_default_str();
    cmd->add_option("--rho-t", flags.rho_t, "Top-answers prefix depth")
        ->check(nonneg)
        ->capture_default_str();
    cmd->add_option("--rho-nn", flags.rho_nn, "Gain-side agreement prefix depth")
        ->check(nonneg)
        ->capture_default_str();
    cmd->add_option("--rho-nm", flags.rho_nm, "Reciprocal-rank-side agreement prefix depth")
        ->check(nonneg)
        ->capture_default_str();
    cmd->add_option("--p", flags.p, "Second-step calibration exponent")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    if (with_alpha) {
        cmd->add_option("--alpha", flags.alpha, "Blend weight on the reciprocal-rank scores")
            ->check(CLI::Range(0.0, 1.0))
            ->capture_default_str();
    }
    cmd->add_flag("--disable-h", flags.disable_h, "Drop the high-certainty subset");
    cmd->add_flag("--disable-t", flags.disable_t, "Drop the top-answers subset");
    cmd->add_flag("--disable-n", flags.disable_n, "Drop the agreement subset");
    cmd->add_option("--primary-mrr", flags.primary_mrr,
                    "model_id of the primary reciprocal-rank model (default: first --mrr-run)");
}

std::vector<double> parse_values_csv(const std::string& csv) {
    std::vector<double> values;
    std::stringstream ss(csv);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        try {
            std::size_t pos = 0;
            values.push_back(std::stod(cell, &pos));
            if (pos != cell.size()) throw std::invalid_argument(cell);
        } catch (...) {
            throw ValidationError("unparsable numeric value \"" + cell + "\" in --values");
        }
    }
    return values;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"rankmerge: merge reciprocal-rank and gain-optimized model rankings,\n"
                 "and score rankings with the standard retrieval metrics.\n"
                 "Option precedence: flag > config file > defaults."};
    app.require_subcommand(1);
    app.set_config("--config", "", "Config file (INI format, one section per subcommand)");

    // evaluate
    CommonOptions eval_common;
    std::string eval_run_path, eval_merged_path, eval_recall_ks = "1,5,10";
    bool eval_skip_empty = false, eval_json = false;
    auto* cmd_eval = app.add_subcommand("evaluate", "Score a ranking against annotations");
    cmd_eval->add_option("--annotations", eval_common.annotations, "Annotations JSONL file")
        ->required();
    cmd_eval->add_option("--run", eval_run_path, "Prediction JSONL to evaluate");
    cmd_eval->add_option("--merged", eval_merged_path, "Merged-ranking JSONL to evaluate");
    cmd_eval->add_option("--recall-ks", eval_recall_ks, "Recall cut-offs, comma separated");
    cmd_eval->add_flag("--ndcg-skip-empty", eval_skip_empty,
                       "Skip questions with no positive relevance instead of scoring them 0");
    cmd_eval->add_flag("--json", eval_json, "Emit a JSONL record instead of the text table");
    cmd_eval->add_option("--output", eval_common.output, "Output path (default: stdout)");
    cmd_eval->add_option("--threads", eval_common.threads,
                         "Worker threads (default: RANKMERGE_THREADS or hardware)")
        ->check(CLI::PositiveNumber);
    cmd_eval->add_flag("--verbose", eval_common.verbose, "Diagnostics on stderr");

    // ensemble / blend
    CommonOptions ens_common;
    ConfigFlags ens_flags;
    std::string ens_mode = "two-step";
    auto* cmd_ens = app.add_subcommand("ensemble", "Merge model rankings into one ranking");
    add_common_flags(cmd_ens, ens_common, true, true);
    add_config_flags(cmd_ens, ens_flags, true);
    cmd_ens->add_option("--mode", ens_mode, "two-step or blend")
        ->check(CLI::IsMember({"two-step", "blend"}));

    CommonOptions blend_common;
    ConfigFlags blend_flags;
    auto* cmd_blend =
        app.add_subcommand("blend", "Score-level blend of one reciprocal-rank run and the gain run");
    add_common_flags(cmd_blend, blend_common, true, true);
    cmd_blend->add_option("--alpha", blend_flags.alpha, "Blend weight on the reciprocal-rank scores")
        ->check(CLI::Range(0.0, 1.0));
    cmd_blend->add_option("--primary-mrr", blend_flags.primary_mrr,
                          "model_id of the run to blend (default: first --mrr-run)");

    // sweep
    CommonOptions sweep_common;
    ConfigFlags sweep_flags;
    std::string sweep_parameter, sweep_values_csv;
    double sweep_w_mrr = 0.5, sweep_w_ndcg = 0.5;
    bool sweep_skip_empty = false;
    auto* cmd_sweep = app.add_subcommand("sweep", "One-at-a-time hyperparameter sweep (CSV out)");
    add_common_flags(cmd_sweep, sweep_common, true, true);
    add_config_flags(cmd_sweep, sweep_flags, false);
    cmd_sweep->add_option("--parameter", sweep_parameter,
                          "One of rho_h, rho_t, rho_nn, rho_nm, p, alpha")
        ->required()
        ->check(CLI::IsMember({"rho_h", "rho_t", "rho_nn", "rho_nm", "p", "alpha"}));
    cmd_sweep->add_option("--values", sweep_values_csv,
                          "Comma-separated settings (default for alpha: 0,0.05,...,1)");
    cmd_sweep->add_option("--w-mrr", sweep_w_mrr, "Objective weight on MRR");
    cmd_sweep->add_option("--w-ndcg", sweep_w_ndcg, "Objective weight on NDCG");
    cmd_sweep->add_flag("--ndcg-skip-empty", sweep_skip_empty,
                        "Skip questions with no positive relevance in the NDCG mean");

    // ablate
    CommonOptions abl_common;
    ConfigFlags abl_flags;
    bool abl_skip_empty = false;
    auto* cmd_abl = app.add_subcommand("ablate", "Subset on/off ablation table (CSV out)");
    add_common_flags(cmd_abl, abl_common, true, true);
    add_config_flags(cmd_abl, abl_flags, false);
    cmd_abl->add_flag("--ndcg-skip-empty", abl_skip_empty,
                      "Skip questions with no positive relevance in the NDCG mean");

    // report
    CommonOptions rep_common;
    ConfigFlags rep_flags;
    std::string rep_questions_csv;
    int rep_first = 0, rep_depth = 10;
    auto* cmd_rep = app.add_subcommand("report", "Per-question provenance listing");
    add_common_flags(cmd_rep, rep_common, true, true);
    add_config_flags(cmd_rep, rep_flags, false);
    cmd_rep->add_option("--questions", rep_questions_csv, "Comma-separated question ids");
    cmd_rep->add_option("--first", rep_first, "Report the first N questions instead")
        ->check(CLI::PositiveNumber);
    cmd_rep->add_option("--remainder-depth", rep_depth, "Second-step candidates to list")
        ->check(CLI::NonNegativeNumber);

    // synth
    SynthSpec synth_spec{1000, 100, 2, 0.7, 0.9, 42};
    std::string synth_out_dir;
    bool synth_verbose = false;
    auto* cmd_synth = app.add_subcommand("synth", "Generate a synthetic corpus and model runs");
    cmd_synth->add_option("--d", synth_spec.d, "Question count")->check(CLI::PositiveNumber);
    cmd_synth->add_option("--n", synth_spec.n, "Candidates per question")
        ->check(CLI::PositiveNumber);
    cmd_synth->add_option("--n-m", synth_spec.n_m, "Reciprocal-rank model count")
        ->check(CLI::PositiveNumber);
    cmd_synth->add_option("--mrr-fidelity", synth_spec.mrr_fidelity,
                          "P(model ranks the reference answer first)")
        ->check(CLI::Range(0.0, 1.0));
    cmd_synth->add_option("--ndcg-fidelity", synth_spec.ndcg_fidelity,
                          "Relevance correlation strength of the gain run")
        ->check(CLI::Range(0.0, 1.0));
    cmd_synth->add_option("--seed", synth_spec.seed, "RNG seed");
    cmd_synth->add_option("--out-dir", synth_out_dir, "Directory for the generated files")
        ->required();
    cmd_synth->add_flag("--verbose", synth_verbose, "Diagnostics on stderr");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (cmd_eval->parsed()) {
            if (eval_run_path.empty() == eval_merged_path.empty()) {
                std::cerr << "error: evaluate needs exactly one of --run or --merged\n";
                return 1;
            }
            Dataset ds = load_dataset_file(eval_common.annotations);
            if (ds.empty()) throw ValidationError(eval_common.annotations + ": empty dataset");
            EvaluateOptions options;
            options.ndcg_skip_empty = eval_skip_empty;
            options.threads = resolve_threads(eval_common.threads);
            options.recall_ks.clear();
            for (double v : parse_values_csv(eval_recall_ks)) {
                int k = static_cast<int>(v);
                if (v != k || k < 1) throw ValidationError("--recall-ks: positive integers required");
                options.recall_ks.push_back(k);
            }

            MetricsReport report;
            if (!eval_run_path.empty()) {
                ModelRun run = load_run_file(eval_run_path);
                validate_run_against_dataset(run, ds);
                std::vector<RankVector> rankings;
                rankings.reserve(ds.size());
                for (const auto& q : ds.questions()) rankings.push_back(run.ranks(q.question_id));
                report = evaluate(rankings, ds, options);
            } else {
                LoadedRanking loaded = load_merged_rankings_file(eval_merged_path);
                std::unordered_map<std::string, RankVector> by_id;
                for (std::size_t i = 0; i < loaded.question_ids.size(); ++i) {
                    by_id.emplace(loaded.question_ids[i], loaded.rankings[i]);
                }
                report = evaluate(by_id, ds, options);
                bool have_sizes = !loaded.mrr_set_sizes.empty();
                for (int s : loaded.mrr_set_sizes) have_sizes = have_sizes && s >= 0;
                if (have_sizes) {
                    double sum = 0.0;
                    for (int s : loaded.mrr_set_sizes) sum += s;
                    report.avg_mrr_set_size = sum / static_cast<double>(loaded.mrr_set_sizes.size());
                }
            }
            std::ostringstream out;
            if (eval_json) {
                write_metrics_jsonl(report, out);
            } else {
                write_metrics_text(report, out);
            }
            emit(out.str(), eval_common.output);
        } else if (cmd_ens->parsed() || cmd_blend->parsed()) {
            bool is_blend = cmd_blend->parsed() || ens_mode == "blend";
            CommonOptions& common = cmd_blend->parsed() ? blend_common : ens_common;
            ConfigFlags& flags = cmd_blend->parsed() ? blend_flags : ens_flags;
            LoadedInputs in = load_inputs(common, flags, true);
            int threads = resolve_threads(common.threads);
            std::ostringstream out;
            if (is_blend) {
                const ModelRun& mrr_run = in.runs.get(in.config.primary_mrr_model);
                const ModelRun& ndcg_run = in.runs.get(in.config.ndcg_model_id);
                std::vector<RankVector> blended =
                    naive_blend_all(mrr_run, ndcg_run, flags.alpha, in.dataset, threads);
                write_blend_rankings(question_id_list(in.dataset), blended, out);
            } else {
                std::vector<MergedRanking> merged =
                    two_step_rank_all(in.runs, in.config, in.dataset, threads);
                write_merged_rankings(question_id_list(in.dataset), merged, out);
            }
            emit(out.str(), common.output);
        } else if (cmd_sweep->parsed()) {
            LoadedInputs in = load_inputs(sweep_common, sweep_flags, true);
            SweepSpec spec;
            spec.parameter = parse_sweep_parameter(sweep_parameter);
            if (!sweep_values_csv.empty()) {
                spec.values = parse_values_csv(sweep_values_csv);
            } else if (spec.parameter == SweepParameter::alpha) {
                for (int i = 0; i <= 20; ++i) spec.values.push_back(i * 0.05);
            } else {
                throw ValidationError("--values is required for parameter \"" + sweep_parameter +
                                      "\"");
            }
            spec.base_config = in.config;
            spec.w_mrr = sweep_w_mrr;
            spec.w_ndcg = sweep_w_ndcg;
            EvaluateOptions options;
            options.ndcg_skip_empty = sweep_skip_empty;
            SweepResult result =
                run_sweep(in.dataset, in.runs, spec, resolve_threads(sweep_common.threads), options);
            std::ostringstream out;
            write_sweep_csv(result, out);
            emit(out.str(), sweep_common.output);
            if (sweep_common.verbose) {
                std::cerr << "best " << sweep_parameter << " = "
                          << result.rows[result.best_index].value << " (objective argmax)\n";
            }
        } else if (cmd_abl->parsed()) {
            LoadedInputs in = load_inputs(abl_common, abl_flags, true);
            EvaluateOptions options;
            options.ndcg_skip_empty = abl_skip_empty;
            options.threads = resolve_threads(abl_common.threads);
            std::vector<AblationRow> rows = run_ablation(in.dataset, in.runs, in.config,
                                                         resolve_threads(abl_common.threads), options);
            std::ostringstream out;
            write_ablation_csv(rows, out);
            emit(out.str(), abl_common.output);
        } else if (cmd_rep->parsed()) {
            LoadedInputs in = load_inputs(rep_common, rep_flags, true);
            std::vector<std::string> ids;
            if (!rep_questions_csv.empty()) {
                std::stringstream ss(rep_questions_csv);
                std::string id;
                while (std::getline(ss, id, ',')) ids.push_back(id);
            } else {
                std::size_t count = rep_first > 0 ? static_cast<std::size_t>(rep_first)
                                                  : std::min<std::size_t>(5, in.dataset.size());
                for (std::size_t i = 0; i < count && i < in.dataset.size(); ++i) {
                    ids.push_back(in.dataset.at(i).question_id);
                }
            }
            std::string listing = provenance_report(in.dataset, in.runs, in.config, ids, rep_depth);
            emit(listing, rep_common.output);
        } else if (cmd_synth->parsed()) {
            SynthOutput synth = generate_synthetic(synth_spec);
            std::filesystem::create_directories(synth_out_dir);
            auto path_for = [&](const std::string& name) {
                return (std::filesystem::path(synth_out_dir) / (name + ".jsonl")).string();
            };
            {
                std::ostringstream out;
                serialize_dataset(synth.dataset, out);
                write_file_atomic(path_for("annotations"), out.str());
            }
            for (const auto& run : synth.runs.runs()) {
                std::ostringstream out;
                serialize_run(run, out);
                write_file_atomic(path_for(run.model_id()), out.str());
            }
            if (synth_verbose) {
                std::cerr << "wrote annotations + " << synth.runs.size() << " runs to "
                          << synth_out_dir << "\n";
            }
        }
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::overflow_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
