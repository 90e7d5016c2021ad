#include "rankmerge/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <sstream>

#include "rankmerge/errors.hpp"
#include "rankmerge/parallel.hpp"

namespace rankmerge {

const char* sweep_parameter_name(SweepParameter p) {
    switch (p) {
        case SweepParameter::rho_h: return "rho_h";
        case SweepParameter::rho_t: return "rho_t";
        case SweepParameter::rho_nn: return "rho_nn";
        case SweepParameter::rho_nm: return "rho_nm";
        case SweepParameter::p: return "p";
        case SweepParameter::alpha: return "alpha";
    }
    return "?";
}

SweepParameter parse_sweep_parameter(const std::string& name) {
    if (name == "rho_h") return SweepParameter::rho_h;
    if (name == "rho_t") return SweepParameter::rho_t;
    if (name == "rho_nn") return SweepParameter::rho_nn;
    if (name == "rho_nm") return SweepParameter::rho_nm;
    if (name == "p") return SweepParameter::p;
    if (name == "alpha") return SweepParameter::alpha;
    throw ValidationError("unknown sweep parameter \"" + name + "\"");
}

void SweepSpec::validate() const {
    if (values.empty()) throw ValidationError("sweep: values must be non-empty");
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (!(values[i] > values[i - 1])) {
            throw ValidationError("sweep: values must be strictly increasing");
        }
    }
    if (!(w_mrr + w_ndcg > 0.0)) throw ValidationError("sweep: objective weights must sum to > 0");
    base_config.validate();
}

namespace {

int require_count(double value, const char* name) {
    if (!(value >= 0.0) || std::round(value) != value ||
        value > static_cast<double>(std::numeric_limits<int>::max())) {
        throw ValidationError(std::string(name) + ": nonnegative integer required");
    }
    return static_cast<int>(value);
}

EnsembleConfig with_value(const EnsembleConfig& base, SweepParameter param, double value) {
    EnsembleConfig config = base;
    switch (param) {
        case SweepParameter::rho_h: config.rho_h = require_count(value, "rho_h"); break;
        case SweepParameter::rho_t: config.rho_t = require_count(value, "rho_t"); break;
        case SweepParameter::rho_nn: config.rho_nn = require_count(value, "rho_nn"); break;
        case SweepParameter::rho_nm: config.rho_nm = require_count(value, "rho_nm"); break;
        case SweepParameter::p: config.p = value; break;
        case SweepParameter::alpha: break; // alpha does not live in the config
    }
    return config;
}

double avg_set_size(const std::vector<MergedRanking>& merged) {
    double sum = 0.0;
    for (const auto& m : merged) sum += static_cast<double>(m.mrr_set_size);
    return merged.empty() ? 0.0 : sum / static_cast<double>(merged.size());
}

MetricsReport evaluate_two_step(const Dataset& ds, const RunSet& runs,
                                const EnsembleConfig& config, int threads,
                                const EvaluateOptions& eval) {
    std::vector<MergedRanking> merged = two_step_rank_all(runs, config, ds, threads);
    std::vector<RankVector> rankings(merged.size());
    for (std::size_t i = 0; i < merged.size(); ++i) rankings[i] = merged[i].to_rank_vector();
    MetricsReport report = evaluate(rankings, ds, eval);
    report.avg_mrr_set_size = avg_set_size(merged);
    return report;
}

} // namespace

std::vector<AblationRow> run_ablation(const Dataset& ds, const RunSet& runs,
                                      const EnsembleConfig& base, int threads,
                                      const EvaluateOptions& eval) {
    base.validate();
    // Fixed row order: H / T / N / T+N / H+N / H+T / H+T+N.
    static constexpr bool kToggles[7][3] = {
        {true, false, false}, {false, true, false}, {false, false, true},
        {false, true, true},  {true, false, true},  {true, true, false},
        {true, true, true},
    };
    std::vector<AblationRow> rows;
    rows.reserve(7);
    for (const auto& toggles : kToggles) {
        EnsembleConfig config = base;
        config.enable_h = toggles[0];
        config.enable_t = toggles[1];
        config.enable_n = toggles[2];
        AblationRow row;
        row.enable_h = toggles[0];
        row.enable_t = toggles[1];
        row.enable_n = toggles[2];
        row.report = evaluate_two_step(ds, runs, config, threads, eval);
        rows.push_back(std::move(row));
    }
    return rows;
}

SweepResult run_sweep(const Dataset& ds, const RunSet& runs, const SweepSpec& spec, int threads,
                      EvaluateOptions eval) {
    spec.validate();
    eval.threads = threads;
    SweepResult result;
    result.rows.reserve(spec.values.size());
    for (double value : spec.values) {
        SweepRow row;
        row.value = value;
        if (spec.parameter == SweepParameter::alpha) {
            const ModelRun& mrr_run = runs.get(spec.base_config.primary_mrr_model);
            const ModelRun& ndcg_run = runs.get(spec.base_config.ndcg_model_id);
            std::vector<RankVector> blended = naive_blend_all(mrr_run, ndcg_run, value, ds, threads);
            row.report = evaluate(blended, ds, eval);
        } else {
            EnsembleConfig config = with_value(spec.base_config, spec.parameter, value);
            row.report = evaluate_two_step(ds, runs, config, threads, eval);
        }
        result.rows.push_back(std::move(row));
    }
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < result.rows.size(); ++i) {
        const MetricsReport& r = result.rows[i].report;
        double objective = spec.w_mrr * r.mrr + spec.w_ndcg * r.ndcg.value_or(0.0);
        if (objective > best) {
            best = objective;
            result.best_index = i;
        }
    }
    return result;
}

std::string provenance_report(const Dataset& ds, const RunSet& runs, const EnsembleConfig& config,
                              const std::vector<std::string>& question_ids, int remainder_depth) {
    config.validate();
    if (remainder_depth < 0) throw ValidationError("remainder_depth must be nonnegative");
    std::ostringstream out;
    bool first = true;
    for (const auto& qid : question_ids) {
        const QuestionRecord& q = ds.at(ds.index_of(qid));
        MergedRanking merged = two_step_rank(runs, config, qid);
        auto label = [&](int candidate) {
            std::ostringstream line;
            line << '#' << candidate;
            if (q.candidates) {
                line << ' ' << (*q.candidates)[static_cast<std::size_t>(candidate)];
            }
            return line.str();
        };
        if (!first) out << '\n';
        first = false;
        out << "question: " << qid << '\n';
        if (merged.mrr_set_size > 0) {
            out << "mrr candidate set\n";
            for (int i = 0; i < merged.mrr_set_size; ++i) {
                out << "  " << (i + 1) << ". [" << provenance_tag(merged.provenance[static_cast<std::size_t>(i)])
                    << "] " << label(merged.order[static_cast<std::size_t>(i)]) << '\n';
            }
        }
        int depth = std::min(remainder_depth,
                             static_cast<int>(merged.order.size()) - merged.mrr_set_size);
        out << "next " << depth << " ndcg candidates\n";
        for (int i = 0; i < depth; ++i) {
            int pos = merged.mrr_set_size + i;
            out << "  " << (pos + 1) << ". " << label(merged.order[static_cast<std::size_t>(pos)])
                << '\n';
        }
    }
    return out.str();
}

void SynthSpec::validate() const {
    if (d < 1) throw ValidationError("synth: d must be >= 1");
    if (n < 1) throw ValidationError("synth: n must be >= 1");
    if (n_m < 1) throw ValidationError("synth: n_m must be >= 1");
    if (!(mrr_fidelity >= 0.0 && mrr_fidelity <= 1.0)) {
        throw ValidationError("synth: mrr_fidelity outside [0,1]");
    }
    if (!(ndcg_fidelity >= 0.0 && ndcg_fidelity <= 1.0)) {
        throw ValidationError("synth: ndcg_fidelity outside [0,1]");
    }
}

namespace {

// Hand-rolled uniforms: std distributions are implementation-defined, and the
// generator promises bit-identical output for a given seed.
double u01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

int uniform_below(std::mt19937_64& rng, int n) {
    return static_cast<int>(rng() % static_cast<std::uint64_t>(n));
}

} // namespace

SynthOutput generate_synthetic(const SynthSpec& spec) {
    spec.validate();
    std::mt19937_64 rng(spec.seed);

    // Fraction of non-reference candidates given positive relevance, and the
    // three annotator-fraction levels a positive can take.
    constexpr double kPositiveRate = 0.12;
    constexpr double kLevels[3] = {1.0 / 3.0, 2.0 / 3.0, 1.0};

    std::vector<QuestionRecord> questions;
    questions.reserve(spec.d);
    for (std::size_t i = 0; i < spec.d; ++i) {
        QuestionRecord q;
        q.question_id = "q" + std::to_string(i + 1);
        q.candidate_count = spec.n;
        q.gt_index = uniform_below(rng, spec.n);
        std::vector<double> relevance(static_cast<std::size_t>(spec.n), 0.0);
        for (int j = 0; j < spec.n; ++j) {
            if (j == q.gt_index) {
                relevance[static_cast<std::size_t>(j)] = 1.0;
            } else if (u01(rng) < kPositiveRate) {
                relevance[static_cast<std::size_t>(j)] = kLevels[uniform_below(rng, 3)];
            }
        }
        q.relevance = std::move(relevance);
        questions.push_back(std::move(q));
    }
    Dataset dataset(std::move(questions));

    RunSet runs;
    for (int m = 0; m < spec.n_m; ++m) {
        std::vector<std::pair<std::string, std::vector<double>>> per_question;
        per_question.reserve(spec.d);
        for (std::size_t i = 0; i < spec.d; ++i) {
            const QuestionRecord& q = dataset.at(i);
            std::vector<double> scores(static_cast<std::size_t>(spec.n));
            for (int j = 0; j < spec.n; ++j) scores[static_cast<std::size_t>(j)] = u01(rng);
            if (u01(rng) < spec.mrr_fidelity) {
                // Strictly above every other score, which stays below 1.
                scores[static_cast<std::size_t>(q.gt_index)] = 1.0 + u01(rng);
            }
            per_question.emplace_back(q.question_id, std::move(scores));
        }
        runs.add(ModelRun::from_scores("mrr_" + std::to_string(m + 1), std::move(per_question)));
    }
    {
        std::vector<std::pair<std::string, std::vector<double>>> per_question;
        per_question.reserve(spec.d);
        for (std::size_t i = 0; i < spec.d; ++i) {
            const QuestionRecord& q = dataset.at(i);
            const std::vector<double>& rel = *q.relevance;
            std::vector<double> scores(static_cast<std::size_t>(spec.n));
            for (int j = 0; j < spec.n; ++j) {
                scores[static_cast<std::size_t>(j)] =
                    spec.ndcg_fidelity * rel[static_cast<std::size_t>(j)] +
                    (1.0 - spec.ndcg_fidelity) * u01(rng);
            }
            per_question.emplace_back(q.question_id, std::move(scores));
        }
        runs.add(ModelRun::from_scores("ndcg", std::move(per_question)));
    }

    return SynthOutput{std::move(dataset), std::move(runs)};
}

} // namespace rankmerge
