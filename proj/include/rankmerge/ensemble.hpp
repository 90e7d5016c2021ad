#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rankmerge/dataset.hpp"
#include "rankmerge/rankings.hpp"

namespace rankmerge {

// Hyperparameters and model wiring for the two-step merge.
//
// rho_h:  agreement prefix — a candidate is high-certainty when every
//         reciprocal-rank model places it in its top rho_h.
// rho_t:  per-model prefix kept unconditionally (top answers).
// rho_nn / rho_nm: prefixes on the gain-model side and the
//         reciprocal-rank-model side of the agreement set.
// p:      calibration exponent in the second-step key (r_n)^p * r_m.
struct EnsembleConfig {
    int rho_h = 3;
    int rho_t = 1;
    int rho_nn = 5;
    int rho_nm = 10;
    double p = 3.0;

    bool enable_h = true;
    bool enable_t = true;
    bool enable_n = true;

    std::vector<std::string> mrr_model_ids;
    std::string primary_mrr_model;
    std::string ndcg_model_id;

    // Throws ValidationError unless: mrr_model_ids non-empty, primary is one
    // of them, every rho >= 0, and p > 0.
    void validate() const;
};

enum class Provenance : std::uint8_t { high_certainty, top_answer, ndcg_agreement, remainder };

// Single-letter tag: H, T, N, R.
char provenance_tag(Provenance p);

// Final permutation for one question. order[i] is the candidate at 1-based
// position i+1; provenance[i] tags that candidate. Members of the first-step
// candidate set always precede every remainder candidate.
struct MergedRanking {
    std::vector<int> order;
    std::vector<Provenance> provenance;
    int mrr_set_size = 0;

    RankVector to_rank_vector() const { return RankVector::from_order(order); }
};

// The three building-block subsets (each ascending by candidate index, empty
// when its toggle is off).
//
// High certainty: candidates inside every reciprocal-rank model's top rho_h.
std::vector<int> high_certainty_set(const RunSet& runs, const EnsembleConfig& config,
                                    const std::string& question_id);
// Top answers: candidates inside any reciprocal-rank model's top rho_t.
std::vector<int> top_answers_set(const RunSet& runs, const EnsembleConfig& config,
                                 const std::string& question_id);
// Agreement: candidates in the gain model's top rho_nn that some
// reciprocal-rank model also places in its top rho_nm.
std::vector<int> ndcg_agreement_set(const RunSet& runs, const EnsembleConfig& config,
                                    const std::string& question_id);

struct MrrCandidateSet {
    std::vector<int> members;             // ascending candidate index
    std::vector<Provenance> tag_by_candidate; // size n; remainder when unclaimed
};

// Union of the enabled subsets with provenance priority H > T > N.
MrrCandidateSet mrr_candidate_set(const RunSet& runs, const EnsembleConfig& config,
                                  const std::string& question_id);

// First-step key: product of the candidate's 1-based ranks across all
// reciprocal-rank models, in exact 64-bit arithmetic. Throws
// std::overflow_error if the product leaves the 64-bit range.
std::int64_t mrr_step_rank(const RunSet& runs, const EnsembleConfig& config,
                           const std::string& question_id, int candidate);

// Second-step key: (rank under gain model)^p * (rank under the primary
// reciprocal-rank model); smaller is better.
double ndcg_step_key(const RunSet& runs, const EnsembleConfig& config,
                     const std::string& question_id, int candidate);

// The full two-step merge for one question: the candidate set sorted by the
// first-step key, then everything else by the second-step key. Ties in
// either step break by (rank under primary model, candidate index).
MergedRanking two_step_rank(const RunSet& runs, const EnsembleConfig& config,
                            const std::string& question_id);

// Corpus-wide merge, aligned with ds.questions(). Per-question results are
// independent; `threads` bounds the fan-out.
std::vector<MergedRanking> two_step_rank_all(const RunSet& runs, const EnsembleConfig& config,
                                             const Dataset& ds, int threads = 1);

// Score-level baseline: ranks of alpha * mrr_scores + (1 - alpha) * ndcg_scores.
// Both runs must be score-kind; alpha in [0,1].
RankVector naive_blend(const ModelRun& mrr_run, const ModelRun& ndcg_run, double alpha,
                       const std::string& question_id);

std::vector<RankVector> naive_blend_all(const ModelRun& mrr_run, const ModelRun& ndcg_run,
                                        double alpha, const Dataset& ds, int threads = 1);

} // namespace rankmerge
