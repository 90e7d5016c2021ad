#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "rankmerge/dataset.hpp"
#include "rankmerge/rankings.hpp"

namespace rankmerge {

// Dataset-level retrieval metrics.
struct MetricsReport {
    double mrr = 0.0;
    std::map<int, double> recall_at;   // k -> fraction of questions with rank <= k
    double mean_rank = 0.0;
    std::optional<double> ndcg;            // absent when no question carries relevance
    std::optional<double> avg_mrr_set_size; // filled by ensemble evaluation paths
    std::size_t d = 0;
};

// Mean reciprocal rank of the human-derived answer: (1/d) * sum(1/r_i).
// Ranks are 1-based; throws on an empty vector or a rank < 1.
double mrr(std::span<const int> human_ranks);

// Fraction of questions whose human rank is <= k.
double recall_at_k(std::span<const int> human_ranks, int k);

// Arithmetic mean of the human ranks.
double mean_rank(std::span<const int> human_ranks);

// Normalized discounted cumulative gain of one ranking against a relevance
// vector. K is the number of positively relevant candidates;
// DCG_K = sum_{i=1..K} s_(i) / log2(i+1) with s_(i) the relevance of the
// candidate placed at position i, normalized by the ideal DCG. K = 0 yields
// 0 by convention.
double ndcg_question(const RankVector& predicted_order, std::span<const double> relevance);

struct EvaluateOptions {
    std::vector<int> recall_ks = {1, 5, 10};
    // Skip K=0 questions from the NDCG mean instead of counting them as 0.
    bool ndcg_skip_empty = false;
    int threads = 1;
};

// Scores one ranking per question against the corpus. The per-question NDCG
// is averaged over questions that carry a relevance vector and omitted from
// the report when none do. `per_question` is aligned with ds.questions().
MetricsReport evaluate(const std::vector<RankVector>& per_question, const Dataset& ds,
                       const EvaluateOptions& options = {});

// Map-keyed entry point; throws ValidationError on a coverage gap.
MetricsReport evaluate(const std::unordered_map<std::string, RankVector>& ranking,
                       const Dataset& ds, const EvaluateOptions& options = {});

} // namespace rankmerge
