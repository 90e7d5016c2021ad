#include "rankmerge/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "rankmerge/errors.hpp"
#include "rankmerge/parallel.hpp"

namespace rankmerge {

namespace {

void check_ranks(std::span<const int> human_ranks) {
    if (human_ranks.empty()) throw ValidationError("metric input is empty");
    for (int r : human_ranks) {
        if (r < 1) throw ValidationError("rank < 1 in metric input");
    }
}

} // namespace

double mrr(std::span<const int> human_ranks) {
    check_ranks(human_ranks);
    double sum = 0.0;
    for (int r : human_ranks) sum += 1.0 / static_cast<double>(r);
    return sum / static_cast<double>(human_ranks.size());
}

double recall_at_k(std::span<const int> human_ranks, int k) {
    check_ranks(human_ranks);
    if (k < 1) throw ValidationError("recall_at_k: k must be >= 1");
    std::size_t hits = 0;
    for (int r : human_ranks) {
        if (r <= k) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(human_ranks.size());
}

double mean_rank(std::span<const int> human_ranks) {
    check_ranks(human_ranks);
    double sum = 0.0;
    for (int r : human_ranks) sum += static_cast<double>(r);
    return sum / static_cast<double>(human_ranks.size());
}

double ndcg_question(const RankVector& predicted_order, std::span<const double> relevance) {
    if (static_cast<int>(relevance.size()) != predicted_order.size()) {
        throw ValidationError("ndcg: relevance length mismatch");
    }
    int num_positive = 0;
    for (double s : relevance) {
        if (!(s >= 0.0 && s <= 1.0)) throw ValidationError("ndcg: relevance entry outside [0,1]");
        if (s > 0.0) ++num_positive;
    }
    if (num_positive == 0) return 0.0;

    std::vector<int> order = predicted_order.order();
    double dcg = 0.0;
    for (int i = 1; i <= num_positive; ++i) {
        dcg += relevance[static_cast<std::size_t>(order[static_cast<std::size_t>(i - 1)])] /
               std::log2(static_cast<double>(i) + 1.0);
    }
    std::vector<double> ideal(relevance.begin(), relevance.end());
    std::sort(ideal.begin(), ideal.end(), std::greater<double>());
    double idcg = 0.0;
    for (int i = 1; i <= num_positive; ++i) {
        idcg += ideal[static_cast<std::size_t>(i - 1)] / std::log2(static_cast<double>(i) + 1.0);
    }
    return dcg / idcg;
}

MetricsReport evaluate(const std::vector<RankVector>& per_question, const Dataset& ds,
                       const EvaluateOptions& options) {
    if (ds.empty()) throw ValidationError("evaluate: empty dataset");
    if (per_question.size() != ds.size()) {
        throw ValidationError("evaluate: ranking count does not match dataset size");
    }

    const std::size_t d = ds.size();
    std::vector<int> human_ranks(d);
    std::vector<double> ndcg_vals(d, -1.0);
    parallel_for(d, options.threads, [&](std::size_t i) {
        const QuestionRecord& q = ds.at(i);
        const RankVector& rv = per_question[i];
        if (rv.size() != q.candidate_count) {
            throw ValidationError("evaluate: ranking length mismatch for question \"" +
                                  q.question_id + "\"");
        }
        human_ranks[i] = rv.rank_of(q.gt_index);
        if (q.relevance) ndcg_vals[i] = ndcg_question(rv, *q.relevance);
    });

    MetricsReport report;
    report.d = d;
    report.mrr = mrr(human_ranks);
    for (int k : options.recall_ks) report.recall_at[k] = recall_at_k(human_ranks, k);
    report.mean_rank = mean_rank(human_ranks);

    // Fixed question order keeps the reduction bit-reproducible.
    double ndcg_sum = 0.0;
    std::size_t ndcg_count = 0;
    for (std::size_t i = 0; i < d; ++i) {
        const QuestionRecord& q = ds.at(i);
        if (!q.relevance) continue;
        if (options.ndcg_skip_empty) {
            bool has_positive =
                std::any_of(q.relevance->begin(), q.relevance->end(), [](double s) { return s > 0.0; });
            if (!has_positive) continue;
        }
        ndcg_sum += ndcg_vals[i];
        ++ndcg_count;
    }
    if (ndcg_count > 0) report.ndcg = ndcg_sum / static_cast<double>(ndcg_count);
    return report;
}

MetricsReport evaluate(const std::unordered_map<std::string, RankVector>& ranking,
                       const Dataset& ds, const EvaluateOptions& options) {
    std::vector<RankVector> aligned;
    aligned.reserve(ds.size());
    for (const auto& q : ds.questions()) {
        auto it = ranking.find(q.question_id);
        if (it == ranking.end()) {
            throw ValidationError("evaluate: no ranking for question \"" + q.question_id + "\"");
        }
        aligned.push_back(it->second);
    }
    return evaluate(aligned, ds, options);
}

} // namespace rankmerge
